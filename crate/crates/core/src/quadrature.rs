//! Gauss-Hermite rules for the weight `exp(-s x^2)` and deterministic tensor
//! summation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::C64;

/// Points per chunk in tensor sums. Fixed so that the reduction tree does
/// not depend on the thread count.
const CHUNK: usize = 1024;

/// Nodes and weights for `int f(x) exp(-s x^2) dx`, nodes ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct GhRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scale: f64,
}

/// Gauss-Hermite rule with `n` nodes for the weight `exp(-x^2)`, by Newton
/// iteration on the orthonormal Hermite recurrence.
fn hermite_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    const MAXIT: usize = 100;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..MAXIT {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { iterations: MAXIT });
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    Ok((idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| w[i]).collect()))
}

impl GhRule {
    pub fn new(n: usize, scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a quadrature rule needs at least one node".into()));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidInput(format!("weight scale must be positive, got {scale}")));
        }
        let (t, w) = hermite_unit(n)?;
        let r = scale.sqrt();
        Ok(GhRule {
            nodes: t.iter().map(|t| t / r).collect(),
            weights: w.iter().map(|w| w / r).collect(),
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes needed for exactness on a real axis carrying a polynomial of the
/// given degree.
pub fn required_nodes(degree: u32) -> usize {
    (degree as usize + 2) / 2
}

/// Node count with the 1.5x safety margin.
pub fn nodes_with_margin(degree: u32) -> usize {
    (3 * required_nodes(degree)).div_ceil(2)
}

/// Tensor Gauss-Hermite grid on `C^n`: each complex coordinate contributes
/// two real axes with the same node count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    pub nodes_per_axis: Vec<usize>,
    pub weight_scale: f64,
}

impl QuadGrid {
    pub fn uniform(n: usize, nodes: usize, weight_scale: f64) -> Self {
        QuadGrid {
            nodes_per_axis: vec![nodes; n],
            weight_scale,
        }
    }

    /// Grid covering per-coordinate real-axis degrees with the margin.
    pub fn for_degrees(degrees: &[u32], weight_scale: f64) -> Self {
        QuadGrid {
            nodes_per_axis: degrees.iter().map(|&d| nodes_with_margin(d)).collect(),
            weight_scale,
        }
    }

    pub fn n(&self) -> usize {
        self.nodes_per_axis.len()
    }

    /// Errors unless every coordinate carries enough nodes for `degrees`.
    pub fn check_degrees(&self, degrees: &[u32]) -> Result<()> {
        if degrees.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} complex coordinates, integrand has {}",
                self.n(),
                degrees.len()
            )));
        }
        for (&d, &have) in degrees.iter().zip(&self.nodes_per_axis) {
            let need = required_nodes(d);
            if have < need {
                return Err(Error::InsufficientNodes {
                    required: need,
                    available: have,
                });
            }
        }
        Ok(())
    }

    /// Real-axis rules, two per complex coordinate (real part, imaginary part).
    pub fn axes(&self) -> Result<Vec<GhRule>> {
        let mut out = Vec::with_capacity(2 * self.n());
        for &k in &self.nodes_per_axis {
            let r = GhRule::new(k, self.weight_scale)?;
            out.push(r.clone());
            out.push(r);
        }
        Ok(out)
    }

    pub fn point_count(&self) -> usize {
        self.nodes_per_axis.iter().map(|k| k * k).product()
    }
}

/// Pairwise (tree) sum of `width`-wide rows stored contiguously.
fn pairwise_rows(rows: &[C64], width: usize) -> Vec<C64> {
    let count = rows.len() / width.max(1);
    if width == 0 {
        return Vec::new();
    }
    if count <= 8 {
        let mut acc = vec![C64::new(0.0, 0.0); width];
        for r in rows.chunks_exact(width) {
            for (a, b) in acc.iter_mut().zip(r) {
                *a += b;
            }
        }
        return acc;
    }
    let mid = count / 2;
    let (a, b) = rows.split_at(mid * width);
    let mut left = pairwise_rows(a, width);
    let right = pairwise_rows(b, width);
    for (x, y) in left.iter_mut().zip(&right) {
        *x += y;
    }
    left
}

/// Pairwise sum of complex values.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    pairwise_rows(values, 1).first().copied().unwrap_or_default()
}

/// Integrates `f(x) * prod_k exp(-s_k x_k^2)` over the tensor grid of the
/// given real axes. `f` writes `width` values for a node; the result is
/// independent of the number of worker threads.
pub fn tensor_integrate<F>(axes: &[GhRule], width: usize, f: F) -> Vec<C64>
where
    F: Fn(&[f64], &mut [C64]) + Sync,
{
    let total: usize = axes.iter().map(GhRule::len).product();
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<Vec<C64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut rows = vec![C64::new(0.0, 0.0); (end - start) * width];
            let mut x = vec![0.0; axes.len()];
            let mut buf = vec![C64::new(0.0, 0.0); width];
            for (row, idx) in rows.chunks_exact_mut(width.max(1)).zip(start..end) {
                let mut rem = idx;
                let mut wt = 1.0;
                for (k, ax) in axes.iter().enumerate().rev() {
                    let j = rem % ax.len();
                    rem /= ax.len();
                    x[k] = ax.nodes[j];
                    wt *= ax.weights[j];
                }
                buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
                f(&x, &mut buf);
                for (r, b) in row.iter_mut().zip(&buf) {
                    *r = b * wt;
                }
            }
            pairwise_rows(&rows, width)
        })
        .collect();
    let flat: Vec<C64> = partial.into_iter().flatten().collect();
    if flat.is_empty() {
        return vec![C64::new(0.0, 0.0); width];
    }
    pairwise_rows(&flat, width)
}
