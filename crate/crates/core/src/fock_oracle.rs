//! Independent numerical ground truth for the symbolic calculus.
//!
//! Compositions are integrated over the middle variable by tensor
//! Gauss-Hermite quadrature after shifting each middle coordinate to the
//! saddle of the Gaussian. Kernels are treated as black boxes evaluated at
//! complexified points, so nothing here reuses the composition rules.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_eval_c, KernelExpr, KernelKind};
use crate::ladder::{apply_ladder, apply_model_laplacian, Ladder};
use crate::poly::{CMatrix, CPoint, CompiledPoly, Dims, Monomial, Poly, Slot, VarId, C64};
use crate::quadrature::{tensor_integrate, QuadGrid};

/// Closed-form `int exp(-pi|z|^2) z^a zb^b = delta_ab a!/pi^a`.
pub fn gaussian_moment(a: u32, b: u32) -> f64 {
    if a != b {
        return 0.0;
    }
    (1..=a).map(|k| k as f64 / PI).product()
}

/// Multi-index labelling Fock states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockIndex(pub Vec<u32>);

impl FockIndex {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// `|| z^beta exp(-pi|z|^2/2) || = sqrt(beta!/pi^|beta|)`.
pub fn fock_norm(beta: &FockIndex) -> f64 {
    beta.0
        .iter()
        .map(|&b| gaussian_moment(b, b))
        .product::<f64>()
        .sqrt()
}

/// Anything with a kernel that can be evaluated at complexified points.
pub trait KernelOperator: Sync {
    /// Complex dimension of the unprimed variable.
    fn out_dim(&self) -> usize;
    /// Complex dimension of the primed variable.
    fn in_dim(&self) -> usize;
    fn fiber_rank(&self) -> usize;
    /// `s` in the Gaussian `exp(-s/2 |z|^2 - s/2 |z'|^2 + s z zb')`.
    fn weight_scale(&self) -> f64;
    /// Whether coordinate `i` carries the cross term.
    fn coupled(&self, i: usize) -> bool;
    /// Degree in `z_i, zb_i`, or `None` for non-polynomial kernels.
    fn out_degree(&self, i: usize) -> Option<u32>;
    /// Degree in `z'_i, zb'_i`, or `None` for non-polynomial kernels.
    fn in_degree(&self, i: usize) -> Option<u32>;
    /// True when the numerator has no holomorphic primed variables.
    fn primed_antiholomorphic(&self) -> bool;
    /// Writes the column-major fiber matrix at `(z, zp)` into `out`.
    fn eval_c(&self, z: &CPoint, zp: &CPoint, out: &mut [C64]);
}

/// Flattened kernel expression for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledKernel {
    kind: KernelKind,
    poly: CompiledPoly,
    rank: usize,
    out_deg: Vec<u32>,
    in_deg: Vec<u32>,
    antihol: bool,
}

impl CompiledKernel {
    pub fn new(e: &KernelExpr) -> Self {
        let k = e.kind();
        let num = e.numerator();
        CompiledKernel {
            kind: k,
            poly: num.compile(),
            rank: num.fiber_rank(),
            out_deg: (1..=k.unprimed_dim()).map(|i| num.degree_in(Slot::Unprimed, i)).collect(),
            in_deg: (1..=k.primed_dim()).map(|i| num.degree_in(Slot::Primed, i)).collect(),
            antihol: !num.uses(|v| v.slot == Slot::Primed && v.kind == crate::poly::VarKind::Hol),
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
}

impl KernelOperator for CompiledKernel {
    fn out_dim(&self) -> usize {
        self.kind.unprimed_dim()
    }
    fn in_dim(&self) -> usize {
        self.kind.primed_dim()
    }
    fn fiber_rank(&self) -> usize {
        self.rank
    }
    fn weight_scale(&self) -> f64 {
        PI
    }
    fn coupled(&self, i: usize) -> bool {
        self.kind.coord_form(i).cross
    }
    fn out_degree(&self, i: usize) -> Option<u32> {
        Some(self.out_deg.get(i - 1).copied().unwrap_or(0))
    }
    fn in_degree(&self, i: usize) -> Option<u32> {
        Some(self.in_deg.get(i - 1).copied().unwrap_or(0))
    }
    fn primed_antiholomorphic(&self) -> bool {
        self.antihol
    }
    fn eval_c(&self, z: &CPoint, zp: &CPoint, out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        let g = kernel_eval_c(self.kind, z, zp);
        self.poly.eval_into(z, zp, g, out);
    }
}

/// A Fock state `W^beta exp(-s|W|^2/2) / norm` seen as a kernel with an
/// empty primed variable.
struct FockState {
    beta: Vec<u32>,
    scale: f64,
    inv_norm: f64,
    rank: usize,
}

impl FockState {
    fn new(beta: Vec<u32>, scale: f64, rank: usize) -> Self {
        let norm2: f64 = beta
            .iter()
            .map(|&a| PI * (1..=a).map(|k| k as f64).product::<f64>() / scale.powi(a as i32 + 1))
            .product();
        FockState {
            beta,
            scale,
            inv_norm: 1.0 / norm2.sqrt(),
            rank,
        }
    }

    fn value(&self, w: &CPoint) -> C64 {
        let mut v = C64::new(self.inv_norm, 0.0) * (-self.scale / 2.0 * w.norm_sqr()).exp();
        for (i, &b) in self.beta.iter().enumerate() {
            v *= crate::poly::pow(w.hol[i], b);
        }
        v
    }
}

impl KernelOperator for FockState {
    fn out_dim(&self) -> usize {
        self.beta.len()
    }
    fn in_dim(&self) -> usize {
        0
    }
    fn fiber_rank(&self) -> usize {
        self.rank
    }
    fn weight_scale(&self) -> f64 {
        self.scale
    }
    fn coupled(&self, _i: usize) -> bool {
        false
    }
    fn out_degree(&self, i: usize) -> Option<u32> {
        Some(self.beta.get(i - 1).copied().unwrap_or(0))
    }
    fn in_degree(&self, _i: usize) -> Option<u32> {
        Some(0)
    }
    fn primed_antiholomorphic(&self) -> bool {
        true
    }
    fn eval_c(&self, z: &CPoint, _zp: &CPoint, out: &mut [C64]) {
        let v = self.value(z);
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for j in 0..self.rank {
            out[j * self.rank + j] = v;
        }
    }
}

/// Column-major `c += a * b` for square matrices of side `r`.
fn matmul_acc(a: &[C64], b: &[C64], r: usize, scale: C64, c: &mut [C64]) {
    for j in 0..r {
        for k in 0..r {
            let bkj = b[j * r + k] * scale;
            if bkj == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..r {
                c[j * r + i] += a[k * r + i] * bkj;
            }
        }
    }
}

/// A pair of outer points in `C^out x C^in`.
pub type PointPair = (Vec<C64>, Vec<C64>);

/// Middle-variable integral `int e1(Z, W) e2(W, Z') dW`, one matrix per
/// evaluation point. Polynomial operators are checked against the grid's
/// exactness budget; non-polynomial ones are integrated as given.
pub fn oracle_compose(
    e1: &dyn KernelOperator,
    e2: &dyn KernelOperator,
    grid: &QuadGrid,
    points: &[PointPair],
) -> Result<Vec<CMatrix>> {
    let mid = e1.in_dim();
    if e2.out_dim() != mid {
        return Err(Error::DimensionMismatch(format!(
            "left operator acts on C^{mid}, right operator maps into C^{}",
            e2.out_dim()
        )));
    }
    if e1.fiber_rank() != e2.fiber_rank() {
        return Err(Error::FiberRankMismatch {
            left: e1.fiber_rank(),
            right: e2.fiber_rank(),
        });
    }
    let s = e1.weight_scale();
    if (e2.weight_scale() - s).abs() > 1e-14 * s || (grid.weight_scale - s).abs() > 1e-14 * s {
        return Err(Error::InvalidInput(format!(
            "weight scales differ: {s}, {}, grid {}",
            e2.weight_scale(),
            grid.weight_scale
        )));
    }
    if let Some(degrees) = middle_degrees(e1, e2) {
        grid.check_degrees(&degrees)?;
    } else if grid.n() != mid {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} coordinates, middle space has {mid}",
            grid.n()
        )));
    }
    let axes = grid.axes()?;
    let r = e1.fiber_rank();
    let shift = shift_allowed(e1, e2);
    let mut out = Vec::with_capacity(points.len());
    for (z, zp) in points {
        if z.len() != e1.out_dim() || zp.len() != e2.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "evaluation point in C^{} x C^{}, expected C^{} x C^{}",
                z.len(),
                zp.len(),
                e1.out_dim(),
                e2.in_dim()
            )));
        }
        let zc = CPoint::real(z);
        let zpc = CPoint::real(zp);
        let centers: Vec<(C64, C64)> = (1..=mid)
            .map(|i| {
                if !shift {
                    return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                }
                let c1 = if e1.coupled(i) { zc.value(crate::poly::VarKind::Hol, i) } else { C64::new(0.0, 0.0) };
                let c2 = if e2.coupled(i) { zpc.value(crate::poly::VarKind::Antihol, i) } else { C64::new(0.0, 0.0) };
                ((c1 + c2) / 2.0, C64::new(0.0, 1.0) * (c2 - c1) / 2.0)
            })
            .collect();
        let v = tensor_integrate(&axes, r * r, |x, acc| {
            let mut w = CPoint {
                hol: vec![C64::new(0.0, 0.0); mid],
                anti: vec![C64::new(0.0, 0.0); mid],
            };
            let mut gauss = 0.0;
            for i in 0..mid {
                let (u, v) = (x[2 * i], x[2 * i + 1]);
                gauss += u * u + v * v;
                let uu = centers[i].0 + u;
                let vv = centers[i].1 + v;
                w.hol[i] = uu + C64::new(0.0, 1.0) * vv;
                w.anti[i] = uu - C64::new(0.0, 1.0) * vv;
            }
            let mut a = vec![C64::new(0.0, 0.0); r * r];
            let mut b = vec![C64::new(0.0, 0.0); r * r];
            e1.eval_c(&zc, &w, &mut a);
            e2.eval_c(&w, &zpc, &mut b);
            matmul_acc(&a, &b, r, C64::new((s * gauss).exp(), 0.0), acc);
        });
        out.push(CMatrix::from_column_slice(r, r, &v));
    }
    Ok(out)
}

fn shift_allowed(e1: &dyn KernelOperator, e2: &dyn KernelOperator) -> bool {
    (1..=e1.in_dim()).all(|i| e1.in_degree(i).is_some() && e2.out_degree(i).is_some())
}

/// Per-coordinate real-axis degree of the middle integrand, if polynomial.
pub fn middle_degrees(e1: &dyn KernelOperator, e2: &dyn KernelOperator) -> Option<Vec<u32>> {
    (1..=e1.in_dim())
        .map(|i| Some(e1.in_degree(i)? + e2.out_degree(i)?))
        .collect()
}

/// Exact grid for the middle integral of a polynomial pair.
pub fn oracle_grid(e1: &dyn KernelOperator, e2: &dyn KernelOperator) -> Result<QuadGrid> {
    let degrees = middle_degrees(e1, e2).ok_or_else(|| {
        Error::QuadratureBudget("non-polynomial kernel needs an explicit grid".into())
    })?;
    Ok(QuadGrid::for_degrees(&degrees, e1.weight_scale()))
}

/// Symbolic-versus-quadrature comparison record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub max_abs: f64,
    pub max_rel: f64,
    pub grid: QuadGrid,
    pub pass: bool,
}

/// Deviation `|a - b|_F / max(|b|_F, 1)` per point, reduced by max.
pub fn compare(symbolic: &[CMatrix], oracle: &[CMatrix], grid: QuadGrid, tol: f64) -> OracleReport {
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (a, b) in symbolic.iter().zip(oracle) {
        let d = (a - b).norm();
        max_abs = max_abs.max(d);
        max_rel = max_rel.max(d / b.norm().max(1.0));
    }
    let pass = symbolic.len() == oracle.len() && max_rel <= tol;
    OracleReport {
        max_abs,
        max_rel,
        grid,
        pass,
    }
}

/// The fixed evaluation set: every coordinate runs through five complex
/// values, offset per coordinate so that points are not diagonal.
pub const STANDARD_VALUES: [(f64, f64); 5] = [
    (0.0, 0.0),
    (0.3, 0.1),
    (-0.5, 0.2),
    (0.2, -0.6),
    (0.7, 0.4),
];

pub fn standard_points(out_dim: usize, in_dim: usize) -> Vec<PointPair> {
    let v = |k: usize| {
        let (re, im) = STANDARD_VALUES[k % 5];
        C64::new(re, im)
    };
    (0..5)
        .map(|k| {
            let z = (0..out_dim).map(|j| v(k + j)).collect();
            let zp = (0..in_dim).map(|j| v(k + j + 2)).collect();
            (z, zp)
        })
        .collect()
}

/// Evaluates `compose(e1, e2)` and the oracle on the same points.
pub fn check_composition(
    symbolic: &KernelExpr,
    e1: &KernelExpr,
    e2: &KernelExpr,
    points: &[PointPair],
    grid: Option<&QuadGrid>,
    tol: f64,
) -> Result<OracleReport> {
    let k1 = CompiledKernel::new(e1);
    let k2 = CompiledKernel::new(e2);
    let grid = match grid {
        Some(g) => g.clone(),
        None => oracle_grid(&k1, &k2)?,
    };
    let oracle = oracle_compose(&k1, &k2, &grid, points)?;
    let sym = points
        .iter()
        .map(|(z, zp)| symbolic.eval(z, zp))
        .collect::<Result<Vec<_>>>()?;
    Ok(compare(&sym, &oracle, grid, tol))
}

/// L^2 norm squared of `Q exp(-pi|Z|^2/2)` on `C^n` for a scalar `Q` in the
/// unprimed variables, by exact quadrature.
fn state_norm_sqr(q: &Poly, grid: Option<&QuadGrid>) -> Result<f64> {
    let n = q.dims().n;
    let degrees: Vec<u32> = (1..=n).map(|i| 2 * q.degree_in(Slot::Unprimed, i)).collect();
    let grid = match grid {
        Some(g) => {
            g.check_degrees(&degrees)?;
            g.clone()
        }
        None => QuadGrid::for_degrees(&degrees, PI),
    };
    let axes = grid.axes()?;
    let compiled = q.compile();
    let empty = CPoint::empty();
    let v = tensor_integrate(&axes, 1, |x, acc| {
        let z: Vec<C64> = (0..n).map(|i| C64::new(x[2 * i], x[2 * i + 1])).collect();
        let mut val = [C64::new(0.0, 0.0)];
        compiled.eval_into(&CPoint::real(&z), &empty, C64::new(1.0, 0.0), &mut val);
        acc[0] = C64::new(val[0].norm_sqr(), 0.0);
    });
    Ok(v[0].re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub eigenvalue: f64,
    pub residual: f64,
}

/// Builds `b^alpha (z^beta exp(-pi|z|^2/2))`, applies the model Laplacian
/// and returns `|(L - 4 pi |alpha|) state| / |state|`.
pub fn laplacian_eigencheck(alpha: &FockIndex, beta: &FockIndex, grid: Option<&QuadGrid>) -> Result<EigenCheck> {
    let n = alpha.0.len();
    if beta.0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {n} entries, beta has {}",
            beta.0.len()
        )));
    }
    let dims = Dims::new(n, 0, 1)?;
    let kind = KernelKind::Extension { n, m: 0 };
    let mono = Monomial::from_exps(beta.0.iter().enumerate().map(|(i, &b)| (VarId::z(i + 1), b)));
    let mut state = KernelExpr::new(Poly::monomial(dims, mono, C64::new(1.0, 0.0))?, kind)?;
    for (i, &a) in alpha.0.iter().enumerate() {
        for _ in 0..a {
            state = apply_ladder(&state, i + 1, Ladder::Creation, Slot::Unprimed)?;
        }
    }
    let lambda = 4.0 * PI * alpha.total() as f64;
    let l = apply_model_laplacian(&state, Slot::Unprimed)?;
    let diff = l.numerator().sub(&state.numerator().scale(C64::new(lambda, 0.0)))?;
    let num = state_norm_sqr(&diff, grid)?;
    let den = state_norm_sqr(state.numerator(), grid)?;
    Ok(EigenCheck {
        eigenvalue: lambda,
        residual: (num / den).sqrt(),
    })
}

/// Settings for [`norm_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormConfig {
    pub seed: u64,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            seed: 0,
            max_iter: 10_000,
            rel_tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub basis_size: usize,
    pub iterations: usize,
}

fn multi_indices(dim: usize, cutoff: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=cutoff {
        let mut cur = vec![0u32; dim];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos == cur.len() {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        fill(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

/// Largest singular value of the operator compressed to normalized Fock
/// monomials of total degree at most `cutoff` (tensored with the fiber).
///
/// The Gram matrix of the images is assembled by exact quadrature and its
/// top eigenvalue found by power iteration from a seeded start vector.
/// The primed numerator must be antiholomorphic, so that the operator
/// vanishes off the holomorphic Fock space.
pub fn norm_estimate(op: &dyn KernelOperator, cutoff: u32, cfg: &NormConfig) -> Result<NormEstimate> {
    if !op.primed_antiholomorphic() {
        return Err(Error::InvalidInput(
            "norm_estimate needs a kernel antiholomorphic in the primed variable".into(),
        ));
    }
    let s = op.weight_scale();
    let r = op.fiber_rank();
    let (nout, nin) = (op.out_dim(), op.in_dim());
    let betas = multi_indices(nin, cutoff);
    let states: Vec<FockState> = betas.iter().map(|b| FockState::new(b.clone(), s, r)).collect();
    let nb = states.len();
    let dim = nb * r;

    let budget = |d: Option<u32>| {
        d.ok_or_else(|| Error::QuadratureBudget("norm_estimate needs a polynomial kernel".into()))
    };
    let mut inner_deg = Vec::with_capacity(nin);
    for i in 1..=nin {
        inner_deg.push(budget(op.in_degree(i))? + cutoff);
    }
    let mut outer_deg = Vec::with_capacity(nout);
    for i in 1..=nout {
        let extra = if i <= nin && op.coupled(i) { cutoff } else { 0 };
        outer_deg.push(2 * (budget(op.out_degree(i))? + extra));
    }
    let inner = QuadGrid::for_degrees(&inner_deg, s).axes()?;
    let outer = QuadGrid::for_degrees(&outer_deg, s).axes()?;

    // Images T e_{beta, j}(Z) stacked as an (r x dim) matrix per outer node.
    let image = |z: &CPoint| -> Vec<C64> {
        let centers: Vec<(C64, C64)> = (1..=nin)
            .map(|i| {
                let c1 = if op.coupled(i) { z.value(crate::poly::VarKind::Hol, i) } else { C64::new(0.0, 0.0) };
                (c1 / 2.0, C64::new(0.0, -1.0) * c1 / 2.0)
            })
            .collect();
        tensor_integrate(&inner, r * dim, |x, acc| {
            let mut w = CPoint {
                hol: vec![C64::new(0.0, 0.0); nin],
                anti: vec![C64::new(0.0, 0.0); nin],
            };
            let mut gauss = 0.0;
            for i in 0..nin {
                let (u, v) = (x[2 * i], x[2 * i + 1]);
                gauss += u * u + v * v;
                let uu = centers[i].0 + u;
                let vv = centers[i].1 + v;
                w.hol[i] = uu + C64::new(0.0, 1.0) * vv;
                w.anti[i] = uu - C64::new(0.0, 1.0) * vv;
            }
            let mut k = vec![C64::new(0.0, 0.0); r * r];
            op.eval_c(z, &w, &mut k);
            let g = (s * gauss).exp();
            for (b, st) in states.iter().enumerate() {
                let e = st.value(&w) * g;
                for j in 0..r {
                    let col = b * r + j;
                    for i in 0..r {
                        acc[col * r + i] += k[j * r + i] * e;
                    }
                }
            }
        })
    };

    let gram = tensor_integrate(&outer, dim * dim, |x, acc| {
        let zv: Vec<C64> = (0..nout).map(|i| C64::new(x[2 * i], x[2 * i + 1])).collect();
        let z = CPoint::real(&zv);
        let t = image(&z);
        let g = (s * z.norm_sqr().re).exp();
        for c in 0..dim {
            for b in 0..dim {
                let mut sum = C64::new(0.0, 0.0);
                for i in 0..r {
                    sum += t[b * r + i].conj() * t[c * r + i];
                }
                acc[c * dim + b] += sum * g;
            }
        }
    });
    let gram = CMatrix::from_column_slice(dim, dim, &gram);
    let (lambda, iterations) = power_iteration(&gram, cfg)?;
    Ok(NormEstimate {
        norm: lambda.max(0.0).sqrt(),
        basis_size: dim,
        iterations,
    })
}

/// Top eigenvalue of a Hermitian positive semi-definite matrix.
pub fn power_iteration(g: &CMatrix, cfg: &NormConfig) -> Result<(f64, usize)> {
    let n = g.nrows();
    if n == 0 || g.norm() == 0.0 {
        return Ok((0.0, 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = nalgebra::DVector::<C64>::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    x /= C64::new(x.norm(), 0.0);
    let mut prev = f64::NAN;
    for it in 1..=cfg.max_iter {
        let y = g * &x;
        let lambda = x.dotc(&y).re;
        let ny = y.norm();
        if ny == 0.0 {
            return Ok((0.0, it));
        }
        x = y / C64::new(ny, 0.0);
        if (lambda - prev).abs() <= cfg.rel_tol * lambda.abs() {
            return Ok((lambda, it));
        }
        prev = lambda;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
    })
}
