//! Cyclic Jacobi eigenvalues for small Hermitian matrices.

use crate::error::{Error, Result};
use crate::poly::{CMatrix, C64};

const MAX_SWEEPS: usize = 100;

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(h: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

fn off_norm(a: &CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues in ascending order. Inputs must be Hermitian within `1e-10`
/// (relative to `max(1, |H|_F)`); they are symmetrized before the sweeps,
/// which stop once the off-diagonal Frobenius norm is at most `1e-12`
/// (same scaling).
pub fn hermitian_eigs(h: &CMatrix) -> Result<Vec<f64>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", n, h.ncols())));
    }
    let scale = h.norm().max(1.0);
    let defect = hermitian_defect(h);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut sweeps = 0;
    while off_norm(&a) > 1e-12 * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on rows/cols p, q.
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = phase.conj() * -s;
                let uqq = phase.conj() * c;
                // A <- A U
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * upp + akq * uqp;
                    a[(k, q)] = akp * upq + akq * uqq;
                }
                // A <- U^* A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        assert_eq!(hermitian_eigs(&h).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let ev = hermitian_eigs(&h).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(hermitian_eigs(&h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn dense_complex() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.5),
                c(1.0, -1.0), c(-1.0, 0.0), c(0.3, 0.2),
                c(0.0, 0.5), c(0.3, -0.2), c(0.5, 0.0),
            ],
        );
        let ev = hermitian_eigs(&h).unwrap();
        let tr: f64 = ev.iter().sum();
        assert!((tr - 1.5).abs() < 1e-12);
        let fro: f64 = ev.iter().map(|x| x * x).sum();
        assert!((fro - h.norm_squared()).abs() < 1e-12);
        for &l in &ev {
            let m = &h - CMatrix::identity(3, 3) * c(l, 0.0);
            assert!(m.determinant().norm() < 1e-10);
        }
    }
}
