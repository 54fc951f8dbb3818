//! The four model Gaussian kernels of the flat Bargmann-Fock model and
//! polynomial-times-kernel expressions.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{CMatrix, CPoint, Dims, Monomial, Poly, Slot, VarId, C64};

/// Which model kernel multiplies a numerator.
///
/// * `Bergman { n }`: `P_n(Z, Z')` on `C^n x C^n`.
/// * `OrthBergman { n, m }`: projector onto holomorphic sections orthogonal
///   to those vanishing on `C^m`.
/// * `Extension { n, m }`: `E_{n,m}(Z, Z'_Y)` with `Z' in C^m`.
/// * `Restriction { n, m }`: `Res_{n,m}(Z_Y, Z')` with `Z in C^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Bergman { n: usize },
    OrthBergman { n: usize, m: usize },
    Extension { n: usize, m: usize },
    Restriction { n: usize, m: usize },
}

/// Gaussian structure of a kernel in one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoordForm {
    /// `-pi/2 |z_i|^2` is present.
    pub unprimed: bool,
    /// `-pi/2 |z'_i|^2` is present.
    pub primed: bool,
    /// `+pi z_i zb'_i` is present.
    pub cross: bool,
}

impl KernelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Bergman { .. } => Ok(()),
            KernelKind::OrthBergman { n, m }
            | KernelKind::Extension { n, m }
            | KernelKind::Restriction { n, m } => {
                if m > n {
                    Err(Error::DimensionMismatch(format!("{self}: m exceeds n")))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            KernelKind::Bergman { n }
            | KernelKind::OrthBergman { n, .. }
            | KernelKind::Extension { n, .. }
            | KernelKind::Restriction { n, .. } => n,
        }
    }

    pub fn m(&self) -> usize {
        match *self {
            KernelKind::Bergman { n } => n,
            KernelKind::OrthBergman { m, .. }
            | KernelKind::Extension { m, .. }
            | KernelKind::Restriction { m, .. } => m,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Bergman { .. } => "Bergman",
            KernelKind::OrthBergman { .. } => "OrthBergman",
            KernelKind::Extension { .. } => "Extension",
            KernelKind::Restriction { .. } => "Restriction",
        }
    }

    pub fn from_name(name: &str, n: usize, m: usize) -> Result<Self> {
        let k = match name {
            "Bergman" => KernelKind::Bergman { n },
            "OrthBergman" => KernelKind::OrthBergman { n, m },
            "Extension" => KernelKind::Extension { n, m },
            "Restriction" => KernelKind::Restriction { n, m },
            other => return Err(Error::Format(format!("unknown kernel kind {other:?}"))),
        };
        k.validate()?;
        Ok(k)
    }

    /// Complex dimension of the unprimed variable.
    pub fn unprimed_dim(&self) -> usize {
        match *self {
            KernelKind::Restriction { m, .. } => m,
            _ => self.n(),
        }
    }

    /// Complex dimension of the primed variable.
    pub fn primed_dim(&self) -> usize {
        match *self {
            KernelKind::Extension { m, .. } => m,
            _ => self.n(),
        }
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Unprimed => self.unprimed_dim(),
            Slot::Primed => self.primed_dim(),
        }
    }

    /// Gaussian structure in coordinate `i` (1-based, `i <= n`).
    pub fn coord_form(&self, i: usize) -> CoordForm {
        match *self {
            KernelKind::Bergman { .. } => CoordForm {
                unprimed: true,
                primed: true,
                cross: true,
            },
            KernelKind::OrthBergman { m, .. } => CoordForm {
                unprimed: true,
                primed: true,
                cross: i <= m,
            },
            KernelKind::Extension { m, .. } => CoordForm {
                unprimed: true,
                primed: i <= m,
                cross: i <= m,
            },
            KernelKind::Restriction { m, .. } => CoordForm {
                unprimed: i <= m,
                primed: true,
                cross: i <= m,
            },
        }
    }

    /// Kind of the adjoint kernel.
    pub fn adjoint(&self) -> KernelKind {
        match *self {
            KernelKind::Extension { n, m } => KernelKind::Restriction { n, m },
            KernelKind::Restriction { n, m } => KernelKind::Extension { n, m },
            k => k,
        }
    }

    /// Exponent of the kernel as a scalar polynomial (times the identity of
    /// the given fiber rank).
    pub fn exponent_poly(&self, fiber_rank: usize) -> Result<Poly> {
        let dims = Dims::new(self.n(), self.m(), fiber_rank)?;
        let mut terms = Vec::new();
        let half = C64::new(-PI / 2.0, 0.0);
        let id = Poly::identity(dims);
        for i in 1..=self.n() {
            let f = self.coord_form(i);
            if f.unprimed {
                terms.push((
                    Monomial::from_exps([(VarId::z(i), 1), (VarId::zb(i), 1)]),
                    &id * half,
                ));
            }
            if f.primed {
                terms.push((
                    Monomial::from_exps([(VarId::zp(i), 1), (VarId::zbp(i), 1)]),
                    &id * half,
                ));
            }
            if f.cross {
                terms.push((
                    Monomial::from_exps([(VarId::z(i), 1), (VarId::zbp(i), 1)]),
                    &id * C64::new(PI, 0.0),
                ));
            }
        }
        Poly::from_terms(dims, terms)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelKind::Bergman { n } => write!(f, "Bergman({n})"),
            KernelKind::OrthBergman { n, m } => write!(f, "OrthBergman({n},{m})"),
            KernelKind::Extension { n, m } => write!(f, "Extension({n},{m})"),
            KernelKind::Restriction { n, m } => write!(f, "Restriction({n},{m})"),
        }
    }
}

/// Kernel value at complexified points. No dimension checks.
pub fn kernel_eval_c(kind: KernelKind, z: &CPoint, zp: &CPoint) -> C64 {
    let mut e = C64::new(0.0, 0.0);
    for i in 1..=kind.n() {
        let f = kind.coord_form(i);
        let (zi, zbi) = (
            z.value(crate::poly::VarKind::Hol, i),
            z.value(crate::poly::VarKind::Antihol, i),
        );
        let (zpi, zbpi) = (
            zp.value(crate::poly::VarKind::Hol, i),
            zp.value(crate::poly::VarKind::Antihol, i),
        );
        if f.unprimed {
            e -= zi * zbi;
        }
        if f.primed {
            e -= zpi * zbpi;
        }
        if f.cross {
            e += 2.0 * zi * zbpi;
        }
    }
    (e * (PI / 2.0)).exp()
}

fn check_point(kind: KernelKind, z: &[C64], zp: &[C64]) -> Result<()> {
    if z.len() != kind.unprimed_dim() || zp.len() != kind.primed_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{kind} expects points in C^{} x C^{}, got C^{} x C^{}",
            kind.unprimed_dim(),
            kind.primed_dim(),
            z.len(),
            zp.len()
        )));
    }
    Ok(())
}

/// Closed-form value of a model kernel at a real point pair.
pub fn kernel_eval(kind: KernelKind, z: &[C64], zp: &[C64]) -> Result<C64> {
    kind.validate()?;
    check_point(kind, z, zp)?;
    Ok(kernel_eval_c(kind, &CPoint::real(z), &CPoint::real(zp)))
}

/// A numerator polynomial times one of the model kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelExpr {
    numerator: Poly,
    kind: KernelKind,
}

impl KernelExpr {
    pub fn new(numerator: Poly, kind: KernelKind) -> Result<Self> {
        kind.validate()?;
        let d = numerator.dims();
        if d.n != kind.n() {
            return Err(Error::DimensionMismatch(format!(
                "numerator has n = {} but kernel is {kind}",
                d.n
            )));
        }
        for (mono, _) in numerator.terms() {
            for &(v, _) in mono.exps() {
                let bound = kind.slot_dim(v.slot);
                if v.index > bound {
                    return Err(Error::VariableDomain(format!(
                        "{v} is outside the {:?} domain C^{bound} of {kind}",
                        v.slot
                    )));
                }
            }
        }
        Ok(KernelExpr { numerator, kind })
    }

    /// `1 · K` with the natural dims for the kind.
    pub fn unit(kind: KernelKind, fiber_rank: usize) -> Result<Self> {
        let dims = Dims::new(kind.n(), kind.m(), fiber_rank)?;
        KernelExpr::new(Poly::one(dims), kind)
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn fiber_rank(&self) -> usize {
        self.numerator.fiber_rank()
    }

    pub fn eval(&self, z: &[C64], zp: &[C64]) -> Result<CMatrix> {
        check_point(self.kind, z, zp)?;
        Ok(self.eval_c(&CPoint::real(z), &CPoint::real(zp)))
    }

    pub fn eval_c(&self, z: &CPoint, zp: &CPoint) -> CMatrix {
        self.numerator.eval(z, zp) * kernel_eval_c(self.kind, z, zp)
    }

    /// Kernel of the adjoint operator.
    pub fn adjoint(&self) -> KernelExpr {
        KernelExpr {
            numerator: self.numerator.conjugate_swap(),
            kind: self.kind.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> KernelExpr {
        KernelExpr {
            numerator: self.numerator.scale(c),
            kind: self.kind,
        }
    }

    pub fn with_numerator(&self, numerator: Poly) -> Result<KernelExpr> {
        KernelExpr::new(numerator, self.kind)
    }
}

impl fmt::Display for KernelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) · {}", self.numerator, self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn bergman_at_origin_is_one() {
        let v = kernel_eval(KernelKind::Bergman { n: 1 }, &[c(0.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn bergman_off_origin() {
        let v = kernel_eval(KernelKind::Bergman { n: 1 }, &[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(v.re, (-PI / 2.0).exp(), max_relative = 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn extension_from_a_point() {
        let z = c(0.3, -0.7);
        let v = kernel_eval(KernelKind::Extension { n: 1, m: 0 }, &[z], &[]).unwrap();
        assert_relative_eq!(v.re, (-PI * z.norm_sqr() / 2.0).exp(), max_relative = 1e-15);
    }

    #[test]
    fn numerator_times_kernel() {
        let d = Dims::new(1, 1, 1).unwrap();
        let e = KernelExpr::new(Poly::var(d, VarId::z(1)).unwrap(), KernelKind::Bergman { n: 1 }).unwrap();
        let v = e.eval(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(v[(0, 0)].re, (-PI / 2.0).exp(), max_relative = 1e-15);
        let e = KernelExpr::new(Poly::var(d, VarId::zbp(1)).unwrap(), KernelKind::Extension { n: 1, m: 1 }).unwrap();
        let v = e.eval(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(v[(0, 0)].re, (-PI / 2.0).exp(), max_relative = 1e-15);
    }

    #[test]
    fn dimension_errors() {
        assert!(kernel_eval(KernelKind::Extension { n: 2, m: 1 }, &[c(0.0, 0.0)], &[c(0.0, 0.0)]).is_err());
        let d = Dims::new(2, 1, 1).unwrap();
        let bad = KernelExpr::new(Poly::var(d, VarId::zp(2)).unwrap(), KernelKind::Extension { n: 2, m: 1 });
        assert!(matches!(bad, Err(Error::VariableDomain(_))));
        let bad = KernelExpr::new(Poly::var(d, VarId::z(2)).unwrap(), KernelKind::Restriction { n: 2, m: 1 });
        assert!(matches!(bad, Err(Error::VariableDomain(_))));
    }

    #[test]
    fn exponent_poly_matches_closed_form() {
        for kind in [
            KernelKind::Bergman { n: 2 },
            KernelKind::OrthBergman { n: 2, m: 1 },
            KernelKind::Extension { n: 2, m: 1 },
            KernelKind::Restriction { n: 2, m: 1 },
        ] {
            let ex = kernel_eval_c(kind, &CPoint::real(&[c(0.2, 0.1), c(-0.4, 0.3)]), &CPoint::real(&[c(0.5, -0.2), c(0.1, 0.6)]));
            let z = CPoint::real(&[c(0.2, 0.1), c(-0.4, 0.3)]);
            let zp = CPoint::real(&[c(0.5, -0.2), c(0.1, 0.6)]);
            let e = kind.exponent_poly(1).unwrap().eval(&z, &zp)[(0, 0)].exp();
            assert_relative_eq!(ex.re, e.re, max_relative = 1e-14);
            assert_relative_eq!(ex.im, e.im, max_relative = 1e-14, epsilon = 1e-15);
        }
    }
}
