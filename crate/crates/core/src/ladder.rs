//! Creation and annihilation operators of the model Laplacian, applied to
//! polynomial-times-Gaussian kernels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::KernelExpr;
use crate::poly::{Poly, Slot, VarId, VarKind, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    /// `b_j = -2 d/dz_j + pi zb_j`
    Creation,
    /// `b_j^+ = 2 d/dzb_j + pi z_j`
    Annihilation,
}

fn exponent_for(e: &KernelExpr) -> Result<Poly> {
    let num = e.numerator();
    e.kind()
        .exponent_poly(num.fiber_rank())?
        .with_dims(num.dims())?
        .with_degree_cap(num.degree_cap().max(2))
}

/// Applies `b_j` or `b_j^+` in the given variable slot. The derivative hits
/// both the numerator and the Gaussian, so the kernel kind is unchanged.
pub fn apply_ladder(e: &KernelExpr, j: usize, which: Ladder, slot: Slot) -> Result<KernelExpr> {
    let bound = e.kind().slot_dim(slot);
    if j == 0 || j > bound {
        return Err(Error::IndexOutOfRange { index: j, bound });
    }
    let num = e.numerator();
    let dims = num.dims();
    let (dvar, mvar, sign) = match which {
        Ladder::Creation => (VarKind::Hol, VarKind::Antihol, -2.0),
        Ladder::Annihilation => (VarKind::Antihol, VarKind::Hol, 2.0),
    };
    let dv = VarId::new(slot, dvar, j);
    let mv = VarId::new(slot, mvar, j);
    let exponent = exponent_for(e)?;
    let grad = exponent.derivative(dv);
    let cap = num.degree_cap();

    let mult = Poly::var(dims, mv)?
        .with_degree_cap(cap)?
        .scale(C64::new(PI, 0.0))
        .add(&grad.scale(C64::new(sign, 0.0)))?;
    let out = num
        .derivative(dv)
        .scale(C64::new(sign, 0.0))
        .add(&mult.mul(num)?)?;
    e.with_numerator(out)
}

/// `L = sum_j b_j b_j^+` over every coordinate of the slot.
pub fn apply_model_laplacian(e: &KernelExpr, slot: Slot) -> Result<KernelExpr> {
    let mut acc = e.with_numerator(Poly::zero(e.numerator().dims()).with_degree_cap(e.numerator().degree_cap())?)?;
    for j in 1..=e.kind().slot_dim(slot) {
        let t = apply_ladder(e, j, Ladder::Annihilation, slot)?;
        let t = apply_ladder(&t, j, Ladder::Creation, slot)?;
        acc = acc.with_numerator(acc.numerator().add(t.numerator())?)?;
    }
    Ok(acc)
}
