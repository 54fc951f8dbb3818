//! Closed-form composition of polynomial-times-kernel expressions.
//!
//! Every supported pair reduces to one per-coordinate integral over the
//! middle variable `w`:
//!
//! ```text
//! int exp(-pi|w|^2) w^a wb^b exp(pi c1 z wb + pi c2 w zb') dw
//! ```
//!
//! where `c1` (`c2`) records whether the left (right) kernel couples the
//! coordinate. The left numerator's unprimed part is a front factor, its
//! primed part joins the right numerator's unprimed part in the middle, and
//! the right numerator's primed part is a back factor.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelExpr, KernelKind};
use crate::poly::{CMatrix, Dims, Monomial, Poly, Slot, VarId, VarKind, C64};

/// One term of the per-coordinate middle integral:
/// `numer / pi^pi_pow * z^z_exp * zb'^zbp_exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseTerm {
    pub z_exp: u32,
    pub zbp_exp: u32,
    pub numer: u128,
    pub pi_pow: u32,
}

fn falling(a: u32, k: u32) -> u128 {
    (0..k).map(|i| (a - i) as u128).product()
}

fn binomial(b: u32, k: u32) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (b - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Middle integral of `w^a wb^b` for the coupling pattern `(c1, c2)`.
pub fn base_terms(a: u32, b: u32, c1: bool, c2: bool) -> Vec<BaseTerm> {
    match (c1, c2) {
        (true, true) => (0..=a.min(b))
            .map(|k| BaseTerm {
                z_exp: a - k,
                zbp_exp: b - k,
                numer: falling(a, k) * binomial(b, k),
                pi_pow: k,
            })
            .collect(),
        (true, false) if a >= b => vec![BaseTerm {
            z_exp: a - b,
            zbp_exp: 0,
            numer: falling(a, b),
            pi_pow: b,
        }],
        (false, true) if b >= a => vec![BaseTerm {
            z_exp: 0,
            zbp_exp: b - a,
            numer: falling(b, a),
            pi_pow: a,
        }],
        (false, false) if a == b => vec![BaseTerm {
            z_exp: 0,
            zbp_exp: 0,
            numer: falling(a, a),
            pi_pow: a,
        }],
        _ => Vec::new(),
    }
}

/// Reduces a middle monomial to scalar-weighted outer monomials.
fn reduce_middle(
    mid: &BTreeMap<usize, (u32, u32)>,
    c1: &dyn Fn(usize) -> bool,
    c2: &dyn Fn(usize) -> bool,
) -> Vec<(Monomial, f64)> {
    let mut acc: Vec<(Vec<(VarId, u32)>, f64)> = vec![(Vec::new(), 1.0)];
    for (&i, &(a, b)) in mid {
        let terms = base_terms(a, b, c1(i), c2(i));
        if terms.is_empty() {
            return Vec::new();
        }
        let mut next = Vec::with_capacity(acc.len() * terms.len());
        for (exps, w) in &acc {
            for t in &terms {
                let mut e = exps.clone();
                if t.z_exp > 0 {
                    e.push((VarId::z(i), t.z_exp));
                }
                if t.zbp_exp > 0 {
                    e.push((VarId::zbp(i), t.zbp_exp));
                }
                let c = t.numer as f64 / std::f64::consts::PI.powi(t.pi_pow as i32);
                next.push((e, w * c));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(e, w)| (Monomial::from_exps(e), w))
        .collect()
}

/// Core bracket: `int A1(Z, W) K1 A2(W, Z') K2 dW` divided by the
/// Gaussian of the resulting kernel.
fn bracket(
    left: &Poly,
    right: &Poly,
    c1: &dyn Fn(usize) -> bool,
    c2: &dyn Fn(usize) -> bool,
    out: Dims,
) -> Result<Poly> {
    if left.fiber_rank() != right.fiber_rank() {
        return Err(Error::FiberRankMismatch {
            left: left.fiber_rank(),
            right: right.fiber_rank(),
        });
    }
    let cap = left.degree_cap().min(right.degree_cap());
    let mut acc: BTreeMap<Monomial, CMatrix> = BTreeMap::new();
    let rs: Vec<_> = right
        .terms()
        .map(|(m, c)| {
            let (mid, back) = m.split(|v| v.slot == Slot::Unprimed);
            (mid, back, c)
        })
        .collect();
    for (lm, lc) in left.terms() {
        let (front, lmid) = lm.split(|v| v.slot == Slot::Unprimed);
        for (rmid, back, rc) in &rs {
            let mut mid: BTreeMap<usize, (u32, u32)> = BTreeMap::new();
            for &(v, e) in lmid.exps().iter().chain(rmid.exps()) {
                let slot = mid.entry(v.index).or_insert((0, 0));
                match v.kind {
                    VarKind::Hol => slot.0 += e,
                    VarKind::Antihol => slot.1 += e,
                }
            }
            let reduced = reduce_middle(&mid, c1, c2);
            if reduced.is_empty() {
                continue;
            }
            let coef: CMatrix = lc * *rc;
            let outer = front.mul(back);
            for (mono, w) in reduced {
                let key = outer.mul(&mono);
                let add = &coef * C64::new(w, 0.0);
                match acc.get_mut(&key) {
                    Some(c) => *c += add,
                    None => {
                        acc.insert(key, add);
                    }
                }
            }
        }
    }
    Poly::assemble(out, cap, acc)
}

fn check_numerator(p: &Poly, kind: KernelKind, what: &str) -> Result<()> {
    KernelExpr::new(p.clone(), kind)
        .map(|_| ())
        .map_err(|e| match e {
            Error::VariableDomain(s) => Error::VariableDomain(format!("{what}: {s}")),
            other => other,
        })
}

/// `K_{n,m}[1, B]`: `B`'s unprimed slot is the integration variable, its
/// primed slot passes through as a back factor.
pub fn k_base(b: &Poly, n: usize, m: usize) -> Result<Poly> {
    let out = Dims::new(n, m, b.fiber_rank())?;
    check_numerator(b, KernelKind::OrthBergman { n, m }, "k_base")?;
    let coupled = move |i: usize| i <= m;
    bracket(&Poly::one(out), &b.with_dims(out)?, &coupled, &coupled, out)
}

/// `(A1 P^perp_{n,m}) o (A2 P^perp_{n,m}) = K_{n,m}[A1, A2] P^perp_{n,m}`.
pub fn k_nm(a1: &Poly, a2: &Poly, n: usize, m: usize) -> Result<Poly> {
    let kind = KernelKind::OrthBergman { n, m };
    check_numerator(a1, kind, "left")?;
    check_numerator(a2, kind, "right")?;
    let out = Dims::new(n, m, a1.fiber_rank())?;
    let coupled = move |i: usize| i <= m;
    bracket(a1, a2, &coupled, &coupled, out)
}

/// `(A1 P_n) o (A2 P^perp_{n,m}) = K'_{n,m}[A1, A2] P^perp_{n,m}`.
pub fn k_prime_nm(a1: &Poly, a2: &Poly, n: usize, m: usize) -> Result<Poly> {
    check_numerator(a1, KernelKind::Bergman { n }, "left")?;
    check_numerator(a2, KernelKind::OrthBergman { n, m }, "right")?;
    let out = Dims::new(n, m, a1.fiber_rank())?;
    bracket(a1, a2, &|_| true, &|i| i <= m, out)
}

/// `(A E_{n,m}) o (D P_m) = K^{EP}[A, D] E_{n,m}`.
pub fn k_ep(a: &Poly, d: &Poly, n: usize, m: usize) -> Result<Poly> {
    check_numerator(a, KernelKind::Extension { n, m }, "left")?;
    check_numerator(d, KernelKind::Bergman { n: m }, "right")?;
    let out = Dims::new(n, m, a.fiber_rank())?;
    bracket(a, d, &|_| true, &|_| true, out)
}

/// `(A4 E_{n,l}) o (A5 E_{l,m}) = K^E[A4, A5] E_{n,m}`.
pub fn k_e(a4: &Poly, a5: &Poly, n: usize, l: usize, m: usize) -> Result<Poly> {
    if !(m <= l && l <= n) {
        return Err(Error::DimensionMismatch(format!(
            "extension chain needs m <= l <= n, got n = {n}, l = {l}, m = {m}"
        )));
    }
    check_numerator(a4, KernelKind::Extension { n, m: l }, "left")?;
    check_numerator(a5, KernelKind::Extension { n: l, m }, "right")?;
    let out = Dims::new(n, m, a4.fiber_rank())?;
    bracket(a4, a5, &|_| true, &|i| i <= m, out)
}

/// Identifier of the composition identity applied to a kernel pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    BergmanBergman,
    OrthOrth,
    BergmanOrth,
    BergmanExtension,
    OrthExtension,
    RestrictionExtension,
    ExtensionBergman,
    ExtensionExtension,
    RestrictionBergman,
    BergmanRestriction,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::BergmanBergman => "bergman_bergman",
            Rule::OrthOrth => "orth_orth",
            Rule::BergmanOrth => "bergman_orth",
            Rule::BergmanExtension => "bergman_extension",
            Rule::OrthExtension => "orth_extension",
            Rule::RestrictionExtension => "restriction_extension",
            Rule::ExtensionBergman => "extension_bergman",
            Rule::ExtensionExtension => "extension_extension",
            Rule::RestrictionBergman => "restriction_bergman",
            Rule::BergmanRestriction => "bergman_restriction",
        }
    }

    pub const ALL: [Rule; 10] = [
        Rule::BergmanBergman,
        Rule::OrthOrth,
        Rule::BergmanOrth,
        Rule::BergmanExtension,
        Rule::OrthExtension,
        Rule::RestrictionExtension,
        Rule::ExtensionBergman,
        Rule::ExtensionExtension,
        Rule::RestrictionBergman,
        Rule::BergmanRestriction,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComposePlan {
    pub left_kind: KernelKind,
    pub right_kind: KernelKind,
    pub result_kind: KernelKind,
    pub rule: Rule,
}

impl ComposePlan {
    /// Whether the left kernel couples middle coordinate `i`.
    fn c1(&self, i: usize) -> bool {
        self.left_kind.coord_form(i).cross
    }

    fn c2(&self, i: usize) -> bool {
        self.right_kind.coord_form(i).cross
    }
}

/// Looks up the composition identity for a kernel pair.
pub fn plan(left: KernelKind, right: KernelKind) -> Result<ComposePlan> {
    use KernelKind::*;
    let found = match (left, right) {
        (Bergman { n }, Bergman { n: n2 }) if n == n2 => Some((Bergman { n }, Rule::BergmanBergman)),
        (OrthBergman { n, m }, OrthBergman { n: n2, m: m2 }) if (n, m) == (n2, m2) => {
            Some((OrthBergman { n, m }, Rule::OrthOrth))
        }
        (Bergman { n }, OrthBergman { n: n2, m }) if n == n2 => {
            Some((OrthBergman { n, m }, Rule::BergmanOrth))
        }
        (Bergman { n }, Extension { n: n2, m }) if n == n2 => {
            Some((Extension { n, m }, Rule::BergmanExtension))
        }
        (OrthBergman { n, m }, Extension { n: n2, m: m2 }) if (n, m) == (n2, m2) => {
            Some((Extension { n, m }, Rule::OrthExtension))
        }
        (Restriction { n, m }, Extension { n: n2, m: m2 }) if (n, m) == (n2, m2) => {
            Some((Bergman { n: m }, Rule::RestrictionExtension))
        }
        (Extension { n, m }, Bergman { n: m2 }) if m == m2 => {
            Some((Extension { n, m }, Rule::ExtensionBergman))
        }
        (Extension { n, m: l }, Extension { n: l2, m }) if l == l2 => {
            Some((Extension { n, m }, Rule::ExtensionExtension))
        }
        (Restriction { n, m }, Bergman { n: n2 }) if n == n2 => {
            Some((Restriction { n, m }, Rule::RestrictionBergman))
        }
        (Bergman { n: m }, Restriction { n, m: m2 }) if m == m2 => {
            Some((Restriction { n, m }, Rule::BergmanRestriction))
        }
        _ => None,
    };
    match found {
        Some((result_kind, rule)) => Ok(ComposePlan {
            left_kind: left,
            right_kind: right,
            result_kind,
            rule,
        }),
        None => Err(Error::UnsupportedPair {
            left: left.to_string(),
            right: right.to_string(),
        }),
    }
}

/// Composes two kernel expressions, returning the result with the plan
/// that produced it.
pub fn compose_with_plan(e1: &KernelExpr, e2: &KernelExpr) -> Result<(KernelExpr, ComposePlan)> {
    let plan = plan(e1.kind(), e2.kind())?;
    let r = plan.result_kind;
    let out = Dims::new(r.n(), r.m(), e1.fiber_rank())?;
    let num = bracket(
        e1.numerator(),
        e2.numerator(),
        &|i| plan.c1(i),
        &|i| plan.c2(i),
        out,
    )?;
    Ok((KernelExpr::new(num, r)?, plan))
}

pub fn compose(e1: &KernelExpr, e2: &KernelExpr) -> Result<KernelExpr> {
    compose_with_plan(e1, e2).map(|(e, _)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn mono(d: Dims, exps: &[(VarId, u32)]) -> Poly {
        Poly::monomial(d, Monomial::from_exps(exps.iter().copied()), c(1.0)).unwrap()
    }

    #[test]
    fn base_case_coupled() {
        let d = Dims::new(1, 1, 1).unwrap();
        let r = k_base(&mono(d, &[(VarId::zb(1), 1)]), 1, 1).unwrap();
        assert!(r.max_coef_diff(&mono(d, &[(VarId::zbp(1), 1)])) < 1e-15);
        let r = k_base(&mono(d, &[(VarId::z(1), 1), (VarId::zb(1), 1)]), 1, 1).unwrap();
        let expect = mono(d, &[(VarId::z(1), 1), (VarId::zbp(1), 1)])
            .add(&Poly::scalar(d, c(1.0 / PI)))
            .unwrap();
        assert!(r.max_coef_diff(&expect) < 1e-15);
    }

    #[test]
    fn base_case_decoupled() {
        let d = Dims::new(1, 0, 1).unwrap();
        let r = k_base(&mono(d, &[(VarId::z(1), 1), (VarId::zb(1), 1)]), 1, 0).unwrap();
        assert!(r.max_coef_diff(&Poly::scalar(d, c(1.0 / PI))) < 1e-15);
    }

    #[test]
    fn bracket_examples() {
        let d = Dims::new(1, 1, 1).unwrap();
        let one = Poly::one(d);
        assert!(k_nm(&one, &one, 1, 1).unwrap().max_coef_diff(&one) < 1e-15);
        let r = k_nm(&mono(d, &[(VarId::zp(1), 1)]), &mono(d, &[(VarId::zb(1), 1)]), 1, 1).unwrap();
        let expect = mono(d, &[(VarId::z(1), 1), (VarId::zbp(1), 1)])
            .add(&Poly::scalar(d, c(1.0 / PI)))
            .unwrap();
        assert!(r.max_coef_diff(&expect) < 1e-15);

        let d21 = Dims::new(2, 1, 1).unwrap();
        let r = k_nm(&mono(d21, &[(VarId::zp(2), 1), (VarId::zbp(2), 1)]), &Poly::one(d21), 2, 1).unwrap();
        assert!(r.max_coef_diff(&Poly::scalar(d21, c(1.0 / PI))) < 1e-15);

        let d10 = Dims::new(1, 0, 1).unwrap();
        let r = k_prime_nm(&mono(d10, &[(VarId::zbp(1), 1)]), &Poly::one(d10), 1, 0).unwrap();
        assert!(r.is_zero());
        let r = k_prime_nm(&mono(d, &[(VarId::z(1), 1)]), &mono(d, &[(VarId::zbp(1), 1)]), 1, 1).unwrap();
        assert!(r.max_coef_diff(&mono(d, &[(VarId::z(1), 1), (VarId::zbp(1), 1)])) < 1e-15);
    }

    #[test]
    fn extension_brackets() {
        let d21 = Dims::new(2, 1, 1).unwrap();
        let d11 = Dims::new(1, 1, 1).unwrap();
        let z2 = mono(d21, &[(VarId::z(2), 1)]);
        assert!(k_ep(&z2, &Poly::one(d11), 2, 1).unwrap().max_coef_diff(&z2) < 1e-15);
        let r = k_ep(&Poly::one(d21), &mono(d11, &[(VarId::z(1), 1), (VarId::zb(1), 1)]), 2, 1).unwrap();
        let expect = mono(d21, &[(VarId::z(1), 1), (VarId::zbp(1), 1)])
            .add(&Poly::scalar(d21, c(1.0 / PI)))
            .unwrap();
        assert!(r.max_coef_diff(&expect) < 1e-15);

        let d3 = Dims::new(3, 2, 1).unwrap();
        let d2 = Dims::new(2, 1, 1).unwrap();
        let r = k_e(&mono(d3, &[(VarId::z(3), 1)]), &Poly::one(d2), 3, 2, 1).unwrap();
        assert!(r.max_coef_diff(&mono(Dims::new(3, 1, 1).unwrap(), &[(VarId::z(3), 1)])) < 1e-15);
        let d22 = Dims::new(2, 2, 1).unwrap();
        let r = k_e(&Poly::one(d22), &z2, 2, 2, 1).unwrap();
        assert!(r.max_coef_diff(&z2) < 1e-15);
    }

    #[test]
    fn restriction_extension_is_bergman() {
        let r = KernelExpr::unit(KernelKind::Restriction { n: 3, m: 1 }, 1).unwrap();
        let e = KernelExpr::unit(KernelKind::Extension { n: 3, m: 1 }, 1).unwrap();
        let (out, plan) = compose_with_plan(&r, &e).unwrap();
        assert_eq!(out.kind(), KernelKind::Bergman { n: 1 });
        assert_eq!(plan.rule, Rule::RestrictionExtension);
        assert!(out.numerator().max_coef_diff(&Poly::one(Dims::new(1, 1, 1).unwrap())) < 1e-15);
    }

    #[test]
    fn middle_antiholomorphic_moves() {
        let d = Dims::new(1, 1, 1).unwrap();
        let e1 = KernelExpr::new(mono(d, &[(VarId::zbp(1), 1)]), KernelKind::Bergman { n: 1 }).unwrap();
        let e2 = KernelExpr::unit(KernelKind::Bergman { n: 1 }, 1).unwrap();
        let out = compose(&e1, &e2).unwrap();
        assert!(out.numerator().max_coef_diff(&mono(d, &[(VarId::zbp(1), 1)])) < 1e-15);
    }

    #[test]
    fn unsupported_pair_is_named() {
        let a = KernelExpr::unit(KernelKind::Extension { n: 2, m: 1 }, 1).unwrap();
        let b = KernelExpr::unit(KernelKind::OrthBergman { n: 2, m: 1 }, 1).unwrap();
        match compose(&a, &b) {
            Err(Error::UnsupportedPair { left, right }) => {
                assert_eq!(left, "Extension(2,1)");
                assert_eq!(right, "OrthBergman(2,1)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fiber_coefficients_act_left_to_right() {
        let d = Dims::new(1, 1, 2).unwrap();
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        let e1 = KernelExpr::new(Poly::constant(d, a.clone()).unwrap(), KernelKind::Bergman { n: 1 }).unwrap();
        let e2 = KernelExpr::new(Poly::constant(d, b.clone()).unwrap(), KernelKind::Bergman { n: 1 }).unwrap();
        let out = compose(&e1, &e2).unwrap();
        assert_eq!(out.numerator().coef(&Monomial::one()).unwrap(), &(a * b));
    }
}
