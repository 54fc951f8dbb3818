//! Exact scalar mode: coefficients are finite sums `sum_k q_k pi^-k` with
//! rational `q_k`. Used for golden values of the base integrals.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

use crate::composition::base_terms;
use crate::error::{Error, Result};
use crate::poly::{Dims, Monomial, Poly, Slot, VarId, VarKind, C64};

pub type Q = Ratio<i128>;

/// `sum_k q_k / pi^k`, keyed by `k`, no zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiSeries(BTreeMap<u32, Q>);

impl PiSeries {
    pub fn zero() -> Self {
        PiSeries(BTreeMap::new())
    }

    pub fn term(q: Q, pi_pow: u32) -> Self {
        let mut s = PiSeries::zero();
        s.add_term(q, pi_pow);
        s
    }

    pub fn rational(q: Q) -> Self {
        Self::term(q, 0)
    }

    fn add_term(&mut self, q: Q, k: u32) {
        let e = self.0.entry(k).or_insert_with(|| Q::from_integer(0));
        *e += q;
        if *e.numer() == 0 {
            self.0.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &PiSeries) -> PiSeries {
        let mut out = self.clone();
        for (&k, &q) in &other.0 {
            out.add_term(q, k);
        }
        out
    }

    pub fn mul(&self, other: &PiSeries) -> PiSeries {
        let mut out = PiSeries::zero();
        for (&ka, &qa) in &self.0 {
            for (&kb, &qb) in &other.0 {
                out.add_term(qa * qb, ka + kb);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Q)> + '_ {
        self.0.iter().map(|(&k, &q)| (k, q))
    }

    pub fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|(&k, q)| {
                (*q.numer() as f64 / *q.denom() as f64) / std::f64::consts::PI.powi(k as i32)
            })
            .sum()
    }
}

impl fmt::Display for PiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, q)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{q}")?,
                1 => write!(f, "{q}/pi")?,
                _ => write!(f, "{q}/pi^{k}")?,
            }
        }
        Ok(())
    }
}

/// Scalar polynomial with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactPoly(BTreeMap<Monomial, PiSeries>);

impl ExactPoly {
    pub fn zero() -> Self {
        ExactPoly(BTreeMap::new())
    }

    pub fn monomial(mono: Monomial, c: PiSeries) -> Self {
        let mut p = ExactPoly::zero();
        p.add_term(mono, c);
        p
    }

    fn add_term(&mut self, mono: Monomial, c: PiSeries) {
        let e = self.0.entry(mono.clone()).or_default();
        *e = e.add(&c);
        if e.is_zero() {
            self.0.remove(&mono);
        }
    }

    pub fn add(&self, other: &ExactPoly) -> ExactPoly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &PiSeries)> {
        self.0.iter()
    }

    /// Floating image with scalar-identity coefficients.
    pub fn to_poly(&self, dims: Dims) -> Result<Poly> {
        Poly::from_terms(
            dims,
            self.0
                .iter()
                .map(|(m, c)| (m.clone(), Poly::identity(dims) * C64::new(c.to_f64(), 0.0))),
        )
    }
}

/// Exact `K_{n,m}[1, B]` for scalar `B`; same reduction as the floating
/// engine, carried out over `Q[1/pi]`.
pub fn k_base_exact(b: &ExactPoly, n: usize, m: usize) -> Result<ExactPoly> {
    if m > n {
        return Err(Error::DimensionMismatch(format!("m = {m} exceeds n = {n}")));
    }
    let mut out = ExactPoly::zero();
    for (mono, c) in b.terms() {
        let (mid, back) = mono.split(|v| v.slot == Slot::Unprimed);
        let mut per: BTreeMap<usize, (u32, u32)> = BTreeMap::new();
        for &(v, e) in mid.exps() {
            if v.index > n {
                return Err(Error::IndexOutOfRange { index: v.index, bound: n });
            }
            let s = per.entry(v.index).or_insert((0, 0));
            match v.kind {
                VarKind::Hol => s.0 += e,
                VarKind::Antihol => s.1 += e,
            }
        }
        let mut acc = vec![(back.clone(), c.clone())];
        for (&i, &(a, bb)) in &per {
            let coupled = i <= m;
            let terms = base_terms(a, bb, coupled, coupled);
            let mut next = Vec::new();
            for (mm, cc) in &acc {
                for t in &terms {
                    let extra = Monomial::from_exps([(VarId::z(i), t.z_exp), (VarId::zbp(i), t.zbp_exp)]);
                    let w = PiSeries::term(Q::from_integer(t.numer as i128), t.pi_pow);
                    next.push((mm.mul(&extra), cc.mul(&w)));
                }
            }
            acc = next;
        }
        for (mm, cc) in acc {
            out.add_term(mm, cc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupled_golden() {
        let b = ExactPoly::monomial(
            Monomial::from_exps([(VarId::z(1), 1), (VarId::zb(1), 1)]),
            PiSeries::rational(Q::from_integer(1)),
        );
        let r = k_base_exact(&b, 1, 1).unwrap();
        let expect = ExactPoly::monomial(
            Monomial::from_exps([(VarId::z(1), 1), (VarId::zbp(1), 1)]),
            PiSeries::rational(Q::from_integer(1)),
        )
        .add(&ExactPoly::monomial(Monomial::one(), PiSeries::term(Q::from_integer(1), 1)));
        assert_eq!(r, expect);
    }

    #[test]
    fn pi_series_arithmetic() {
        let a = PiSeries::term(Q::new(1, 2), 1);
        let b = PiSeries::term(Q::new(-1, 2), 1);
        assert!(a.add(&b).is_zero());
        assert_eq!(a.mul(&a), PiSeries::term(Q::new(1, 4), 2));
        assert_eq!(format!("{}", a.mul(&a)), "1/4/pi^2");
    }
}
