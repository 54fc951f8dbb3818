//! Seeded random instances for property checks, the self-test and benches.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::composition::Rule;
use crate::error::Result;
use crate::fock_oracle::PointPair;
use crate::kernel::{KernelExpr, KernelKind};
use crate::model_operators::Symbol;
use crate::poly::{CMatrix, Dims, Monomial, Poly, Slot, VarId, VarKind, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix<R: Rng>(rng: &mut R, r: usize) -> CMatrix {
    CMatrix::from_fn(r, r, |_, _| complex(rng))
}

/// Random monomial of total degree at most `max_degree` in the variables
/// a kernel of this kind admits.
pub fn monomial<R: Rng>(rng: &mut R, kind: KernelKind, max_degree: u32) -> Monomial {
    let mut vars = Vec::new();
    for slot in [Slot::Unprimed, Slot::Primed] {
        for i in 1..=kind.slot_dim(slot) {
            for k in [VarKind::Hol, VarKind::Antihol] {
                vars.push(VarId::new(slot, k, i));
            }
        }
    }
    if vars.is_empty() {
        return Monomial::one();
    }
    let degree = rng.random_range(0..=max_degree);
    let mut exps = Vec::new();
    for _ in 0..degree {
        exps.push((vars[rng.random_range(0..vars.len())], 1));
    }
    Monomial::from_exps(exps)
}

/// Random numerator with 1..=`max_terms` terms.
pub fn numerator<R: Rng>(rng: &mut R, kind: KernelKind, r: usize, max_degree: u32, max_terms: usize) -> Result<Poly> {
    let dims = Dims::new(kind.n(), kind.m(), r)?;
    let count = rng.random_range(1..=max_terms);
    let terms: Vec<(Monomial, CMatrix)> = (0..count)
        .map(|_| (monomial(rng, kind, max_degree), matrix(rng, r)))
        .collect();
    let mut p = Poly::zero(dims);
    for (m, c) in terms {
        p = p.add(&Poly::from_terms(dims, [(m, c)])?)?;
    }
    Ok(p)
}

pub fn kernel<R: Rng>(rng: &mut R, kind: KernelKind, r: usize, max_degree: u32, max_terms: usize) -> Result<KernelExpr> {
    KernelExpr::new(numerator(rng, kind, r, max_degree, max_terms)?, kind)
}

/// Random kernel pair handled by `rule`, all dimensions at most `max_n`.
pub fn kind_pair<R: Rng>(rng: &mut R, rule: Rule, max_n: usize) -> (KernelKind, KernelKind) {
    use KernelKind::*;
    let n = rng.random_range(0..=max_n);
    let m = rng.random_range(0..=n);
    let l = rng.random_range(m..=n);
    match rule {
        Rule::BergmanBergman => (Bergman { n }, Bergman { n }),
        Rule::OrthOrth => (OrthBergman { n, m }, OrthBergman { n, m }),
        Rule::BergmanOrth => (Bergman { n }, OrthBergman { n, m }),
        Rule::BergmanExtension => (Bergman { n }, Extension { n, m }),
        Rule::OrthExtension => (OrthBergman { n, m }, Extension { n, m }),
        Rule::RestrictionExtension => (Restriction { n, m }, Extension { n, m }),
        Rule::ExtensionBergman => (Extension { n, m }, Bergman { n: m }),
        Rule::ExtensionExtension => (Extension { n, m: l }, Extension { n: l, m }),
        Rule::RestrictionBergman => (Restriction { n, m }, Bergman { n }),
        Rule::BergmanRestriction => (Bergman { n: m }, Restriction { n, m }),
    }
}

/// A composable pair: rule chosen uniformly, fiber rank in `1..=max_rank`.
pub fn composable_pair<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_degree: u32,
    max_rank: usize,
) -> Result<(Rule, KernelExpr, KernelExpr)> {
    let rule = Rule::ALL[rng.random_range(0..Rule::ALL.len())];
    let (k1, k2) = kind_pair(rng, rule, max_n);
    let r = rng.random_range(1..=max_rank);
    let e1 = kernel(rng, k1, r, max_degree, 3)?;
    let e2 = kernel(rng, k2, r, max_degree, 3)?;
    Ok((rule, e1, e2))
}

pub fn points<R: Rng>(rng: &mut R, out_dim: usize, in_dim: usize, count: usize) -> Vec<PointPair> {
    (0..count)
        .map(|_| {
            (
                (0..out_dim).map(|_| complex(rng)).collect(),
                (0..in_dim).map(|_| complex(rng)).collect(),
            )
        })
        .collect()
}

/// Random symbol with exponents up to `max_exp` per normal direction.
pub fn symbol<R: Rng>(rng: &mut R, n: usize, m: usize, r: usize, max_exp: u32, max_terms: usize) -> Result<Symbol> {
    let k = n - m;
    let count = rng.random_range(1..=max_terms);
    let terms: Vec<(Vec<u32>, Vec<u32>, CMatrix)> = (0..count)
        .map(|_| {
            (
                (0..k).map(|_| rng.random_range(0..=max_exp)).collect(),
                (0..k).map(|_| rng.random_range(0..=max_exp)).collect(),
                matrix(rng, r),
            )
        })
        .collect();
    Symbol::from_terms(n, m, r, terms)
}

/// Haar-ish unitary from the QR factor of a Gaussian-like matrix.
pub fn unitary<R: Rng>(rng: &mut R, k: usize) -> CMatrix {
    let a = matrix(rng, k);
    let q = a.qr().q();
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_supported() {
        let mut g = rng(7);
        for _ in 0..200 {
            let (rule, e1, e2) = composable_pair(&mut g, 3, 4, 2).unwrap();
            let p = crate::composition::plan(e1.kind(), e2.kind()).unwrap();
            assert_eq!(p.rule, rule);
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let mut g = rng(1);
        let u = unitary(&mut g, 3);
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-12);
    }
}
