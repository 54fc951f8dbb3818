//! Split-variable polynomials with complex matrix coefficients.
//!
//! A [`Poly`] lives in the variables `z_i, zb_i` (unprimed slot) and
//! `z'_i, zb'_i` (primed slot), `i = 1..=n`. Holomorphic and antiholomorphic
//! variables are independent symbols; a real point `Z` is evaluated by
//! feeding `z` and `conj(z)`. Coefficients act on the fiber from the left,
//! so `mul` multiplies coefficient matrices in operand order.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default bound on the total degree of any polynomial built by the calculus.
pub const DEFAULT_DEGREE_CAP: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Unprimed,
    Primed,
}

impl Slot {
    pub fn other(self) -> Slot {
        match self {
            Slot::Unprimed => Slot::Primed,
            Slot::Primed => Slot::Unprimed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Hol,
    Antihol,
}

impl VarKind {
    pub fn other(self) -> VarKind {
        match self {
            VarKind::Hol => VarKind::Antihol,
            VarKind::Antihol => VarKind::Hol,
        }
    }
}

/// A single coordinate symbol. `index` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub slot: Slot,
    pub kind: VarKind,
    pub index: usize,
}

impl VarId {
    pub const fn new(slot: Slot, kind: VarKind, index: usize) -> Self {
        VarId { slot, kind, index }
    }
    pub const fn z(index: usize) -> Self {
        VarId::new(Slot::Unprimed, VarKind::Hol, index)
    }
    pub const fn zb(index: usize) -> Self {
        VarId::new(Slot::Unprimed, VarKind::Antihol, index)
    }
    pub const fn zp(index: usize) -> Self {
        VarId::new(Slot::Primed, VarKind::Hol, index)
    }
    pub const fn zbp(index: usize) -> Self {
        VarId::new(Slot::Primed, VarKind::Antihol, index)
    }

    /// Adjoint partner: slot and kind both flipped.
    pub fn swapped(self) -> Self {
        VarId::new(self.slot.other(), self.kind.other(), self.index)
    }

    pub fn with_slot(self, slot: Slot) -> Self {
        VarId::new(slot, self.kind, self.index)
    }

    /// Parses the canonical names `z1`, `zb1`, `z'1`, `zb'1`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = if let Some(r) = s.strip_prefix("zb") {
            (VarKind::Antihol, r)
        } else if let Some(r) = s.strip_prefix('z') {
            (VarKind::Hol, r)
        } else {
            return Err(Error::Format(format!("bad variable name {s:?}")));
        };
        let (slot, digits) = match rest.strip_prefix('\'') {
            Some(d) => (Slot::Primed, d),
            None => (Slot::Unprimed, rest),
        };
        let index: usize = digits
            .parse()
            .map_err(|_| Error::Format(format!("bad variable index in {s:?}")))?;
        if index == 0 {
            return Err(Error::Format(format!("variable index must be >= 1 in {s:?}")));
        }
        Ok(VarId::new(slot, kind, index))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.kind {
            VarKind::Hol => "z",
            VarKind::Antihol => "zb",
        };
        let prime = match self.slot {
            Slot::Unprimed => "",
            Slot::Primed => "'",
        };
        write!(f, "{base}{prime}{}", self.index)
    }
}

/// Sparse exponent vector, sorted by variable, no zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_exps<I: IntoIterator<Item = (VarId, u32)>>(exps: I) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in exps {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn exps(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exp(&self, v: VarId) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Splits into the part whose variables satisfy `pred` and the rest.
    pub fn split(&self, pred: impl Fn(VarId) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|(v, _)| pred(*v));
        (Monomial(a), Monomial(b))
    }

    pub fn map_vars(&self, f: impl Fn(VarId) -> VarId) -> Monomial {
        Monomial::from_exps(self.0.iter().map(|&(v, e)| (f(v), e)))
    }

    pub fn contains(&self, pred: impl Fn(VarId) -> bool) -> bool {
        self.0.iter().any(|&(v, _)| pred(v))
    }

    /// Evaluates the monomial with complexified coordinate values.
    pub fn eval(&self, unprimed: &CPoint, primed: &CPoint) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for &(v, e) in &self.0 {
            let pt = match v.slot {
                Slot::Unprimed => unprimed,
                Slot::Primed => primed,
            };
            acc *= pow(pt.value(v.kind, v.index), e);
        }
        acc
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

pub(crate) fn pow(x: C64, e: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// A complexified point: holomorphic and antiholomorphic coordinates are
/// independent values. Real points have `anti[i] == conj(hol[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint {
    pub hol: Vec<C64>,
    pub anti: Vec<C64>,
}

impl CPoint {
    pub fn real(z: &[C64]) -> Self {
        CPoint {
            hol: z.to_vec(),
            anti: z.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn empty() -> Self {
        CPoint {
            hol: Vec::new(),
            anti: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.hol.len()
    }

    /// Value of coordinate `index` (1-based); coordinates beyond the point's
    /// dimension read as zero.
    pub fn value(&self, kind: VarKind, index: usize) -> C64 {
        let v = match kind {
            VarKind::Hol => &self.hol,
            VarKind::Antihol => &self.anti,
        };
        v.get(index - 1).copied().unwrap_or_default()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CPoint {
            hol: self.hol.iter().map(|c| c * factor).collect(),
            anti: self.anti.iter().map(|c| c * factor).collect(),
        }
    }

    /// `sum_i hol_i * anti_i`, the complexified `|Z|^2`.
    pub fn norm_sqr(&self) -> C64 {
        self.hol.iter().zip(&self.anti).map(|(a, b)| a * b).sum()
    }
}

/// Dimension metadata shared by every polynomial of a calculation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub l: Option<usize>,
    pub fiber_rank: usize,
}

impl Dims {
    pub fn new(n: usize, m: usize, fiber_rank: usize) -> Result<Self> {
        let d = Dims {
            n,
            m,
            l: None,
            fiber_rank,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_l(n: usize, l: usize, m: usize, fiber_rank: usize) -> Result<Self> {
        let d = Dims {
            n,
            m,
            l: Some(l),
            fiber_rank,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fiber_rank == 0 {
            return Err(Error::InvalidInput("fiber_rank must be >= 1".into()));
        }
        if self.m > self.n {
            return Err(Error::DimensionMismatch(format!(
                "m = {} exceeds n = {}",
                self.m, self.n
            )));
        }
        if let Some(l) = self.l {
            if l < self.m || l > self.n {
                return Err(Error::DimensionMismatch(format!(
                    "need m <= l <= n, got m = {}, l = {l}, n = {}",
                    self.m, self.n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Ring operation selector for [`poly_arith`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolyOp {
    Add,
    Mul,
    Scale(C64),
    ConjugateSwap,
}

/// Dispatches a single ring operation. `b` is ignored by unary operations.
pub fn poly_arith(a: &Poly, b: &Poly, op: PolyOp) -> Result<Poly> {
    match op {
        PolyOp::Add => a.add(b),
        PolyOp::Mul => a.mul(b),
        PolyOp::Scale(c) => Ok(a.scale(c)),
        PolyOp::ConjugateSwap => Ok(a.conjugate_swap()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    dims: Dims,
    terms: BTreeMap<Monomial, CMatrix>,
    degree_cap: u32,
}

fn is_zero_matrix(m: &CMatrix) -> bool {
    m.iter().all(|c| c.re == 0.0 && c.im == 0.0)
}

impl Poly {
    pub fn zero(dims: Dims) -> Self {
        Poly {
            dims,
            terms: BTreeMap::new(),
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn identity(dims: Dims) -> CMatrix {
        CMatrix::identity(dims.fiber_rank, dims.fiber_rank)
    }

    pub fn one(dims: Dims) -> Self {
        Self::scalar(dims, C64::new(1.0, 0.0))
    }

    pub fn scalar(dims: Dims, c: C64) -> Self {
        let mut p = Poly::zero(dims);
        p.insert(Monomial::one(), Self::identity(dims) * c);
        p
    }

    pub fn constant(dims: Dims, coef: CMatrix) -> Result<Self> {
        Self::from_terms(dims, [(Monomial::one(), coef)])
    }

    /// Scalar multiple of the identity times a monomial.
    pub fn monomial(dims: Dims, mono: Monomial, c: C64) -> Result<Self> {
        Self::from_terms(dims, [(mono, Self::identity(dims) * c)])
    }

    pub fn var(dims: Dims, v: VarId) -> Result<Self> {
        Self::monomial(dims, Monomial::var(v), C64::new(1.0, 0.0))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, CMatrix)>>(
        dims: Dims,
        terms: I,
    ) -> Result<Self> {
        let mut p = Poly::zero(dims);
        for (mono, coef) in terms {
            if coef.nrows() != dims.fiber_rank || coef.ncols() != dims.fiber_rank {
                return Err(Error::FiberRankMismatch {
                    left: dims.fiber_rank,
                    right: coef.nrows().max(coef.ncols()),
                });
            }
            for &(v, _) in mono.exps() {
                if v.index > dims.n {
                    return Err(Error::IndexOutOfRange {
                        index: v.index,
                        bound: dims.n,
                    });
                }
            }
            p.insert(mono, coef);
        }
        p.check_cap()?;
        Ok(p)
    }

    /// Builds a polynomial from accumulated terms under an explicit cap.
    pub(crate) fn assemble<I: IntoIterator<Item = (Monomial, CMatrix)>>(
        dims: Dims,
        cap: u32,
        terms: I,
    ) -> Result<Self> {
        let mut p = Poly::zero(dims);
        p.degree_cap = cap;
        for (mono, coef) in terms {
            p.insert(mono, coef);
        }
        p.check_cap()?;
        Ok(p)
    }

    pub(crate) fn insert(&mut self, mono: Monomial, coef: CMatrix) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                if !is_zero_matrix(&coef) {
                    e.insert(coef);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if is_zero_matrix(e.get()) {
                    e.remove();
                }
            }
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn fiber_rank(&self) -> usize {
        self.dims.fiber_rank
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Result<Self> {
        self.degree_cap = cap;
        self.check_cap()?;
        Ok(self)
    }

    fn check_cap(&self) -> Result<()> {
        let d = self.degree();
        if d > self.degree_cap {
            return Err(Error::DegreeOverflow {
                degree: d,
                cap: self.degree_cap,
            });
        }
        Ok(())
    }

    /// Rebinds the polynomial to other dimension metadata with the same
    /// fiber rank.
    pub fn with_dims(&self, dims: Dims) -> Result<Self> {
        if dims.fiber_rank != self.dims.fiber_rank {
            return Err(Error::FiberRankMismatch {
                left: self.dims.fiber_rank,
                right: dims.fiber_rank,
            });
        }
        for mono in self.terms.keys() {
            for &(v, _) in mono.exps() {
                if v.index > dims.n {
                    return Err(Error::IndexOutOfRange {
                        index: v.index,
                        bound: dims.n,
                    });
                }
            }
        }
        Ok(Poly {
            dims,
            terms: self.terms.clone(),
            degree_cap: self.degree_cap,
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CMatrix)> {
        self.terms.iter()
    }

    pub fn coef(&self, mono: &Monomial) -> Option<&CMatrix> {
        self.terms.get(mono)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `Some(parity)` when every monomial has the same degree parity; the
    /// zero polynomial counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut par = None;
        for mono in self.terms.keys() {
            let p = if mono.degree() % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            };
            match par {
                None => par = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(par.unwrap_or(Parity::Even))
    }

    fn check_compatible(&self, other: &Poly) -> Result<()> {
        if self.dims.fiber_rank != other.dims.fiber_rank {
            return Err(Error::FiberRankMismatch {
                left: self.dims.fiber_rank,
                right: other.dims.fiber_rank,
            });
        }
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.degree_cap = self.degree_cap.min(other.degree_cap);
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out.check_cap()?;
        Ok(out)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check_compatible(other)?;
        let cap = self.degree_cap.min(other.degree_cap);
        let d = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && d > cap {
            return Err(Error::DegreeOverflow { degree: d, cap });
        }
        let mut out = Poly::zero(self.dims);
        out.degree_cap = cap;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Poly {
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, coef) in &self.terms {
            out.insert(m.clone(), coef * c);
        }
        out
    }

    /// Left-multiplies every coefficient by a fiber matrix.
    pub fn left_mul_matrix(&self, a: &CMatrix) -> Result<Poly> {
        if a.nrows() != self.dims.fiber_rank || a.ncols() != self.dims.fiber_rank {
            return Err(Error::FiberRankMismatch {
                left: self.dims.fiber_rank,
                right: a.nrows(),
            });
        }
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, coef) in &self.terms {
            out.insert(m.clone(), a * coef);
        }
        Ok(out)
    }

    /// Numerator of the adjoint kernel: swap primed/unprimed slots, swap
    /// holomorphic/antiholomorphic kinds and take adjoint coefficients.
    pub fn conjugate_swap(&self) -> Poly {
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, c) in &self.terms {
            out.insert(m.map_vars(VarId::swapped), c.adjoint());
        }
        out
    }

    /// Pointwise adjoint `P(Z)^*` within the same slot: swap kinds only.
    pub fn conjugate(&self) -> Poly {
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, c) in &self.terms {
            out.insert(
                m.map_vars(|v| VarId::new(v.slot, v.kind.other(), v.index)),
                c.adjoint(),
            );
        }
        out
    }

    /// Wirtinger derivative with respect to `v`.
    pub fn derivative(&self, v: VarId) -> Poly {
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let rest = Monomial::from_exps(
                m.exps()
                    .iter()
                    .map(|&(w, k)| if w == v { (w, k - 1) } else { (w, k) }),
            );
            out.insert(rest, c * C64::new(e as f64, 0.0));
        }
        out
    }

    /// Sets every variable matching `pred` to zero.
    pub fn restrict(&self, pred: impl Fn(VarId) -> bool) -> Poly {
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, c) in &self.terms {
            if !m.contains(&pred) {
                out.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Renames variables; the caller guarantees the map is injective on the
    /// support or that merged terms are meant to add up.
    pub fn map_vars(&self, f: impl Fn(VarId) -> VarId) -> Poly {
        let mut out = Poly::zero(self.dims);
        out.degree_cap = self.degree_cap;
        for (m, c) in &self.terms {
            out.insert(m.map_vars(&f), c.clone());
        }
        out
    }

    /// Decomposes `P = sum_a X^a * P_a` where `X^a` collects the variables
    /// matching `pred`; the slices `P_a` are free of those variables.
    pub fn slices(&self, pred: impl Fn(VarId) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (sel, rest) = m.split(&pred);
            out.entry(sel)
                .or_insert_with(|| {
                    let mut p = Poly::zero(self.dims);
                    p.degree_cap = self.degree_cap;
                    p
                })
                .insert(rest, c.clone());
        }
        out
    }

    /// Largest combined exponent of `z_i, zb_i` in the given slot.
    pub fn degree_in(&self, slot: Slot, index: usize) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                m.exp(VarId::new(slot, VarKind::Hol, index))
                    + m.exp(VarId::new(slot, VarKind::Antihol, index))
            })
            .max()
            .unwrap_or(0)
    }

    pub fn uses(&self, pred: impl Fn(VarId) -> bool) -> bool {
        self.terms.keys().any(|m| m.contains(&pred))
    }

    pub fn eval(&self, unprimed: &CPoint, primed: &CPoint) -> CMatrix {
        let r = self.dims.fiber_rank;
        let mut acc = CMatrix::zeros(r, r);
        for (m, c) in &self.terms {
            acc += c * m.eval(unprimed, primed);
        }
        acc
    }

    /// Largest entrywise coefficient deviation between two polynomials.
    pub fn max_coef_diff(&self, other: &Poly) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            let d = match other.terms.get(m) {
                Some(o) => (c - o).iter().map(|x| x.norm()).fold(0.0, f64::max),
                None => c.iter().map(|x| x.norm()).fold(0.0, f64::max),
            };
            worst = worst.max(d);
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.iter().map(|x| x.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Flattened form for fast repeated evaluation.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            rank: self.dims.fiber_rank,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.exps().to_vec(), c.as_slice().to_vec()))
                .collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.len() == 1 {
                write!(f, "({})·{m}", c[(0, 0)])?;
            } else {
                write!(f, "{c}·{m}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial flattened into exponent lists and column-major coefficient
/// slices, for evaluation inside quadrature loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    rank: usize,
    terms: Vec<(Vec<(VarId, u32)>, Vec<C64>)>,
}

impl CompiledPoly {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Adds `scale * P(unprimed, primed)` into the column-major buffer `out`.
    pub fn eval_into(&self, unprimed: &CPoint, primed: &CPoint, scale: C64, out: &mut [C64]) {
        for (exps, coef) in &self.terms {
            let mut v = scale;
            for &(var, e) in exps {
                let pt = match var.slot {
                    Slot::Unprimed => unprimed,
                    Slot::Primed => primed,
                };
                v *= pow(pt.value(var.kind, var.index), e);
            }
            for (o, c) in out.iter_mut().zip(coef) {
                *o += c * v;
            }
        }
    }
}
