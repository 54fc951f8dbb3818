//! Symbols on the normal directions, the Gaussian contractions that give
//! leading terms of Toeplitz-type operators, and the flat model operators
//! `M_{g,p}` and `M^dagger_{g,p}`.
//!
//! Normal coordinates are `z_{m+1}, .., z_n`. A symbol monomial
//! `w^alpha wb^beta` is entered as `z_N^alpha zb_N^beta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::composition::compose;
use crate::eigen::hermitian_eigs;
use crate::error::{Error, Result};
use crate::fock_oracle::{compare, oracle_compose, oracle_grid, CompiledKernel, KernelOperator, OracleReport, PointPair};
use crate::kernel::{kernel_eval_c, KernelExpr, KernelKind};
use crate::poly::{CMatrix, CPoint, Dims, Monomial, Parity, Poly, Slot, VarId, VarKind, C64};
use crate::quadrature::{tensor_integrate, QuadGrid};

fn factorial(k: u32) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `a! / (a - b)!`
fn falling(a: u32, b: u32) -> f64 {
    (0..b).map(|j| (a - j) as f64).product()
}

/// A polynomial in the normal variables `z_N, zb_N` with fiber-matrix
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    poly: Poly,
}

impl Symbol {
    pub fn new(poly: Poly) -> Result<Self> {
        let d = poly.dims();
        for (mono, _) in poly.terms() {
            for &(v, _) in mono.exps() {
                if v.slot != Slot::Unprimed || v.index <= d.m || v.index > d.n {
                    return Err(Error::InvalidSymbol(format!(
                        "{v} is not a normal variable for n = {}, m = {}",
                        d.n, d.m
                    )));
                }
            }
        }
        Ok(Symbol { poly })
    }

    pub fn zero(n: usize, m: usize, fiber_rank: usize) -> Result<Self> {
        Ok(Symbol {
            poly: Poly::zero(Dims::new(n, m, fiber_rank)?),
        })
    }

    /// `coef * w^hol * wb^antihol`, exponents indexed by normal direction.
    pub fn monomial(n: usize, m: usize, hol: &[u32], antihol: &[u32], coef: CMatrix) -> Result<Self> {
        Self::from_terms(n, m, coef.nrows(), [(hol.to_vec(), antihol.to_vec(), coef)])
    }

    pub fn scalar_monomial(n: usize, m: usize, hol: &[u32], antihol: &[u32], c: C64) -> Result<Self> {
        Self::monomial(n, m, hol, antihol, CMatrix::from_element(1, 1, c))
    }

    pub fn from_terms<I>(n: usize, m: usize, fiber_rank: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<u32>, CMatrix)>,
    {
        let dims = Dims::new(n, m, fiber_rank)?;
        let k = n - m;
        let mut list = Vec::new();
        for (hol, anti, coef) in terms {
            if hol.len() != k || anti.len() != k {
                return Err(Error::InvalidSymbol(format!(
                    "exponent vectors must have n - m = {k} entries"
                )));
            }
            let mono = Monomial::from_exps(
                hol.iter()
                    .enumerate()
                    .map(|(j, &e)| (VarId::z(m + 1 + j), e))
                    .chain(anti.iter().enumerate().map(|(j, &e)| (VarId::zb(m + 1 + j), e))),
            );
            list.push((mono, coef));
        }
        Symbol::new(Poly::from_terms(dims, list)?)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn dims(&self) -> Dims {
        self.poly.dims()
    }

    pub fn normal_dim(&self) -> usize {
        let d = self.dims();
        d.n - d.m
    }

    pub fn fiber_rank(&self) -> usize {
        self.poly.fiber_rank()
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn parity(&self) -> Option<Parity> {
        self.poly.parity()
    }

    /// Terms as `(alpha, beta, coefficient)` in normal-direction order.
    pub fn terms(&self) -> Vec<(Vec<u32>, Vec<u32>, CMatrix)> {
        let d = self.dims();
        self.poly
            .terms()
            .map(|(mono, c)| {
                let hol = (d.m + 1..=d.n).map(|i| mono.exp(VarId::z(i))).collect();
                let anti = (d.m + 1..=d.n).map(|i| mono.exp(VarId::zb(i))).collect();
                (hol, anti, c.clone())
            })
            .collect()
    }

    /// Pointwise adjoint `g^*`.
    pub fn adjoint(&self) -> Symbol {
        Symbol {
            poly: self.poly.conjugate(),
        }
    }

    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        Symbol::new(self.poly.mul(&other.poly)?)
    }

    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        Symbol::new(self.poly.add(&other.poly)?)
    }

    pub fn scale(&self, c: C64) -> Symbol {
        Symbol {
            poly: self.poly.scale(c),
        }
    }

    /// Value at a normal vector `z_N` in `C^{n-m}`.
    pub fn eval(&self, z_n: &[C64]) -> Result<CMatrix> {
        let d = self.dims();
        if z_n.len() != d.n - d.m {
            return Err(Error::DimensionMismatch(format!(
                "normal point has {} entries, expected {}",
                z_n.len(),
                d.n - d.m
            )));
        }
        let mut full = vec![C64::new(0.0, 0.0); d.m];
        full.extend_from_slice(z_n);
        Ok(self.poly.eval(&CPoint::real(&full), &CPoint::empty()))
    }

    /// Substitutes `w -> U w` for a unitary `U` on the normal directions.
    pub fn rotate(&self, u: &CMatrix) -> Result<Symbol> {
        let d = self.dims();
        let k = d.n - d.m;
        if u.nrows() != k || u.ncols() != k {
            return Err(Error::DimensionMismatch(format!("rotation must be {k}x{k}")));
        }
        let cap = self.poly.degree_cap();
        let linear = |kind: VarKind, j: usize| -> Result<Poly> {
            let mut p = Poly::zero(d).with_degree_cap(cap)?;
            for l in 0..k {
                let c = match kind {
                    VarKind::Hol => u[(j, l)],
                    VarKind::Antihol => u[(j, l)].conj(),
                };
                let v = VarId::new(Slot::Unprimed, kind, d.m + 1 + l);
                p = p.add(&Poly::monomial(d, Monomial::var(v), c)?.with_degree_cap(cap)?)?;
            }
            Ok(p)
        };
        let mut out = Poly::zero(d).with_degree_cap(cap)?;
        for (mono, coef) in self.poly.terms() {
            let mut t = Poly::constant(d, coef.clone())?.with_degree_cap(cap)?;
            for &(v, e) in mono.exps() {
                let sub = linear(v.kind, v.index - d.m - 1)?;
                for _ in 0..e {
                    t = t.mul(&sub)?;
                }
            }
            out = out.add(&t)?;
        }
        Symbol::new(out)
    }
}

/// `Lambda_=`: the Gaussian average `sum_{alpha = beta} coef * beta!/pi^|beta|`.
pub fn lambda_eq(g: &Symbol) -> CMatrix {
    let r = g.fiber_rank();
    let mut acc = CMatrix::zeros(r, r);
    for (a, b, c) in g.terms() {
        if a == b {
            let w: f64 = b.iter().map(|&x| factorial(x) / PI.powi(x as i32)).product();
            acc += c * C64::new(w, 0.0);
        }
    }
    acc
}

fn dominates(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// `Lambda_h[w^alpha wb^beta] = alpha!/((alpha-beta)! pi^|beta|) w^(alpha-beta)`
/// for `alpha >= beta`, `alpha != beta`; zero otherwise.
pub fn lambda_h(g: &Symbol) -> Result<Symbol> {
    let d = g.dims();
    let k = d.n - d.m;
    let mut terms = Vec::new();
    for (a, b, c) in g.terms() {
        if a != b && dominates(&a, &b) {
            let w: f64 = a
                .iter()
                .zip(&b)
                .map(|(&x, &y)| falling(x, y) / PI.powi(y as i32))
                .product();
            let diff: Vec<u32> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            terms.push((diff, vec![0; k], c * C64::new(w, 0.0)));
        }
    }
    Symbol::from_terms(d.n, d.m, d.fiber_rank, terms)
}

/// Mirror of [`lambda_h`]: `beta!/((beta-alpha)! pi^|alpha|) wb^(beta-alpha)`
/// for `beta >= alpha`, `beta != alpha`.
pub fn lambda_a(g: &Symbol) -> Result<Symbol> {
    let d = g.dims();
    let k = d.n - d.m;
    let mut terms = Vec::new();
    for (a, b, c) in g.terms() {
        if a != b && dominates(&b, &a) {
            let w: f64 = a
                .iter()
                .zip(&b)
                .map(|(&x, &y)| falling(y, x) / PI.powi(x as i32))
                .product();
            let diff: Vec<u32> = b.iter().zip(&a).map(|(y, x)| y - x).collect();
            terms.push((vec![0; k], diff, c * C64::new(w, 0.0)));
        }
    }
    Symbol::from_terms(d.n, d.m, d.fiber_rank, terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    SmoothBump,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub r_perp: f64,
    pub profile: Profile,
}

impl CutoffSpec {
    pub fn identity() -> Self {
        CutoffSpec {
            r_perp: 1.0,
            profile: Profile::Identity,
        }
    }

    pub fn smooth_bump(r_perp: f64) -> Result<Self> {
        if !(r_perp > 0.0) {
            return Err(Error::InvalidInput(format!("r_perp must be positive, got {r_perp}")));
        }
        Ok(CutoffSpec {
            r_perp,
            profile: Profile::SmoothBump,
        })
    }

    /// `rho(|Z_N| / r_perp)`.
    pub fn weight(&self, norm: f64) -> f64 {
        match self.profile {
            Profile::Identity => 1.0,
            Profile::SmoothBump => smooth_bump(norm / self.r_perp),
        }
    }
}

fn flat_exp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// `1` on `[0, 1/4]`, `0` on `[1/2, inf)`, smooth and monotone between.
pub fn smooth_bump(x: f64) -> f64 {
    if x <= 0.25 {
        return 1.0;
    }
    if x >= 0.5 {
        return 0.0;
    }
    let t = (x - 0.25) / 0.25;
    let a = flat_exp(1.0 - t);
    a / (a + flat_exp(t))
}

/// The field `p^{k/2} rho(|Z_N|/r) g(Z_N)`, degree by degree.
#[derive(Clone, Debug)]
pub struct BracketField {
    g: Symbol,
    p: f64,
    cutoff: CutoffSpec,
}

pub fn bracket(g: &Symbol, p: u32, cutoff: CutoffSpec) -> Result<BracketField> {
    if p == 0 {
        return Err(Error::InvalidInput("p must be at least 1".into()));
    }
    Ok(BracketField {
        g: g.clone(),
        p: p as f64,
        cutoff,
    })
}

impl BracketField {
    pub fn eval(&self, z_n: &[C64]) -> Result<CMatrix> {
        let norm = z_n.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scaled: Vec<C64> = z_n.iter().map(|c| c * self.p.sqrt()).collect();
        Ok(self.g.eval(&scaled)? * C64::new(self.cutoff.weight(norm), 0.0))
    }

    /// Polynomial form, available for the identity profile.
    pub fn as_symbol(&self) -> Result<Symbol> {
        if self.cutoff.profile != Profile::Identity {
            return Err(Error::InvalidInput("the smooth bump has no polynomial form".into()));
        }
        let d = self.g.dims();
        let mut out = Poly::zero(d).with_degree_cap(self.g.poly().degree_cap())?;
        for (mono, c) in self.g.poly().terms() {
            let f = self.p.powf(mono.degree() as f64 / 2.0);
            out = out.add(
                &Poly::constant(d, c * C64::new(f, 0.0))?
                    .mul(&Poly::monomial(d, mono.clone(), C64::new(1.0, 0.0))?)?,
            )?;
        }
        Symbol::new(out)
    }
}

/// `prefactor * K(sqrt(p) Z, sqrt(p) Z')` for a polynomial kernel `K`.
#[derive(Clone, Debug)]
pub struct ScaledKernel {
    expr: KernelExpr,
    base: CompiledKernel,
    p: f64,
    prefactor: f64,
}

impl ScaledKernel {
    pub fn new(expr: KernelExpr, p: f64, prefactor: f64) -> Self {
        let base = CompiledKernel::new(&expr);
        ScaledKernel {
            expr,
            base,
            p,
            prefactor,
        }
    }

    pub fn expr(&self) -> &KernelExpr {
        &self.expr
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn eval(&self, z: &[C64], zp: &[C64]) -> Result<CMatrix> {
        let sp = self.p.sqrt();
        let zs: Vec<C64> = z.iter().map(|c| c * sp).collect();
        let zps: Vec<C64> = zp.iter().map(|c| c * sp).collect();
        Ok(self.expr.eval(&zs, &zps)? * C64::new(self.prefactor, 0.0))
    }
}

impl KernelOperator for ScaledKernel {
    fn out_dim(&self) -> usize {
        self.base.out_dim()
    }
    fn in_dim(&self) -> usize {
        self.base.in_dim()
    }
    fn fiber_rank(&self) -> usize {
        self.base.fiber_rank()
    }
    fn weight_scale(&self) -> f64 {
        self.p * PI
    }
    fn coupled(&self, i: usize) -> bool {
        self.base.coupled(i)
    }
    fn out_degree(&self, i: usize) -> Option<u32> {
        self.base.out_degree(i)
    }
    fn in_degree(&self, i: usize) -> Option<u32> {
        self.base.in_degree(i)
    }
    fn primed_antiholomorphic(&self) -> bool {
        self.base.primed_antiholomorphic()
    }
    fn eval_c(&self, z: &CPoint, zp: &CPoint, out: &mut [C64]) {
        let sp = self.p.sqrt();
        self.base.eval_c(&z.scaled(sp), &zp.scaled(sp), out);
        for o in out.iter_mut() {
            *o *= self.prefactor;
        }
    }
}

/// `M_{g,p}` with a smooth cutoff, evaluated pointwise.
#[derive(Clone, Debug)]
pub struct SampledModelOperator {
    g: Symbol,
    p: f64,
    cutoff: CutoffSpec,
    kind: KernelKind,
}

impl KernelOperator for SampledModelOperator {
    fn out_dim(&self) -> usize {
        self.kind.unprimed_dim()
    }
    fn in_dim(&self) -> usize {
        self.kind.primed_dim()
    }
    fn fiber_rank(&self) -> usize {
        self.g.fiber_rank()
    }
    fn weight_scale(&self) -> f64 {
        self.p * PI
    }
    fn coupled(&self, i: usize) -> bool {
        self.kind.coord_form(i).cross
    }
    fn out_degree(&self, _i: usize) -> Option<u32> {
        None
    }
    fn in_degree(&self, _i: usize) -> Option<u32> {
        None
    }
    fn primed_antiholomorphic(&self) -> bool {
        true
    }
    fn eval_c(&self, z: &CPoint, zp: &CPoint, out: &mut [C64]) {
        let d = self.g.dims();
        let sp = self.p.sqrt();
        let norm = (d.m + 1..=d.n)
            .map(|i| z.value(VarKind::Hol, i) * z.value(VarKind::Antihol, i))
            .sum::<C64>()
            .re
            .max(0.0)
            .sqrt();
        let rho = self.cutoff.weight(norm);
        let zs = z.scaled(sp);
        let g = self.g.poly().eval(&zs, &CPoint::empty());
        let k = kernel_eval_c(self.kind, &zs, &zp.scaled(sp)) * (self.p.powi(d.m as i32) * rho);
        for (o, v) in out.iter_mut().zip(g.iter()) {
            *o = v * k;
        }
    }
}

/// A model operator: a polynomial kernel for the identity cutoff, a
/// pointwise-evaluated one otherwise.
#[derive(Clone, Debug)]
pub enum ModelOperator {
    Symbolic(ScaledKernel),
    Sampled(SampledModelOperator),
}

impl ModelOperator {
    pub fn as_operator(&self) -> &dyn KernelOperator {
        match self {
            ModelOperator::Symbolic(k) => k,
            ModelOperator::Sampled(k) => k,
        }
    }

    pub fn symbolic(&self) -> Option<&ScaledKernel> {
        match self {
            ModelOperator::Symbolic(k) => Some(k),
            ModelOperator::Sampled(_) => None,
        }
    }
}

fn check_p(p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidInput("p must be at least 1".into()));
    }
    Ok(p as f64)
}

/// `M_{g,p}`: kernel `p^m [g(Z_N) E_{n,m}](sqrt(p) Z, sqrt(p) Z'_Y)`.
pub fn m_op(g: &Symbol, p: u32, cutoff: CutoffSpec) -> Result<ModelOperator> {
    let pf = check_p(p)?;
    let d = g.dims();
    let kind = KernelKind::Extension { n: d.n, m: d.m };
    match cutoff.profile {
        Profile::Identity => {
            let expr = KernelExpr::new(g.poly().clone(), kind)?;
            Ok(ModelOperator::Symbolic(ScaledKernel::new(expr, pf, pf.powi(d.m as i32))))
        }
        Profile::SmoothBump => Ok(ModelOperator::Sampled(SampledModelOperator {
            g: g.clone(),
            p: pf,
            cutoff,
            kind,
        })),
    }
}

/// `M^dagger_{g,p}`: kernel `p^n [g(Z'_N) Res_{n,m}](sqrt(p) Z_Y, sqrt(p) Z')`.
/// Its adjoint is `p^(n-m) M_{g^*,p}`.
pub fn m_dagger(g: &Symbol, p: u32) -> Result<ScaledKernel> {
    let pf = check_p(p)?;
    let d = g.dims();
    let kind = KernelKind::Restriction { n: d.n, m: d.m };
    let num = g.poly().map_vars(|v| v.with_slot(Slot::Primed));
    let expr = KernelExpr::new(num, kind)?;
    Ok(ScaledKernel::new(expr, pf, pf.powi(d.n as i32)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HgpResult {
    /// `int exp(-p pi |Z_N|^2) g(sqrt(p) Z_N)^* g(sqrt(p) Z_N) rho^2 dZ_N`
    pub h2: CMatrix,
    /// `Lambda_=[g^* g] / p^(n-m)`
    pub predicted: CMatrix,
    pub grid: QuadGrid,
}

/// Nodes per real axis used for the smooth bump.
pub const BUMP_NODES: usize = 80;
/// Largest tensor grid `h_gp` will evaluate.
pub const MAX_GRID_POINTS: usize = 2_000_000;

pub fn h_gp(g: &Symbol, p: u32, cutoff: CutoffSpec, nodes: Option<usize>) -> Result<HgpResult> {
    let pf = check_p(p)?;
    let d = g.dims();
    let k = d.n - d.m;
    let gg = g.adjoint().mul(g)?;
    let predicted = lambda_eq(&gg) / C64::new(pf.powi(k as i32), 0.0);
    let s = pf * PI;
    let grid = match (cutoff.profile, nodes) {
        (_, Some(nodes)) => QuadGrid::uniform(k, nodes, s),
        (Profile::Identity, None) => {
            let degrees: Vec<u32> = (d.m + 1..=d.n).map(|i| gg.poly().degree_in(Slot::Unprimed, i)).collect();
            QuadGrid::for_degrees(&degrees, s)
        }
        (Profile::SmoothBump, None) => QuadGrid::uniform(k, BUMP_NODES, s),
    };
    if cutoff.profile == Profile::Identity {
        let degrees: Vec<u32> = (d.m + 1..=d.n).map(|i| gg.poly().degree_in(Slot::Unprimed, i)).collect();
        grid.check_degrees(&degrees)?;
    }
    if grid.point_count() > MAX_GRID_POINTS {
        return Err(Error::QuadratureBudget(format!(
            "{} grid points for n - m = {k} exceeds {MAX_GRID_POINTS}",
            grid.point_count()
        )));
    }
    let axes = grid.axes()?;
    let r = g.fiber_rank();
    let compiled = gg.poly().compile();
    let sp = pf.sqrt();
    let v = tensor_integrate(&axes, r * r, |x, acc| {
        let mut z = vec![C64::new(0.0, 0.0); d.m];
        let mut norm2 = 0.0;
        for j in 0..k {
            let c = C64::new(x[2 * j], x[2 * j + 1]);
            norm2 += c.norm_sqr();
            z.push(c * sp);
        }
        let rho = cutoff.weight(norm2.sqrt());
        compiled.eval_into(&CPoint::real(&z), &CPoint::empty(), C64::new(rho * rho, 0.0), acc);
    });
    Ok(HgpResult {
        h2: CMatrix::from_column_slice(r, r, &v),
        predicted,
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1C2 {
    pub c1: f64,
    pub c2: f64,
    /// Index of the kappa sample attaining `c1` (resp. `c2`).
    pub c1_sample: usize,
    pub c2_sample: usize,
}

/// `C_1 = sup kappa^{1/2} |Lambda_=[g^* g]|^{1/2}` and
/// `C_2 = sup kappa^{-1/2} |Lambda_=[g g^*]|^{1/2}`, with the operator norm.
pub fn c1_c2(g: &Symbol, kappa: &[f64]) -> Result<C1C2> {
    let kappa: Vec<f64> = if kappa.is_empty() { vec![1.0] } else { kappa.to_vec() };
    if let Some(k) = kappa.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::InvalidInput(format!("kappa samples must be positive, got {k}")));
    }
    let top = |m: CMatrix| -> Result<f64> {
        Ok(hermitian_eigs(&m)?.last().copied().unwrap_or(0.0).max(0.0))
    };
    let a = top(lambda_eq(&g.adjoint().mul(g)?))?;
    let b = top(lambda_eq(&g.mul(&g.adjoint())?))?;
    let mut out = C1C2 {
        c1: f64::NEG_INFINITY,
        c2: f64::NEG_INFINITY,
        c1_sample: 0,
        c2_sample: 0,
    };
    for (i, &k) in kappa.iter().enumerate() {
        let v1 = (k * a).sqrt();
        let v2 = (b / k).sqrt();
        if v1 > out.c1 {
            out.c1 = v1;
            out.c1_sample = i;
        }
        if v2 > out.c2 {
            out.c2 = v2;
            out.c2_sample = i;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToeplitzKind {
    YY,
    XyEven,
    XyOdd,
    YxEven,
    YxOdd,
}

impl ToeplitzKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "YY" => ToeplitzKind::YY,
            "XY_even" => ToeplitzKind::XyEven,
            "XY_odd" => ToeplitzKind::XyOdd,
            "YX_even" => ToeplitzKind::YxEven,
            "YX_odd" => ToeplitzKind::YxOdd,
            other => return Err(Error::InvalidInput(format!("unknown Toeplitz kind {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ToeplitzKind::YY => "YY",
            ToeplitzKind::XyEven => "XY_even",
            ToeplitzKind::XyOdd => "XY_odd",
            ToeplitzKind::YxEven => "YX_even",
            ToeplitzKind::YxOdd => "YX_odd",
        }
    }

    fn parity(&self) -> Option<Parity> {
        match self {
            ToeplitzKind::YY => None,
            ToeplitzKind::XyEven | ToeplitzKind::YxEven => Some(Parity::Even),
            ToeplitzKind::XyOdd | ToeplitzKind::YxOdd => Some(Parity::Odd),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LeadingValue {
    Matrix(CMatrix),
    Symbol(Symbol),
}

/// Leading coefficients by order in `p^{-1/2}`; odd kinds carry a zero
/// order-0 entry followed by the order-1 entry.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadingTerm {
    pub kind: ToeplitzKind,
    pub orders: Vec<(u32, LeadingValue)>,
}

impl LeadingTerm {
    pub fn leading(&self) -> &LeadingValue {
        &self.orders.last().expect("non-empty").1
    }
}

pub fn toeplitz_leading(kind: ToeplitzKind, g: &Symbol) -> Result<LeadingTerm> {
    if let Some(want) = kind.parity() {
        let have = g.parity();
        if have != Some(want) {
            return Err(Error::ParityMismatch(format!(
                "{} needs a symbol of {:?} degree, got {}",
                kind.name(),
                want,
                match have {
                    Some(p) => format!("{p:?}"),
                    None => "mixed".into(),
                }
            )));
        }
    }
    let d = g.dims();
    let zero = Symbol::zero(d.n, d.m, d.fiber_rank)?;
    let orders = match kind {
        ToeplitzKind::YY => vec![(0, LeadingValue::Matrix(lambda_eq(g)))],
        ToeplitzKind::XyEven => vec![(0, LeadingValue::Symbol(lambda_h(g)?))],
        ToeplitzKind::YxEven => vec![(0, LeadingValue::Symbol(lambda_a(g)?))],
        ToeplitzKind::XyOdd => vec![
            (0, LeadingValue::Symbol(zero)),
            (1, LeadingValue::Symbol(lambda_h(g)?)),
        ],
        ToeplitzKind::YxOdd => vec![
            (0, LeadingValue::Symbol(zero)),
            (1, LeadingValue::Symbol(lambda_a(g)?)),
        ],
    };
    Ok(LeadingTerm { kind, orders })
}

fn difference(a: Vec<CMatrix>, b: Vec<CMatrix>) -> Vec<CMatrix> {
    a.into_iter().zip(b).map(|(x, y)| x - y).collect()
}

fn oracle(e1: &KernelExpr, e2: &KernelExpr, points: &[PointPair]) -> Result<(Vec<CMatrix>, QuadGrid)> {
    let (k1, k2) = (CompiledKernel::new(e1), CompiledKernel::new(e2));
    let grid = oracle_grid(&k1, &k2)?;
    Ok((oracle_compose(&k1, &k2, &grid, points)?, grid))
}

/// Oracle comparison of each order of a leading-term entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCheck {
    pub kind: ToeplitzKind,
    /// Order 0 against the even part of the oracle kernel, order 1 against
    /// the odd part.
    pub orders: Vec<(u32, OracleReport)>,
    pub pass: bool,
}

impl ToeplitzCheck {
    pub fn max_rel(&self) -> f64 {
        self.orders.iter().map(|(_, r)| r.max_rel).fold(0.0, f64::max)
    }

    pub fn order(&self, k: u32) -> Option<&OracleReport> {
        self.orders.iter().find(|(o, _)| *o == k).map(|(_, r)| r)
    }
}

/// Compares the leading terms with the flat-model Toeplitz kernel at `p = 1`,
/// integrated by the oracle:
///
/// * `YY`: `Res o (g E)`, expected `Lambda_=[g] P_m`;
/// * `XY`: `(P_n - P^perp) o (g E)`, expected `Lambda_h[g](Z_N) E`;
/// * `YX`: `Res o (g P_n - g P^perp)`, expected `Lambda_a[g](Z'_N) Res`.
///
/// Order `k` of the expansion has numerator parity `k`; it is read off the
/// oracle kernel as `(K(Z, Z') +- K(-Z, -Z')) / 2`.
pub fn toeplitz_oracle_check(kind: ToeplitzKind, g: &Symbol, points: &[PointPair], tol: f64) -> Result<ToeplitzCheck> {
    let lead = toeplitz_leading(kind, g)?;
    let d = g.dims();
    let (n, m, r) = (d.n, d.m, d.fiber_rank);
    let unit = |k: KernelKind| KernelExpr::unit(k, r);
    let gnum = g.poly().clone();
    let ext = KernelKind::Extension { n, m };
    let res = KernelKind::Restriction { n, m };
    let mut all: Vec<PointPair> = points.to_vec();
    all.extend(points.iter().map(|(z, zp)| {
        (z.iter().map(|c| -c).collect(), zp.iter().map(|c| -c).collect())
    }));
    let to_kernel = |v: &LeadingValue| -> Result<KernelExpr> {
        match (kind, v) {
            (ToeplitzKind::YY, LeadingValue::Matrix(c)) => KernelExpr::new(
                Poly::constant(Dims::new(m, m, r)?, c.clone())?,
                KernelKind::Bergman { n: m },
            ),
            (ToeplitzKind::XyEven | ToeplitzKind::XyOdd, LeadingValue::Symbol(s)) => {
                KernelExpr::new(s.poly().clone(), ext)
            }
            (ToeplitzKind::YxEven | ToeplitzKind::YxOdd, LeadingValue::Symbol(s)) => {
                KernelExpr::new(s.poly().map_vars(|v| v.with_slot(Slot::Primed)), res)
            }
            _ => Err(Error::InvalidInput("leading value does not match its kind".into())),
        }
    };
    let (actual, grid) = match kind {
        ToeplitzKind::YY => oracle(&unit(res)?, &KernelExpr::new(gnum, ext)?, &all)?,
        ToeplitzKind::XyEven | ToeplitzKind::XyOdd => {
            let ge = KernelExpr::new(gnum, ext)?;
            let (a, grid) = oracle(&unit(KernelKind::Bergman { n })?, &ge, &all)?;
            let (b, _) = oracle(&unit(KernelKind::OrthBergman { n, m })?, &ge, &all)?;
            (difference(a, b), grid)
        }
        ToeplitzKind::YxEven | ToeplitzKind::YxOdd => {
            let (a, grid) = oracle(&unit(res)?, &KernelExpr::new(gnum.clone(), KernelKind::Bergman { n })?, &all)?;
            let (b, _) = oracle(&unit(res)?, &KernelExpr::new(gnum, KernelKind::OrthBergman { n, m })?, &all)?;
            (difference(a, b), grid)
        }
    };
    let k = points.len();
    let half = C64::new(0.5, 0.0);
    let mut orders = Vec::new();
    for order in 0..=1u32 {
        let sign = if order == 0 { 1.0 } else { -1.0 };
        let part: Vec<CMatrix> = (0..k)
            .map(|i| (&actual[i] + &actual[k + i] * C64::new(sign, 0.0)) * half)
            .collect();
        let expected = match lead.orders.iter().find(|(o, _)| *o == order) {
            Some((_, v)) => {
                let e = to_kernel(v)?;
                points.iter().map(|(z, zp)| e.eval(z, zp)).collect::<Result<Vec<_>>>()?
            }
            None => vec![CMatrix::zeros(r, r); k],
        };
        orders.push((order, compare(&expected, &part, grid.clone(), tol)));
    }
    let pass = orders.iter().all(|(_, rep)| rep.pass);
    Ok(ToeplitzCheck { kind, orders, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    /// `max |Res o (Res o P_n)^* - P_m|` over coefficients.
    pub multiplicative: f64,
    /// `max |E_{n,l} o E_{l,m} - E_{n,m}|` over coefficients.
    pub transitivity: f64,
}

/// Flat-model defects: both compositions must reproduce the unit kernel.
pub fn flat_defect_checks(n: usize, l: usize, m: usize) -> Result<DefectReport> {
    Dims::with_l(n, l, m, 1)?;
    let res_p = compose(
        &KernelExpr::unit(KernelKind::Restriction { n, m }, 1)?,
        &KernelExpr::unit(KernelKind::Bergman { n }, 1)?,
    )?;
    let a = compose(&KernelExpr::unit(KernelKind::Restriction { n, m }, 1)?, &res_p.adjoint())?;
    if a.kind() != (KernelKind::Bergman { n: m }) {
        return Err(Error::DimensionMismatch(format!("expected Bergman({m}), got {}", a.kind())));
    }
    let multiplicative = a.numerator().max_coef_diff(&Poly::one(a.numerator().dims()));
    let t = compose(
        &KernelExpr::unit(KernelKind::Extension { n, m: l }, 1)?,
        &KernelExpr::unit(KernelKind::Extension { n: l, m }, 1)?,
    )?;
    if t.kind() != (KernelKind::Extension { n, m }) {
        return Err(Error::DimensionMismatch(format!("expected Extension({n},{m}), got {}", t.kind())));
    }
    let transitivity = t.numerator().max_coef_diff(&Poly::one(t.numerator().dims()));
    Ok(DefectReport {
        n,
        l,
        m,
        multiplicative,
        transitivity,
    })
}

/// Every chain `m <= l <= n <= max_n`.
pub fn flat_defect_suite(max_n: usize) -> Result<Vec<DefectReport>> {
    let mut out = Vec::new();
    for n in 0..=max_n {
        for l in 0..=n {
            for m in 0..=l {
                out.push(flat_defect_checks(n, l, m)?);
            }
        }
    }
    Ok(out)
}
