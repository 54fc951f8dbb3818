//! Curvature constants evaluated on sampled data along a submanifold chain
//! `Y = W_0 ⊂ W_1 ⊂ .. ⊂ W_r ⊂ W_{r+1} = X`.
//!
//! Level `i` (1-based) is the normal space `N^{W_i | W_{i-1}}`, of complex
//! dimension `dims[i] - dims[i-1]`. Direction records at level `i <= r`
//! carry `d/dn (scal^{W_{i+1}} - scal^{W_i})` and
//! `nabla_n (Lambda^{W_{i+1}} - Lambda^{W_i})`; the top level `r + 1`
//! needs no derivative data.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_eigs;
use crate::error::{Error, Result};
use crate::json::{cmatrix, cvector};
use crate::poly::{CMatrix, C64};

pub const GEOM_SCHEMA: &str = "geom/1";

const HERMITIAN_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-10;
const SPAN_TOL: f64 = 1e-10;

fn default_kappa() -> f64 {
    1.0
}

fn default_schema() -> String {
    GEOM_SCHEMA.to_string()
}

/// A single value or a per-level list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerLevel<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> PerLevel<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            PerLevel::One(x) => vec![x.clone()],
            PerLevel::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixValue(#[serde(with = "cmatrix")] pub CMatrix);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub level: usize,
    #[serde(with = "cvector")]
    pub vector: Vec<C64>,
    #[serde(default)]
    pub d_scal_diff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nabla_lambda_diff: Option<MatrixValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    #[serde(rename = "scal_X")]
    pub scal_x: f64,
    #[serde(rename = "scal_W", default, skip_serializing_if = "Option::is_none")]
    pub scal_w: Option<PerLevel<f64>>,
    #[serde(rename = "scal_Y")]
    pub scal_y: f64,
    #[serde(rename = "lambda_RF_X")]
    pub lambda_rf_x: MatrixValue,
    #[serde(rename = "lambda_RF_W", default, skip_serializing_if = "Option::is_none")]
    pub lambda_rf_w: Option<PerLevel<MatrixValue>>,
    #[serde(rename = "lambda_RF_Y")]
    pub lambda_rf_y: MatrixValue,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub normal_dirs: Vec<DirectionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryData {
    #[serde(default = "default_schema")]
    pub schema: String,
    /// `[m, l_1, .., l_r, n]`
    pub dims: Vec<usize>,
    pub fiber_rank: usize,
    pub samples: Vec<Sample>,
}

/// A normal vector split by level: entry `i - 1` holds the level-`i`
/// components.
pub type Direction = Vec<Vec<C64>>;

fn is_i_hermitian(m: &CMatrix) -> f64 {
    // (1/2 pi i) m is Hermitian iff m is anti-Hermitian
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] + m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn over_two_pi_i(m: &CMatrix) -> CMatrix {
    m / C64::new(0.0, 2.0 * PI)
}

/// `scal_diff / 8 pi * Id - (1 / 2 pi i) lambda_diff`
pub fn curvature_defect_matrix(scal_diff: f64, lambda_diff: &CMatrix) -> CMatrix {
    let r = lambda_diff.nrows();
    CMatrix::identity(r, r) * C64::new(scal_diff / (8.0 * PI), 0.0) - over_two_pi_i(lambda_diff)
}

impl GeometryData {
    pub fn from_json(text: &str) -> Result<Self> {
        let d: GeometryData = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("geometry data serializes")
    }

    /// Number of intermediate levels `r`.
    pub fn intermediate_levels(&self) -> usize {
        self.dims.len().saturating_sub(2)
    }

    pub fn level_dim(&self, level: usize) -> usize {
        self.dims[level] - self.dims[level - 1]
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != GEOM_SCHEMA {
            return Err(Error::Format(format!("schema {:?} does not match {GEOM_SCHEMA:?}", self.schema)));
        }
        if self.dims.len() < 2 || self.dims.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Geometry(format!("dims {:?} must be a non-decreasing chain [m, .., n]", self.dims)));
        }
        if self.fiber_rank == 0 {
            return Err(Error::Geometry("fiber_rank must be >= 1".into()));
        }
        if self.samples.is_empty() {
            return Err(Error::Geometry("no samples".into()));
        }
        let r = self.fiber_rank;
        let levels = self.intermediate_levels();
        for s in &self.samples {
            let ctx = |msg: String| Error::Geometry(format!("sample {:?}: {msg}", s.id));
            if !(s.kappa > 0.0) {
                return Err(ctx(format!("kappa must be positive, got {}", s.kappa)));
            }
            let mut mats = vec![&s.lambda_rf_x.0, &s.lambda_rf_y.0];
            let w_mats = s.lambda_rf_w.as_ref().map(|w| w.to_vec()).unwrap_or_default();
            mats.extend(w_mats.iter().map(|m| &m.0));
            for m in mats {
                if m.nrows() != r {
                    return Err(ctx(format!("curvature matrix is {}x{}, fiber rank is {r}", m.nrows(), m.ncols())));
                }
                let dev = is_i_hermitian(m);
                if dev > HERMITIAN_TOL * m.norm().max(1.0) {
                    return Err(Error::NotHermitian(dev));
                }
            }
            if let Some(w) = &s.scal_w {
                if w.to_vec().len() != levels {
                    return Err(ctx(format!("scal_W has {} entries for {levels} levels", w.to_vec().len())));
                }
            }
            if !w_mats.is_empty() && w_mats.len() != levels {
                return Err(ctx(format!("lambda_RF_W has {} entries for {levels} levels", w_mats.len())));
            }
            for d in &s.normal_dirs {
                if d.level == 0 || d.level > levels + 1 {
                    return Err(ctx(format!("direction level {} outside 1..={}", d.level, levels + 1)));
                }
                if d.vector.len() != self.level_dim(d.level) {
                    return Err(ctx(format!(
                        "level-{} direction has {} components, expected {}",
                        d.level,
                        d.vector.len(),
                        self.level_dim(d.level)
                    )));
                }
                let norm = d.vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > UNIT_TOL {
                    return Err(ctx(format!("direction has norm {norm}, expected 1")));
                }
                if let Some(m) = &d.nabla_lambda_diff {
                    if m.0.nrows() != r {
                        return Err(ctx("nabla_lambda_diff has the wrong size".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples deduplicated by id, in id order. Records sharing an id must
    /// agree.
    fn canonical_samples(&self) -> Result<Vec<&Sample>> {
        let mut list: Vec<&Sample> = self.samples.iter().collect();
        list.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out: Vec<&Sample> = Vec::new();
        for s in list {
            match out.last() {
                Some(prev) if prev.id == s.id => {
                    if *prev != s {
                        return Err(Error::Geometry(format!("conflicting records for sample {:?}", s.id)));
                    }
                }
                _ => out.push(s),
            }
        }
        Ok(out)
    }

    fn sample(&self, id: &str) -> Result<&Sample> {
        self.samples
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Geometry(format!("no sample {id:?}")))
    }
}

impl DirectionRecord {
    fn block(&self, r: usize) -> CMatrix {
        let lam = self
            .nabla_lambda_diff
            .as_ref()
            .map(|m| m.0.clone())
            .unwrap_or_else(|| CMatrix::zeros(r, r));
        curvature_defect_matrix(self.d_scal_diff, &lam)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C3C4 {
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    pub c3_sample: String,
    pub c4_sample: String,
}

/// Strictly better, or equal with a smaller id (samples arrive in id order,
/// so the first hit wins ties).
fn improves(candidate: f64, best: Option<f64>, larger: bool) -> bool {
    match best {
        None => true,
        Some(b) => {
            if larger {
                candidate > b
            } else {
                candidate < b
            }
        }
    }
}

/// `C_3 = -1/2 inf (s - lambda_max(H))`, `C_4 = 1/2 sup (s - lambda_min(H))`
/// with `s = (scal_X - scal_Y) / 8 pi` and `H = (Lambda_X - Lambda_Y) / 2 pi i`.
pub fn c3_c4(data: &GeometryData) -> Result<C3C4> {
    data.validate()?;
    let mut inf: Option<(f64, String)> = None;
    let mut sup: Option<(f64, String)> = None;
    for s in data.canonical_samples()? {
        let sd = (s.scal_x - s.scal_y) / (8.0 * PI);
        let h = over_two_pi_i(&(&s.lambda_rf_x.0 - &s.lambda_rf_y.0));
        let ev = hermitian_eigs(&h)?;
        let lo = sd - ev.last().copied().unwrap_or(0.0);
        let hi = sd - ev.first().copied().unwrap_or(0.0);
        if improves(lo, inf.as_ref().map(|x| x.0), false) {
            inf = Some((lo, s.id.clone()));
        }
        if improves(hi, sup.as_ref().map(|x| x.0), true) {
            sup = Some((hi, s.id.clone()));
        }
    }
    let (lo, lo_id) = inf.expect("validated non-empty");
    let (hi, hi_id) = sup.expect("validated non-empty");
    Ok(C3C4 {
        c3: -0.5 * lo,
        c4: 0.5 * hi,
        c3_sample: lo_id,
        c4_sample: hi_id,
    })
}

/// Minimum-norm solution of `a x = b` (columns of `b` solved together),
/// with the residual relative to `max(1, |b|)`.
fn least_squares(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<(DMatrix<C64>, f64, usize)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = SPAN_TOL * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let x = svd
        .solve(b, eps)
        .map_err(|e| Error::Geometry(format!("least squares failed: {e}")))?;
    let resid = (a * &x - b).norm() / b.norm().max(1.0);
    Ok((x, resid, rank))
}

fn level_records(s: &Sample, level: usize) -> Vec<&DirectionRecord> {
    s.normal_dirs.iter().filter(|d| d.level == level).collect()
}

/// Value of the level-`level` block map on the vector `v`, by expanding `v`
/// in the tabulated directions.
fn level_block(s: &Sample, level: usize, v: &[C64], r: usize) -> Result<CMatrix> {
    if v.iter().all(|c| c.norm() == 0.0) {
        return Ok(CMatrix::zeros(r, r));
    }
    let recs = level_records(s, level);
    if recs.is_empty() {
        return Err(Error::Geometry(format!(
            "sample {:?} tabulates no level-{level} directions",
            s.id
        )));
    }
    let d = v.len();
    let a = DMatrix::from_fn(d, recs.len(), |i, j| recs[j].vector[i]);
    let b = DMatrix::from_fn(d, 1, |i, _| v[i]);
    let (c, resid, _) = least_squares(&a, &b)?;
    if resid > SPAN_TOL {
        return Err(Error::Geometry(format!(
            "direction is outside the tabulated level-{level} span of sample {:?} (residual {resid:e})",
            s.id
        )));
    }
    let mut out = CMatrix::zeros(r, r);
    for (j, rec) in recs.iter().enumerate() {
        out += rec.block(r) * c[(j, 0)];
    }
    Ok(out)
}

fn check_direction(data: &GeometryData, direction: &Direction) -> Result<()> {
    let levels = data.intermediate_levels() + 1;
    if direction.len() != levels {
        return Err(Error::Geometry(format!(
            "direction has {} level blocks, the chain has {levels}",
            direction.len()
        )));
    }
    for (i, part) in direction.iter().enumerate() {
        if part.len() != data.level_dim(i + 1) {
            return Err(Error::Geometry(format!(
                "level-{} block has {} components, expected {}",
                i + 1,
                part.len(),
                data.level_dim(i + 1)
            )));
        }
    }
    Ok(())
}

/// `sum_{i <= r} [ (1/8 pi) d/dn_i (scal^{W_{i+1}} - scal^{W_i}) Id
///   - (1/2 pi i) nabla_{n_i} (Lambda^{W_{i+1}} - Lambda^{W_i}) ]` at one
/// sample; the top level contributes nothing.
pub fn tower_dp3_at(data: &GeometryData, sample_id: &str, direction: &Direction) -> Result<CMatrix> {
    data.validate()?;
    check_direction(data, direction)?;
    let s = data.sample(sample_id)?;
    let r = data.fiber_rank;
    let mut out = CMatrix::zeros(r, r);
    for level in 1..=data.intermediate_levels() {
        out += level_block(s, level, &direction[level - 1], r)?;
    }
    Ok(out)
}

/// Single-intermediate-level form of [`tower_dp3_at`].
pub fn dp3_at(data: &GeometryData, sample_id: &str, direction: &Direction) -> Result<CMatrix> {
    if data.intermediate_levels() != 1 {
        return Err(Error::Geometry(format!(
            "dp3 needs a chain [m, l, n], got {:?}",
            data.dims
        )));
    }
    tower_dp3_at(data, sample_id, direction)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub sample: String,
    #[serde(with = "cmatrix")]
    pub value: CMatrix,
}

fn per_sample(
    data: &GeometryData,
    direction: &Direction,
    f: fn(&GeometryData, &str, &Direction) -> Result<CMatrix>,
) -> Result<Vec<SampleMatrix>> {
    data.canonical_samples()?
        .into_iter()
        .map(|s| {
            Ok(SampleMatrix {
                sample: s.id.clone(),
                value: f(data, &s.id, direction)?,
            })
        })
        .collect()
}

/// `[D_p]_3 . n` at every sample, in id order.
pub fn dp3(data: &GeometryData, direction: &Direction) -> Result<Vec<SampleMatrix>> {
    per_sample(data, direction, dp3_at)
}

pub fn tower_dp3(data: &GeometryData, direction: &Direction) -> Result<Vec<SampleMatrix>> {
    per_sample(data, direction, tower_dp3_at)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0 {
    #[serde(rename = "C0")]
    pub c0: f64,
    pub sample: String,
}

fn top_singular(m: &CMatrix) -> (f64, Vec<C64>, Vec<C64>) {
    let svd = m.clone().svd(true, true);
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let left = (0..m.nrows()).map(|i| u[(i, k)]).collect();
    let right = (0..m.ncols()).map(|j| vt[(k, j)].conj()).collect();
    (s, left, right)
}

/// `sup_{|n| = 1} |sum_k n_k A_k|_op`.
pub fn tensor_operator_norm(blocks: &[CMatrix]) -> f64 {
    let d = blocks.len();
    if d == 0 {
        return 0.0;
    }
    let r = blocks[0].nrows();
    if d == 1 {
        return top_singular(&blocks[0]).0;
    }
    if r == 1 {
        return blocks.iter().map(|b| b[(0, 0)].norm_sqr()).sum::<f64>().sqrt();
    }
    // Alternating maximization of |u^* (sum n_k A_k) v| from each basis
    // direction and from the Frobenius-optimal start.
    let mut starts: Vec<Vec<C64>> = (0..d)
        .map(|k| (0..d).map(|j| C64::new(if j == k { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let fro: Vec<C64> = blocks.iter().map(|b| C64::new(b.norm(), 0.0)).collect();
    let fn_ = fro.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if fn_ > 0.0 {
        starts.push(fro.iter().map(|c| c / fn_).collect());
    }
    let mut best: f64 = 0.0;
    for mut n in starts {
        let mut val = 0.0;
        for _ in 0..500 {
            let mut m = CMatrix::zeros(r, r);
            for (c, b) in n.iter().zip(blocks) {
                m += b * *c;
            }
            let (s, u, v) = top_singular(&m);
            let g: Vec<C64> = blocks
                .iter()
                .map(|b| {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..r {
                        for j in 0..r {
                            acc += u[i].conj() * b[(i, j)] * v[j];
                        }
                    }
                    acc.conj()
                })
                .collect();
            let gn = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let done = s - val <= 1e-15 * s.max(1.0);
            val = s.max(gn);
            if gn == 0.0 || done {
                break;
            }
            n = g.iter().map(|c| c / gn).collect();
        }
        best = best.max(val);
    }
    best
}

/// The level-1 block map `n -> M(n)` on the standard basis of
/// `N^{W_1 | Y}`; requires the tabulated directions to span.
pub fn level_one_blocks(data: &GeometryData, s: &Sample) -> Result<Vec<CMatrix>> {
    let r = data.fiber_rank;
    let d = data.level_dim(1);
    let recs = level_records(s, 1);
    if d == 0 {
        return Ok(Vec::new());
    }
    // rows: directions; M(dir_j) = sum_k dir_jk A_k
    if recs.is_empty() {
        return Err(Error::Geometry(format!("sample {:?} has no level-1 directions", s.id)));
    }
    let a = DMatrix::from_fn(recs.len(), d, |j, k| recs[j].vector[k]);
    let b = DMatrix::from_fn(recs.len(), r * r, |j, e| recs[j].block(r)[(e % r, e / r)]);
    let (x, resid, rank) = least_squares(&a, &b)?;
    if rank < d {
        return Err(Error::Geometry(format!(
            "sample {:?}: level-1 directions span {rank} of {d} dimensions",
            s.id
        )));
    }
    if resid > 1e-9 {
        return Err(Error::Geometry(format!(
            "sample {:?}: direction data is not linear (residual {resid:e})",
            s.id
        )));
    }
    Ok((0..d)
        .map(|k| CMatrix::from_fn(r, r, |i, j| x[(k, i + r * j)]))
        .collect())
}

/// `C_0 = pi^{-1/2} sup_y |M_y|`, the norm of `n -> M_y(n)` over unit
/// normal directions `n` of `N^{W|Y}`.
pub fn c0(data: &GeometryData) -> Result<C0> {
    data.validate()?;
    if data.intermediate_levels() == 0 {
        return Err(Error::Geometry("C0 needs an intermediate level".into()));
    }
    let mut best: Option<(f64, String)> = None;
    for s in data.canonical_samples()? {
        let v = tensor_operator_norm(&level_one_blocks(data, s)?);
        if improves(v, best.as_ref().map(|b| b.0), true) {
            best = Some((v, s.id.clone()));
        }
    }
    let (v, id) = best.expect("validated non-empty");
    Ok(C0 {
        c0: v / PI.sqrt(),
        sample: id,
    })
}
