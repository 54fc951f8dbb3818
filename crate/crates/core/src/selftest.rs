//! A compact run of the invariant suite, used by the command-line
//! `selftest`.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::composition::compose;
use crate::eigen::hermitian_eigs;
use crate::error::Result;
use crate::fock_oracle::{check_composition, laplacian_eigencheck, norm_estimate, standard_points, FockIndex, NormConfig};
use crate::geometry::{c0, c3_c4, GeometryData};
use crate::golden::{k_base_exact, ExactPoly, PiSeries, Q};
use crate::kernel::{kernel_eval, KernelKind};
use crate::model_operators::{
    flat_defect_suite, h_gp, lambda_eq, m_op, toeplitz_oracle_check, CutoffSpec, Symbol, ToeplitzKind,
};
use crate::poly::{Monomial, Parity, VarId, C64};
use crate::testing;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestConfig {
    pub seed: u64,
    pub tol: f64,
    /// Random instances per randomized check.
    pub instances: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            tol: 1e-9,
            instances: 60,
        }
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let t = Instant::now();
    let (pass, detail) = match f() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: name.into(),
        pass,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

fn parity_of_sum(a: Option<Parity>, b: Option<Parity>) -> Option<Parity> {
    match (a?, b?) {
        (x, y) if x == y => Some(Parity::Even),
        _ => Some(Parity::Odd),
    }
}

pub fn run_selftest(cfg: &SelftestConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(run("composition_vs_oracle", || {
        let mut rng = testing::rng(cfg.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.instances {
            let (_, e1, e2) = testing::composable_pair(&mut rng, 2, 3, 2)?;
            let sym = compose(&e1, &e2)?;
            let pts = standard_points(sym.kind().unprimed_dim(), sym.kind().primed_dim());
            let rep = check_composition(&sym, &e1, &e2, &pts, None, cfg.tol)?;
            worst = worst.max(rep.max_rel);
        }
        Ok((worst <= cfg.tol, format!("max_rel {worst:e} over {} pairs", cfg.instances)))
    }));

    out.push(run("exact_base_goldens", || {
        let b = ExactPoly::monomial(
            Monomial::from_exps([(VarId::z(1), 1), (VarId::zb(1), 1)]),
            PiSeries::rational(Q::from_integer(1)),
        );
        let coupled = k_base_exact(&b, 1, 1)?;
        let want = ExactPoly::monomial(
            Monomial::from_exps([(VarId::z(1), 1), (VarId::zbp(1), 1)]),
            PiSeries::rational(Q::from_integer(1)),
        )
        .add(&ExactPoly::monomial(Monomial::one(), PiSeries::term(Q::from_integer(1), 1)));
        let free = k_base_exact(&b, 1, 0)?;
        let want_free = ExactPoly::monomial(Monomial::one(), PiSeries::term(Q::from_integer(1), 1));
        Ok((coupled == want && free == want_free, "K_{1,1}[1, z zb], K_{1,0}[1, z zb]".into()))
    }));

    out.push(run("degree_and_parity", || {
        let mut rng = testing::rng(cfg.seed.wrapping_add(1));
        let mut bad = 0;
        for _ in 0..cfg.instances * 4 {
            let (_, e1, e2) = testing::composable_pair(&mut rng, 3, 4, 2)?;
            let c = compose(&e1, &e2)?;
            let (a1, a2, a3) = (e1.numerator(), e2.numerator(), c.numerator());
            if a3.degree() > a1.degree() + a2.degree() {
                bad += 1;
            }
            if let Some(p) = parity_of_sum(a1.parity(), a2.parity()) {
                if !a3.is_zero() && a3.parity() != Some(p) {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{bad} violations")))
    }));

    out.push(run("laplacian_eigenstates", || {
        let mut worst: f64 = 0.0;
        for a in 0..=2u32 {
            for b in 0..=2u32 {
                let r = laplacian_eigencheck(&FockIndex(vec![a, 1]), &FockIndex(vec![b, 0]), None)?;
                worst = worst.max(r.residual);
            }
        }
        Ok((worst <= 1e-9, format!("max residual {worst:e}")))
    }));

    out.push(run("flat_defects", || {
        let reps = flat_defect_suite(4)?;
        let worst = reps
            .iter()
            .map(|r| r.multiplicative.max(r.transitivity))
            .fold(0.0, f64::max);
        Ok((worst <= 1e-12, format!("max deviation {worst:e} over {} chains", reps.len())))
    }));

    out.push(run("hgp_leading_term", || {
        let g = Symbol::scalar_monomial(2, 1, &[0], &[1], C64::new(1.0, 0.0))?;
        let mut worst: f64 = 0.0;
        for p in [1, 4, 16] {
            let r = h_gp(&g, p, CutoffSpec::identity(), None)?;
            worst = worst.max((r.h2 - r.predicted).norm());
        }
        Ok((worst <= 1e-10, format!("max deviation {worst:e}")))
    }));

    out.push(run("norm_estimate", || {
        let g = Symbol::scalar_monomial(2, 1, &[0], &[1], C64::new(1.0, 0.0))?;
        let op = m_op(&g, 4, CutoffSpec::identity())?;
        let est = norm_estimate(op.as_operator(), 6, &NormConfig { seed: cfg.seed, ..NormConfig::default() })?;
        let want = 0.5 / PI.sqrt();
        let err = (est.norm - want).abs();
        Ok((err <= 1e-4, format!("norm {:.12} vs {want:.12}", est.norm)))
    }));

    out.push(run("leading_term_table", || {
        let one = C64::new(1.0, 0.0);
        let cases = [
            (ToeplitzKind::YY, 1, 1),
            (ToeplitzKind::XyEven, 2, 0),
            (ToeplitzKind::XyOdd, 2, 1),
            (ToeplitzKind::YxEven, 0, 2),
            (ToeplitzKind::YxOdd, 1, 2),
        ];
        let mut worst: f64 = 0.0;
        for (kind, a, b) in cases {
            let g = Symbol::scalar_monomial(2, 1, &[a], &[b], one)?;
            let pts = match kind {
                ToeplitzKind::YY => standard_points(1, 1),
                ToeplitzKind::XyEven | ToeplitzKind::XyOdd => standard_points(2, 1),
                ToeplitzKind::YxEven | ToeplitzKind::YxOdd => standard_points(1, 2),
            };
            worst = worst.max(toeplitz_oracle_check(kind, &g, &pts, 1e-8)?.max_rel());
        }
        Ok((worst <= 1e-8, format!("max_rel {worst:e}")))
    }));

    out.push(run("constants_goldens", || {
        let s = 2.5;
        let text = format!(
            r#"{{"schema":"geom/1","dims":[0,1,2],"fiber_rank":1,"samples":[
            {{"id":"y0","scal_X":{s},"scal_Y":0,"lambda_RF_X":[[[0,0]]],"lambda_RF_Y":[[[0,0]]],
              "normal_dirs":[{{"level":1,"vector":[[1,0]],"d_scal_diff":{d}}}]}}]}}"#,
            d = 8.0 * PI
        );
        let g = GeometryData::from_json(&text)?;
        let cc = c3_c4(&g)?;
        let e1 = (cc.c3 + s / (16.0 * PI)).abs().max((cc.c4 - s / (16.0 * PI)).abs());
        let e2 = (c0(&g)?.c0 - 1.0 / PI.sqrt()).abs();
        Ok((e1.max(e2) <= 1e-12, format!("C3/C4 error {e1:e}, C0 error {e2:e}")))
    }));

    out.push(run("extension_restriction_duality", || {
        let mut rng = testing::rng(cfg.seed.wrapping_add(2));
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.instances * 10 {
            let (n, m) = (3, 1);
            let pts = testing::points(&mut rng, m, n, 1);
            let (y, x) = &pts[0];
            let r = kernel_eval(KernelKind::Restriction { n, m }, y, x)?;
            let e = kernel_eval(KernelKind::Extension { n, m }, x, y)?;
            worst = worst.max((r - e.conj()).norm() / e.norm().max(1.0));
        }
        Ok((worst <= 1e-12, format!("max deviation {worst:e}")))
    }));

    out.push(run("lambda_positivity", || {
        let mut rng = testing::rng(cfg.seed.wrapping_add(3));
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.instances {
            let g = testing::symbol(&mut rng, 3, 1, 2, 2, 3)?;
            let ev = hermitian_eigs(&lambda_eq(&g.adjoint().mul(&g)?))?;
            worst = worst.min(ev[0]);
        }
        Ok((worst >= -1e-12, format!("smallest eigenvalue {worst:e}")))
    }));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let cfg = SelftestConfig {
            instances: 10,
            ..SelftestConfig::default()
        };
        for r in run_selftest(&cfg) {
            assert!(r.pass, "{}: {}", r.name, r.detail);
        }
    }
}
