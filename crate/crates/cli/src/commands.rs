use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use bargmann_core::geometry::Direction;
use bargmann_core::json::{
    kernel_from_json, kernel_to_json, matrix_to_json, points_from_json, symbol_from_json, symbol_to_json,
    to_canonical_string, vector_from_json,
};
use bargmann_core::model_operators::{toeplitz_oracle_check, LeadingValue};
use bargmann_core::selftest::{run_selftest, SelftestConfig};
use bargmann_core::{
    c0, c3_c4, check_composition, compose, dp3, flat_defect_checks, laplacian_eigencheck, plan, standard_points,
    toeplitz_leading, tower_dp3, Error, FockIndex, GeometryData, QuadGrid, ToeplitzKind,
};
use serde_json::{json, Value};

use crate::{Cli, Command, Which};

#[derive(Debug)]
pub enum Failure {
    /// Malformed input or usage.
    Input(String),
    /// A numerical procedure failed to produce a result.
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: malformed JSON: {e}", path.display())))
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(e.to_string())),
    }
}

fn emit_json(cli: &Cli, v: &Value) -> Result<(), Failure> {
    emit(cli, &to_canonical_string(v))
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Compose { left, right } => {
            let e1 = kernel_from_json(&read_json(left)?, cli.degree_cap)?;
            let e2 = kernel_from_json(&read_json(right)?, cli.degree_cap)?;
            let rule = plan(e1.kind(), e2.kind())?.rule;
            let out = compose(&e1, &e2)?;
            emit_json(cli, &json!({"schema": "compose/1", "rule": rule.id(), "result": kernel_to_json(&out)}))?;
            Ok(true)
        }
        Command::OracleCheck { left, right, points } => {
            let e1 = kernel_from_json(&read_json(left)?, cli.degree_cap)?;
            let e2 = kernel_from_json(&read_json(right)?, cli.degree_cap)?;
            let rule = plan(e1.kind(), e2.kind())?.rule;
            let sym = compose(&e1, &e2)?;
            let pts = match points {
                Some(p) => points_from_json(&read_json(p)?)?,
                None => standard_points(sym.kind().unprimed_dim(), sym.kind().primed_dim()),
            };
            let grid = cli
                .nodes
                .map(|k| QuadGrid::uniform(e1.kind().primed_dim(), k as usize, PI));
            let rep = check_composition(&sym, &e1, &e2, &pts, grid.as_ref(), cli.tol)?;
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["schema"] = json!("oracle/1");
            v["rule"] = json!(rule.id());
            emit_json(cli, &v)?;
            Ok(rep.pass)
        }
        Command::Spectrum { n, max_level } => spectrum(cli, *n, *max_level),
        Command::ToeplitzLeading { kind, symbol, no_check } => toeplitz(cli, *kind, symbol, *no_check),
        Command::Constants {
            geom,
            which,
            direction,
            csv,
        } => constants(cli, geom, *which, direction.as_deref(), *csv),
        Command::DefectCheck { n, l, m } => {
            let rep = flat_defect_checks(*n, *l, *m)?;
            let pass = rep.multiplicative <= cli.tol && rep.transitivity <= cli.tol;
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["schema"] = json!("defect/1");
            v["pass"] = json!(pass);
            emit_json(cli, &v)?;
            Ok(pass)
        }
        Command::Selftest { instances } => {
            let cfg = SelftestConfig {
                seed: cli.seed,
                tol: cli.tol,
                instances: *instances,
            };
            let results = run_selftest(&cfg);
            let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &results {
                println!("{:<width$}  {}  {}", r.name, if r.pass { "PASS" } else { "FAIL" }, r.detail);
            }
            let pass = results.iter().all(|r| r.pass);
            if let Some(path) = &cli.out {
                let checks: Vec<Value> = results
                    .iter()
                    .map(|r| json!({"name": r.name, "pass": r.pass, "detail": r.detail}))
                    .collect();
                let v = json!({"schema": "selftest/1", "seed": cli.seed, "checks": checks, "pass": pass});
                fs::write(path, to_canonical_string(&v)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(pass)
        }
    }
}

fn indices(n: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=max_total).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .filter(|w| w.iter().sum::<u32>() <= max_total)
            .collect();
    }
    out
}

fn spectrum(cli: &Cli, n: usize, max_level: u32) -> Outcome {
    let grid = cli.nodes.map(|k| QuadGrid::uniform(n, k as usize, PI));
    let mut states = Vec::new();
    let mut pass = true;
    for a in indices(n, max_level) {
        for b in indices(n, max_level) {
            let alpha = FockIndex(a.clone());
            let r = laplacian_eigencheck(&alpha, &FockIndex(b.clone()), grid.as_ref())?;
            let expected = 4.0 * PI * alpha.total() as f64;
            let ok = r.residual <= cli.tol && (r.eigenvalue - expected).abs() <= cli.tol * expected.max(1.0);
            pass &= ok;
            states.push(json!({
                "alpha": a,
                "beta": b,
                "eigenvalue": r.eigenvalue,
                "expected": expected,
                "residual": r.residual,
                "pass": ok,
            }));
        }
    }
    emit_json(cli, &json!({"schema": "spectrum/1", "n": n, "states": states, "pass": pass}))?;
    Ok(pass)
}

fn leading_json(v: &LeadingValue) -> Value {
    match v {
        LeadingValue::Matrix(m) => json!({"matrix": matrix_to_json(m)}),
        LeadingValue::Symbol(s) => json!({"symbol": symbol_to_json(s)}),
    }
}

fn toeplitz(cli: &Cli, kind: ToeplitzKind, symbol: &Path, no_check: bool) -> Outcome {
    let g = symbol_from_json(&read_json(symbol)?)?;
    let lead = toeplitz_leading(kind, &g)?;
    let orders: Vec<Value> = lead
        .orders
        .iter()
        .map(|(k, v)| json!({"order": k, "value": leading_json(v)}))
        .collect();
    let mut v = json!({"schema": "toeplitz/1", "kind": kind.name(), "orders": orders});
    let mut pass = true;
    if !no_check {
        let d = g.dims();
        let pts = match kind {
            ToeplitzKind::YY => standard_points(d.m, d.m),
            ToeplitzKind::XyEven | ToeplitzKind::XyOdd => standard_points(d.n, d.m),
            ToeplitzKind::YxEven | ToeplitzKind::YxOdd => standard_points(d.m, d.n),
        };
        let check = toeplitz_oracle_check(kind, &g, &pts, cli.tol)?;
        pass = check.pass;
        v["oracle"] = serde_json::to_value(&check).expect("report serializes");
        v["pass"] = json!(pass);
    }
    emit_json(cli, &v)?;
    Ok(pass)
}

fn parse_direction(text: &str) -> Result<Direction, Failure> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("--direction: malformed JSON: {e}")))?;
    let blocks = v
        .as_array()
        .ok_or_else(|| Failure::Input("--direction must be a list of level blocks".into()))?;
    blocks.iter().map(|b| Ok(vector_from_json(b)?)).collect()
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

fn constants(cli: &Cli, geom: &Path, which: Which, direction: Option<&str>, csv: bool) -> Outcome {
    let text = fs::read_to_string(geom).map_err(|e| Failure::Input(format!("{}: {e}", geom.display())))?;
    let data = GeometryData::from_json(&text)?;
    let scalars = |rows: Vec<(&str, f64, String)>| -> Result<String, Failure> {
        csv_text(
            &["constant", "value", "sample"],
            rows.into_iter().map(|(k, v, s)| vec![k.to_string(), format!("{v:e}"), s]).collect(),
        )
    };
    let (json_out, csv_out) = match which {
        Which::C3c4 => {
            let c = c3_c4(&data)?;
            let rows = vec![("C3", c.c3, c.c3_sample.clone()), ("C4", c.c4, c.c4_sample.clone())];
            (serde_json::to_value(&c).expect("serializes"), rows)
        }
        Which::C0 => {
            let c = c0(&data)?;
            let rows = vec![("C0", c.c0, c.sample.clone())];
            (serde_json::to_value(&c).expect("serializes"), rows)
        }
        Which::Dp3 | Which::Tower => {
            let dir = parse_direction(
                direction.ok_or_else(|| Failure::Input("--direction is required for dp3 and tower".into()))?,
            )?;
            let values = if which == Which::Dp3 { dp3(&data, &dir)? } else { tower_dp3(&data, &dir)? };
            if csv {
                let mut rows = Vec::new();
                for s in &values {
                    for i in 0..s.value.nrows() {
                        for j in 0..s.value.ncols() {
                            let c = s.value[(i, j)];
                            rows.push(vec![s.sample.clone(), i.to_string(), j.to_string(), format!("{:e}", c.re), format!("{:e}", c.im)]);
                        }
                    }
                }
                emit(cli, &csv_text(&["sample", "row", "col", "re", "im"], rows)?)?;
                return Ok(true);
            }
            let name = if which == Which::Dp3 { "dp3" } else { "tower" };
            let v = json!({"schema": "constants/1", "which": name, "values": values});
            emit_json(cli, &v)?;
            return Ok(true);
        }
    };
    if csv {
        emit(cli, &scalars(csv_out)?)?;
    } else {
        let mut v = json!({"schema": "constants/1", "which": if which == Which::C0 { "c0" } else { "c3c4" }});
        for (k, x) in json_out.as_object().expect("struct serializes to an object") {
            v[k] = x.clone();
        }
        emit_json(cli, &v)?;
    }
    Ok(true)
}
