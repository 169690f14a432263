use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use prodnorm_core::games::{
    acceptance_probability, chsh_game, chsh_quantum_strategy, chsh_spec, classical_value, magic_square_game,
    magic_square_quantum_strategy, magic_square_spec, map_lb, ClassicalGame, ProverStrategy, VerifierSpec,
};
use prodnorm_core::norms::{product_norm_lb, product_norm_rank1, sandwich_bounds, trace_norm};
use prodnorm_core::sop::{diamond_lb, l1_norm_lb, sop_product_norm_lb, stability_scan, SopNormCertificate, Superoperator};
use prodnorm_core::{Bipartition, ComplexMatrix};

use crate::cli::{Builtin, GameCmd, Global, NormCmd, SopCmd, Split};
use crate::output::{fields, sig10, Report, View};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

fn split(s: &Split) -> Result<Bipartition> {
    Ok(Bipartition::new(s.d1, s.d2)?)
}

fn column(path: &Path) -> Result<ComplexMatrix> {
    let m: ComplexMatrix = read_json(path)?;
    if m.cols() != 1 {
        return Err(CliError::Input(format!("{} must hold a column vector, got {}x{}", path.display(), m.rows(), m.cols())));
    }
    Ok(m)
}

pub(crate) fn norm(cmd: &NormCmd, g: &Global) -> Result<Report> {
    match cmd {
        NormCmd::Trace { matrix } => {
            let a: ComplexMatrix = read_json(matrix)?;
            let value = trace_norm(&a)?;
            Ok(Report { json: json!({ "value": value }), view: fields([("trace norm", sig10(value))]) })
        }
        NormCmd::Product { matrix, split: s } => {
            let a: ComplexMatrix = read_json(matrix)?;
            let part = split(s)?;
            let (lower, upper) = sandwich_bounds(&a, part)?;
            let cert = product_norm_lb(&a, part, &g.seesaw())?;
            let json = json!({
                "value": cert.value,
                "lower": lower,
                "upper": upper,
                "converged": cert.converged,
                "iterations": cert.iterations,
                "certificate": to_value(&cert),
            });
            let view = fields([
                ("product norm >=", sig10(cert.value)),
                ("sandwich lower", sig10(lower)),
                ("sandwich upper", sig10(upper)),
                ("converged", cert.converged.to_string()),
                ("iterations", cert.iterations.to_string()),
                ("best restart", cert.restart_index.to_string()),
            ]);
            Ok(Report { json, view })
        }
        NormCmd::Rank1 { u, v, split: s } => {
            let value = product_norm_rank1(&column(u)?, &column(v)?, split(s)?)?;
            Ok(Report { json: json!({ "value": value }), view: fields([("product norm", sig10(value))]) })
        }
    }
}

fn certificate_report(label: &str, cert: &SopNormCertificate) -> Report {
    let json = json!({
        "value": cert.value,
        "converged": cert.converged,
        "iterations": cert.iterations,
        "certificate": to_value(cert),
    });
    let view = fields([
        (label, sig10(cert.value)),
        ("converged", cert.converged.to_string()),
        ("iterations", cert.iterations.to_string()),
        ("best restart", cert.restart_index.to_string()),
    ]);
    Report { json, view }
}

pub(crate) fn sop(cmd: &SopCmd, g: &Global) -> Result<Report> {
    let opts = g.seesaw();
    match cmd {
        SopCmd::L1 { sop } => {
            let t: Superoperator = read_json(sop)?;
            Ok(certificate_report("l1 norm >=", &l1_norm_lb(&t, &opts)?))
        }
        SopCmd::Diamond { sop } => {
            let t: Superoperator = read_json(sop)?;
            Ok(certificate_report("diamond norm >=", &diamond_lb(&t, &opts)?))
        }
        SopCmd::Product { sop } => {
            let t: Superoperator = read_json(sop)?;
            Ok(certificate_report("product norm >=", &sop_product_norm_lb(&t, &opts)?))
        }
        SopCmd::Stability { sop, ns } => {
            let t: Superoperator = read_json(sop)?;
            let report = stability_scan(&t, ns, &opts)?;
            let mut rows = vec![vec!["base".to_string(), sig10(report.base_value)]];
            rows.extend(report.entries.iter().map(|e| vec![e.n.to_string(), sig10(e.value)]));
            Ok(Report {
                json: to_value(&report),
                view: View::Table { headers: vec!["N".into(), "product norm >=".into()], rows },
            })
        }
    }
}

fn load_spec(path: &Path) -> Result<VerifierSpec> {
    let spec: VerifierSpec = read_json(path)?;
    spec.validate()?;
    Ok(spec)
}

pub(crate) fn game(cmd: &GameCmd, g: &Global) -> Result<Report> {
    match cmd {
        GameCmd::Value { spec, dp1, dp2, emit_strategy } => {
            let spec = load_spec(spec)?;
            let r = map_lb(&spec, *dp1, *dp2, &g.seesaw())?;
            if let Some(path) = emit_strategy {
                write_json(path, &r.strategy)?;
            }
            let view = fields([
                ("acceptance probability >=", sig10(r.probability)),
                ("norm value", sig10(r.norm_value)),
                ("converged", r.converged.to_string()),
                ("iterations", r.iterations.to_string()),
                ("best restart", r.restart_index.to_string()),
            ]);
            Ok(Report { json: to_value(&r), view })
        }
        GameCmd::Eval { spec, strategy } => {
            let spec = load_spec(spec)?;
            let s: ProverStrategy = read_json(strategy)?;
            let p = acceptance_probability(&spec, &s)?;
            Ok(Report { json: json!({ "probability": p }), view: fields([("acceptance probability", sig10(p))]) })
        }
        GameCmd::Classical { game } => {
            let game: ClassicalGame = read_json(game)?;
            let v = classical_value(&game)?;
            Ok(Report { json: json!({ "value": v }), view: fields([("classical value", sig10(v))]) })
        }
        GameCmd::Builtin { name, dp, emit_spec, emit_game, emit_strategy } => {
            let (label, game, spec, known) = match name {
                Builtin::Chsh => ("chsh", chsh_game(), chsh_spec(), chsh_quantum_strategy()),
                Builtin::MagicSquare => {
                    ("magicsquare", magic_square_game(), magic_square_spec()?, magic_square_quantum_strategy())
                }
            };
            for (path, value) in [
                (emit_spec, to_value(&spec)),
                (emit_game, to_value(&game)),
                (emit_strategy, to_value(&known)),
            ] {
                if let Some(p) = path {
                    write_json(p, &value)?;
                }
            }
            let classical = classical_value(&game)?;
            let entangled = acceptance_probability(&spec, &known)?;
            let mut json = json!({
                "game": label,
                "classicalValue": classical,
                "knownStrategy": { "dP": known.d_p1, "probability": entangled },
            });
            let mut items = vec![
                ("game".to_string(), label.to_string()),
                ("classical value".to_string(), sig10(classical)),
                (format!("known strategy (dP = {})", known.d_p1), sig10(entangled)),
            ];
            if let Some(d) = dp {
                let r = map_lb(&spec, *d, *d, &g.seesaw())?;
                json["optimized"] = json!({
                    "dP": d,
                    "probability": r.probability,
                    "converged": r.converged,
                    "iterations": r.iterations,
                });
                items.push((format!("optimized (dP = {d}) >="), sig10(r.probability)));
            }
            Ok(Report { json, view: View::Fields(items) })
        }
    }
}
