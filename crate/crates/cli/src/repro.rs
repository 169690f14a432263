//! Fixed table of reference cases, each checked against a known value.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use prodnorm_core::games::{
    acceptance_probability, chsh_game, chsh_spec, classical_value, magic_square_game, magic_square_quantum_strategy,
    magic_square_spec, map_lb, norm_consistency, VerifierSpec,
};
use prodnorm_core::linalg::{derive_seed, random_matrix, random_unitary};
use prodnorm_core::norms::{hj_product_bound, product_norm_lb, product_norm_rank1, sandwich_bounds, trace_norm};
use prodnorm_core::sop::{
    diamond_lb, l1_norm_lb, l1_norm_lb_with, stability_scan_with, transpose_sop, witness,
};
use prodnorm_core::{Bipartition, ComplexMatrix, SeesawOptions, C64};

use crate::cli::Global;
use crate::output::{sig10, Report, View};
use crate::{CliError, EXIT_OK, EXIT_REPRO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Equals,
    AtLeast,
    AtMost,
}

impl Comparison {
    pub fn holds(self, computed: f64, expected: f64, tol: f64) -> bool {
        match self {
            Comparison::Equals => (computed - expected).abs() <= tol,
            Comparison::AtLeast => computed >= expected - tol,
            Comparison::AtMost => computed <= expected + tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Equals => "=",
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReproResult {
    pub case_id: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    pub anchor: &'static str,
}

struct Check {
    row: &'static str,
    expected: f64,
    computed: f64,
    tolerance: f64,
    comparison: Comparison,
}

fn eq(row: &'static str, expected: f64, computed: f64, tolerance: f64) -> Check {
    Check { row, expected, computed, tolerance, comparison: Comparison::Equals }
}

fn at_least(row: &'static str, expected: f64, computed: f64, tolerance: f64) -> Check {
    Check { row, expected, computed, tolerance, comparison: Comparison::AtLeast }
}

fn at_most(row: &'static str, expected: f64, computed: f64, tolerance: f64) -> Check {
    Check { row, expected, computed, tolerance, comparison: Comparison::AtMost }
}

type CaseFn = fn(&SeesawOptions) -> prodnorm_core::Result<Vec<Check>>;

/// (group id, anchor, runner)
const CASES: [(&str, &str, CaseFn); 9] = [
    ("epr-product", "product norm: rank-one strictness example", epr_product),
    ("strict-sandwich", "product norm: sandwich strictness example", strict_sandwich),
    ("ancilla-trace", "trace norm: transpose non-stability example", ancilla_trace),
    ("transpose-l1", "l1 norm: transpose non-stability example", transpose_l1),
    ("transpose-product", "superoperator product norm: not-stable counterexample", transpose_product),
    ("trace-product", "trace of a product bound", trace_product),
    ("chsh", "CHSH game fixture", chsh),
    ("magic-square", "Magic Square game fixture", magic_square),
    ("norm-consistency", "MAP as a squared product norm", consistency),
];

fn part(d1: usize, d2: usize) -> prodnorm_core::Result<Bipartition> {
    Bipartition::new(d1, d2)
}

fn epr_product(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let p = part(2, 2)?;
    let s = FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let epr = ComplexMatrix::column(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]);
    let zero = ComplexMatrix::basis(4, 0);
    let exact = product_norm_rank1(&epr, &zero, p)?;
    let lb = product_norm_lb(&(&epr * &zero.adjoint()), p, opts)?;
    Ok(vec![eq("formula", FRAC_1_SQRT_2, exact, 1e-6), eq("seesaw", FRAC_1_SQRT_2, lb.value, 1e-6)])
}

fn strict_sandwich(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let p = part(2, 2)?;
    let a = &ComplexMatrix::basis(4, 0) * &ComplexMatrix::basis(4, 3).adjoint();
    let (lower, _) = sandwich_bounds(&a, p)?;
    let lb = product_norm_lb(&a, p, opts)?;
    Ok(vec![eq("product", 1.0, lb.value, 1e-6), eq("lower", 0.0, lower, 1e-12)])
}

fn ancilla_trace(_: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let mut a = ComplexMatrix::zeros(4, 4);
    for i in [0, 3] {
        for j in [0, 3] {
            a[(i, j)] = C64::new(1.0, 0.0);
        }
    }
    Ok(vec![eq("trace-norm", 2.0, trace_norm(&a)?, 1e-10)])
}

fn transpose_l1(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let t = transpose_sop(2, part(1, 2)?)?;
    let base = l1_norm_lb(&t, opts)?;
    let ext = t.tensor_identity_one_sided(2)?;
    let stab = l1_norm_lb_with(&ext, opts, &[witness::transpose_one_sided(2)])?;
    Ok(vec![eq("l1", 1.0, base.value, 1e-6), at_least("stabilized", 2.0, stab.value, 1e-6)])
}

fn transpose_product(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let p = part(2, 2)?;
    let t = transpose_sop(4, p)?;
    let scan = stability_scan_with(&t, &[2], opts, |n| witness::transpose_ancilla(p, n).into_iter().collect())?;
    let dia = diamond_lb(&t, opts)?;
    Ok(vec![
        at_most("base", 1.0, scan.base_value, 1e-6),
        at_least("stabilized", 4.0, scan.entries[0].value, 1e-5),
        eq("diamond", 4.0, dia.value, 1e-5),
    ])
}

fn trace_product(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let mut excess = f64::NEG_INFINITY;
    for (k, d) in [2, 3, 5].into_iter().flat_map(|d| std::iter::repeat_n(d, 50)).enumerate() {
        let k = k as u64;
        let b = random_matrix(d, d, derive_seed(opts.seed, 2 * k));
        let c = random_matrix(d, d, derive_seed(opts.seed, 2 * k + 1));
        let (lhs, rhs) = hj_product_bound(&b, &c)?;
        excess = excess.max(lhs - rhs);
    }
    // equality when both are diagonal in one basis with moduli sorted alike
    let mut gap: f64 = 0.0;
    for k in 0..30u64 {
        let d = [2, 3, 5][k as usize % 3];
        let seed = derive_seed(opts.seed ^ 0x7f, k);
        let w = random_unitary(d, derive_seed(seed, 0));
        let normal = |j: u64| {
            let raw = random_matrix(1, d, derive_seed(seed, j));
            let mut mods: Vec<f64> = raw.data().iter().map(|z| z.norm()).collect();
            mods.sort_by(|a, b| b.total_cmp(a));
            let phases = random_matrix(1, d, derive_seed(seed, j + 10));
            let diag: Vec<C64> = mods.iter().zip(phases.data()).map(|(m, z)| C64::from_polar(*m, z.arg())).collect();
            &(&w * &ComplexMatrix::diag(&diag)) * &w.adjoint()
        };
        let (lhs, rhs) = hj_product_bound(&normal(1), &normal(2))?;
        gap = gap.max((lhs - rhs).abs());
    }
    Ok(vec![at_most("max-excess", 0.0, excess, 1e-10), eq("tightness", 0.0, gap, 1e-10)])
}

fn chsh(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let classical = classical_value(&chsh_game())?;
    let q = map_lb(&chsh_spec(), 2, 2, opts)?;
    Ok(vec![eq("classical", 0.75, classical, 1e-12), at_least("entangled", 0.8536, q.probability, 1e-3)])
}

fn magic_square(_: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let p = acceptance_probability(&magic_square_spec()?, &magic_square_quantum_strategy())?;
    let classical = classical_value(&magic_square_game())?;
    Ok(vec![eq("strategy", 1.0, p, 1e-9), eq("classical", 8.0 / 9.0, classical, 1e-12)])
}

fn consistency(opts: &SeesawOptions) -> prodnorm_core::Result<Vec<Check>> {
    let spec = VerifierSpec::random(2, 2, 2, derive_seed(opts.seed, 9))?;
    let nc = norm_consistency(&spec, 1, opts)?;
    Ok(vec![
        at_most("gap", 0.0, nc.conversion_gap(), 1e-6),
        eq("map-vs-norm", 0.0, (nc.map_value - nc.norm_squared).abs(), 1e-6),
    ])
}

/// Runs every case whose group or row id matches `filter` (`all` matches everything).
pub fn run_cases(filter: &str, opts: &SeesawOptions, timings: bool) -> Result<Vec<ReproResult>, CliError> {
    let group_of = |id: &str| id.split('/').next().unwrap_or(id).to_string();
    let wanted = |g: &str| filter == "all" || filter == g || group_of(filter) == g;
    if !CASES.iter().any(|(g, _, _)| wanted(g)) {
        let known: Vec<&str> = CASES.iter().map(|c| c.0).collect();
        return Err(CliError::Input(format!("unknown case `{filter}`; known: all, {}", known.join(", "))));
    }
    let mut out = Vec::new();
    for (group, anchor, runner) in CASES.iter().filter(|(g, _, _)| wanted(g)) {
        let t0 = Instant::now();
        let checks = runner(opts)?;
        let ms = t0.elapsed().as_millis() as u64;
        for c in checks {
            let case_id = format!("{group}/{}", c.row);
            if filter.contains('/') && filter != case_id {
                continue;
            }
            out.push(ReproResult {
                passed: c.comparison.holds(c.computed, c.expected, c.tolerance),
                case_id,
                expected: c.expected,
                computed: c.computed,
                tolerance: c.tolerance,
                comparison: c.comparison,
                runtime_ms: timings.then_some(ms),
                anchor,
            });
        }
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("unknown case `{filter}`")));
    }
    Ok(out)
}

pub(crate) fn command(filter: &str, g: &Global) -> Result<(Report, i32), CliError> {
    let results = run_cases(filter, &g.seesaw(), g.timings)?;
    let all = results.iter().all(|r| r.passed);
    let mut headers: Vec<String> =
        ["case", "expected", "computed", "tolerance", "comparison", "passed"].map(String::from).into();
    if g.timings {
        headers.push("ms".into());
    }
    let rows = results
        .iter()
        .map(|r| {
            let mut row = vec![
                r.case_id.clone(),
                sig10(r.expected),
                sig10(r.computed),
                format!("{:e}", r.tolerance),
                r.comparison.symbol().to_string(),
                r.passed.to_string(),
            ];
            if let Some(ms) = r.runtime_ms {
                row.push(ms.to_string());
            }
            row
        })
        .collect();
    let json = json!({ "seed": g.seed, "passed": all, "results": results });
    Ok((Report { json, view: View::Table { headers, rows } }, if all { EXIT_OK } else { EXIT_REPRO }))
}
