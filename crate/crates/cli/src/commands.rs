use std::collections::BTreeMap;

use anyhow::anyhow;
use serde::Serialize;
use serde_json::json;

use qfa_core::corpus::corpus_element;
use qfa_core::entropy::entropy_sweep;
use qfa_core::schwartz::{
    chirp_agreement_table, explore_image, explore_image_pq, mixture_curve, mixture_f_numeric, two_bump_f_bounds,
    BumpMixture, ChirpFunction, QuadratureSettings,
};
use qfa_core::suite::{run_suite, SuiteConfig};
use qfa_core::support::support_sweep;
use qfa_core::uncertainty::{boundary_disagreement, check_qft_ww, classify, k_function, regions_containing, QftNorms};
use qfa_core::{QfaError, TAU_NUM};

use crate::input;
use crate::output::{envelope, num, write_csv, write_json};
use crate::{Cli, Command, Family, Format, SchwartzAction};

/// Exit status of a completed run.
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn code(&self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FailureKind {
    /// Bad specification or input: exit 2.
    Malformed,
    /// Precondition, straddle or numerical failure: exit 1.
    Runtime,
}

impl FailureKind {
    pub fn code(self) -> u8 {
        match self {
            FailureKind::Malformed => 2,
            FailureKind::Runtime => 1,
        }
    }
}

pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

type Run<T> = std::result::Result<T, Failure>;

fn malformed<T>(r: anyhow::Result<T>) -> Run<T> {
    r.map_err(|error| Failure { kind: FailureKind::Malformed, error })
}

fn runtime<T, E: Into<anyhow::Error>>(r: std::result::Result<T, E>) -> Run<T> {
    r.map_err(|e| Failure { kind: FailureKind::Runtime, error: e.into() })
}

fn core<T>(r: qfa_core::Result<T>) -> Run<T> {
    r.map_err(|e| {
        let kind = match e {
            QfaError::Parse(_)
            | QfaError::InvalidShape(_)
            | QfaError::ShapeMismatch(_)
            | QfaError::InvalidTable(_)
            | QfaError::IrrepMismatch(_) => FailureKind::Malformed,
            _ => FailureKind::Runtime,
        };
        Failure { kind, error: e.into() }
    })
}

pub fn run(cli: &Cli) -> Run<Outcome> {
    let c = &cli.common;
    let out = c.out.as_deref();
    match &cli.command {
        Command::Verify(args) => {
            let f = malformed(input::transform(args))?;
            let tolerance = c.tolerance.unwrap_or(TAU_NUM);
            if !(tolerance > 0.0) {
                return malformed(Err(anyhow!("tolerance must be positive")));
            }
            let config = SuiteConfig { samples: c.samples, seed: c.seed, tolerance, ..SuiteConfig::default() };
            let report = core(run_suite(&f, &config))?;
            let failed = report.failures().count();
            eprintln!("verify {}: {} checks, {} failed", report.transform, report.records.len(), failed);
            match c.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let body = json!({
                        "transform": report.transform,
                        "samples": report.samples,
                        "tolerance": report.tolerance,
                        "validation": report.validation,
                        "summary": { "checks": report.records.len(), "failed": failed, "passed": report.passed() },
                        "records": report.records,
                    });
                    runtime(write_json(out, &envelope("verify", c.seed, body)))?;
                }
                Format::Csv => {
                    let rows: Vec<VerifyRow> = report.records.iter().map(VerifyRow::from).collect();
                    runtime(write_csv(out, &rows))?;
                }
            }
            Ok(Outcome::from_pass(report.passed()))
        }
        Command::Support { element, p, grid } => {
            let x = malformed(input::element(element))?;
            let p = malformed(input::number(p))?;
            let grid = malformed(input::numbers(grid))?;
            let rows: Vec<SupportRow> = core(support_sweep(&x, p, &grid))?
                .into_iter()
                .map(|r| SupportRow {
                    eps: r.eps,
                    s_value: r.value,
                    exact: r.exact,
                    lower_certificate: r.lower_certificate,
                    f1: r.f1 + 0.0,
                    f3: r.f3 + 0.0,
                })
                .collect();
            emit_rows(c, "support", json!({ "p": num(p) }), &rows)?;
            Ok(Outcome::Pass)
        }
        Command::Entropy { element, p, eps } => {
            let x = malformed(input::element(element))?;
            let ps = malformed(input::numbers(p))?;
            let epss = malformed(input::numbers(eps))?;
            let rows = core(entropy_sweep(&x, &ps, &epss))?;
            emit_rows(c, "entropy", json!({}), &rows)?;
            Ok(Outcome::Pass)
        }
        Command::Kfunction { delta, ip, iq, grid, norms, p, q } => kfunction(cli, *delta, ip, iq, *grid, norms, p, q),
        Command::Schwartz { action } => schwartz(cli, action),
        Command::Corpus(args) => {
            let f = malformed(input::transform(args))?;
            let shape = f.domain();
            let elements: Vec<_> = (0..c.samples as u64).map(|i| corpus_element(shape, c.seed, i)).collect();
            match c.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let body = json!({ "transform": f.name(), "samples": c.samples, "shape": shape, "elements": elements });
                    runtime(write_json(out, &envelope("corpus", c.seed, body)))?;
                }
                Format::Csv => {
                    let mut rows = Vec::new();
                    for (i, x) in elements.iter().enumerate() {
                        for (b, m) in x.blocks().iter().enumerate() {
                            for r in 0..m.nrows() {
                                for s in 0..m.ncols() {
                                    let z = m[(r, s)];
                                    rows.push(CorpusRow { index: i, block: b, row: r, col: s, re: z.re, im: z.im });
                                }
                            }
                        }
                    }
                    runtime(write_csv(out, &rows))?;
                }
            }
            Ok(Outcome::Pass)
        }
    }
}

fn emit_rows<T: Serialize>(c: &crate::Common, command: &str, extra: serde_json::Value, rows: &[T]) -> Run<()> {
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => runtime(write_csv(c.out.as_deref(), rows)),
        Format::Json => {
            let mut body = extra;
            body["rows"] = runtime(serde_json::to_value(rows))?;
            runtime(write_json(c.out.as_deref(), &envelope(command, c.seed, body)))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn kfunction(
    cli: &Cli,
    delta: f64,
    ip: &Option<String>,
    iq: &Option<String>,
    grid: usize,
    norms: &Option<String>,
    p: &Option<String>,
    q: &Option<String>,
) -> Run<Outcome> {
    let c = &cli.common;
    if !(delta > 0.0) {
        return malformed(Err(anyhow!("delta must be positive")));
    }
    let mut pass = true;
    let mut extra = json!({ "delta": delta });
    if let Some(norms) = norms {
        let v = malformed(input::numbers(norms))?;
        let [x_p, x_q, fx_p, fx_q] = v[..] else {
            return malformed(Err(anyhow!("--norms needs four values x_p,x_q,Fx_p,Fx_q")));
        };
        let p = malformed(input::number(p.as_deref().unwrap_or_default()))?;
        let q = malformed(input::number(q.as_deref().unwrap_or_default()))?;
        let r = core(check_qft_ww(delta, p, q, &QftNorms { x_p, x_q, fx_p, fx_q }))?;
        pass = r.passes_at(c.tolerance.unwrap_or(TAU_NUM));
        eprintln!("norm-product check: lhs {} rhs {} gap {}", r.lhs, r.rhs, r.gap);
        extra["check"] = runtime(serde_json::to_value(&r))?;
    }
    let points: Vec<(f64, f64)> = match (ip, iq) {
        (Some(a), Some(b)) => vec![(malformed(input::number(a))?, malformed(input::number(b))?)],
        _ => {
            if grid == 0 {
                return malformed(Err(anyhow!("grid must be at least 1")));
            }
            let n = grid as f64;
            (0..=grid).flat_map(|i| (0..=grid).map(move |j| (i as f64 / n, j as f64 / n))).collect()
        }
    };
    if points.iter().any(|&(a, b)| !(a >= 0.0 && b >= 0.0)) {
        return malformed(Err(anyhow!("1/p and 1/q must be nonnegative")));
    }
    let rows: Vec<KRow> = points
        .into_iter()
        .map(|(a, b)| KRow {
            ip: a,
            iq: b,
            region: serde_json::to_value(classify(a, b).region)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            regions: regions_containing(a, b).len(),
            value: k_function(delta, a, b),
            disagreement: boundary_disagreement(delta, a, b),
        })
        .collect();
    emit_rows(c, "kfunction", extra, &rows)?;
    Ok(Outcome::from_pass(pass))
}

fn schwartz(cli: &Cli, action: &SchwartzAction) -> Run<Outcome> {
    let c = &cli.common;
    let quad = QuadratureSettings::default();
    match action {
        SchwartzAction::Explore { q, p, target } => {
            let q = malformed(input::number(q))?;
            let p = malformed(input::number(p))?;
            let tol = c.tolerance.unwrap_or(1e-4);
            let r = if p == 2.0 {
                explore_image(q, *target, tol, &quad)
            } else {
                explore_image_pq(p, q, *target, tol, &quad)
            };
            let r = runtime(r)?;
            let within = (r.achieved - r.target).abs() <= tol;
            eprintln!("lambda {} achieved {} (target {})", r.lambda, r.achieved, r.target);
            let b = ChirpFunction::on_slice(r.a).map(|f| f.b()).unwrap_or(f64::NAN);
            match c.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let body = json!({
                        "p": num(r.p), "q": num(r.q), "target": r.target, "tolerance": tol,
                        "lambda": r.lambda, "achieved": r.achieved, "within_tolerance": within,
                        "a": r.a, "b": b, "c": r.c,
                        "chirp_value": r.chirp_value, "bump_value": r.bump_value,
                        "witness": r.witness,
                    });
                    runtime(write_json(c.out.as_deref(), &envelope("schwartz-explore", c.seed, body)))?;
                }
                Format::Csv => {
                    let row = ExploreRow { p: r.p, q: r.q, target: r.target, lambda: r.lambda, achieved: r.achieved, a: r.a, b, c: r.c };
                    runtime(write_csv(c.out.as_deref(), &[row]))?;
                }
            }
            Ok(Outcome::from_pass(within))
        }
        SchwartzAction::Sweep { family, p, q, a, c: cval, points } => {
            let p = malformed(input::number(p))?;
            let q = malformed(input::number(q))?;
            match family {
                Family::Chirp => {
                    let rows = core(chirp_agreement_table(&quad))?;
                    let worst = rows.iter().map(|r| r.max_rel_dev).fold(0.0, f64::max);
                    eprintln!("max relative closed-form/quadrature deviation {worst:e}");
                    emit_rows(c, "schwartz-sweep", json!({ "family": "chirp", "max_rel_dev": worst }), &rows)?;
                    Ok(Outcome::from_pass(worst < 1e-6))
                }
                Family::TwoBump => {
                    let mut rows = Vec::new();
                    let mut inside_all = true;
                    for j in 0..=12 {
                        let cc = 2f64.powi(j);
                        let (lo, hi) = core(two_bump_f_bounds(cc, p, q))?;
                        let value = core(BumpMixture::two_bump(cc).and_then(|g| mixture_f_numeric(&g, p, q, &quad)))?;
                        let inside = lo < value && value < hi;
                        inside_all &= inside;
                        rows.push(BumpRow { c: cc, lo, value, hi, inside });
                    }
                    emit_rows(c, "schwartz-sweep", json!({ "family": "two-bump", "p": num(p), "q": num(q) }), &rows)?;
                    Ok(Outcome::from_pass(inside_all))
                }
                Family::Curve => {
                    let f = core(ChirpFunction::on_slice(*a))?.to_mixture();
                    let g = core(BumpMixture::two_bump(*cval))?;
                    if *points < 2 {
                        return malformed(Err(anyhow!("need at least two points")));
                    }
                    let rows: Vec<CurveRow> = core(mixture_curve(&f, &g, p, q, *points, &quad))?
                        .into_iter()
                        .map(|(lambda, h)| CurveRow { lambda, h })
                        .collect();
                    emit_rows(
                        c,
                        "schwartz-sweep",
                        json!({ "family": "curve", "p": num(p), "q": num(q), "a": a, "c": cval }),
                        &rows,
                    )?;
                    Ok(Outcome::Pass)
                }
            }
        }
    }
}

#[derive(Serialize)]
struct VerifyRow {
    check_id: String,
    theorem: String,
    transform: String,
    seed: u64,
    sample: Option<u64>,
    params: String,
    lhs: f64,
    rhs: f64,
    gap: f64,
    passed: bool,
}

impl From<&qfa_core::suite::CheckRecord> for VerifyRow {
    fn from(r: &qfa_core::suite::CheckRecord) -> Self {
        let params: BTreeMap<_, _> = r.params.iter().collect();
        Self {
            check_id: r.check_id.clone(),
            theorem: r.theorem.to_string(),
            transform: r.transform.clone(),
            seed: r.seed,
            sample: r.sample,
            params: params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            passed: r.passed,
        }
    }
}

#[derive(Serialize)]
struct SupportRow {
    eps: f64,
    #[serde(rename = "S_value")]
    s_value: f64,
    exact: bool,
    lower_certificate: f64,
    f1: f64,
    f3: f64,
}

#[derive(Serialize)]
struct KRow {
    ip: f64,
    iq: f64,
    region: String,
    regions: usize,
    value: f64,
    disagreement: f64,
}

#[derive(Serialize)]
struct ExploreRow {
    p: f64,
    q: f64,
    target: f64,
    lambda: f64,
    achieved: f64,
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Serialize)]
struct BumpRow {
    c: f64,
    lo: f64,
    value: f64,
    hi: f64,
    inside: bool,
}

#[derive(Serialize)]
struct CurveRow {
    lambda: f64,
    h: f64,
}

#[derive(Serialize)]
struct CorpusRow {
    index: usize,
    block: usize,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}
