//! Runs every applicable checker over a seeded corpus for one transform.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::corpus_element;
use crate::entropy::{check_hirschman_beckner, check_smooth_hb};
use crate::error::{QfaError, Result};
use crate::report::{GapReport, Theorem};
use crate::support::{check_l1_up, check_l2_up};
use crate::transforms::{validate_k_transform, KTransform, NormBudget, ValidationReport};
use crate::uncertainty::{check_donoho_stark, check_hausdorff_young, check_wigderson_pq, check_ww};
use crate::TAU_NUM;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QFA_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Smoothing levels for the support bounds; all pairs are checked.
    pub eps_grid: Vec<f64>,
    pub hausdorff_young_exponents: Vec<f64>,
    pub wigderson_pq_exponents: Vec<f64>,
    /// `(ε, η, p, q)` for the smoothed entropy bound.
    pub smooth_entropy: Vec<(f64, f64, f64, f64)>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
            tolerance: TAU_NUM,
            eps_grid: vec![0.0, 0.1, 0.5],
            hausdorff_young_exponents: vec![2.0, 4.0, f64::INFINITY],
            wigderson_pq_exponents: vec![2.0, 4.0, f64::INFINITY],
            smooth_entropy: vec![(0.1, 0.1, f64::INFINITY, f64::INFINITY), (0.1, 0.1, 2.0, 2.0), (0.5, 0.0, 2.0, 2.0)],
        }
    }
}

/// One evaluated inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub theorem: Theorem,
    pub transform: String,
    pub seed: u64,
    /// Corpus index, absent for the transform axioms.
    pub sample: Option<u64>,
    #[serde(with = "crate::report::json_float::map")]
    pub params: BTreeMap<String, f64>,
    #[serde(with = "crate::report::json_float")]
    pub lhs: f64,
    #[serde(with = "crate::report::json_float")]
    pub rhs: f64,
    #[serde(with = "crate::report::json_float")]
    pub gap: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub transform: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub validation: ValidationReport,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn min_gap(&self, theorem: Theorem) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.theorem == theorem)
            .map(|r| r.gap)
            .min_by(f64::total_cmp)
    }
}

fn fmt_param(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn record(f: &KTransform, seed: u64, sample: Option<u64>, tol: f64, r: GapReport) -> CheckRecord {
    let params: String = r
        .params
        .iter()
        .filter(|(k, _)| !matches!(k.as_str(), "k" | "lower_sum" | "certified"))
        .map(|(k, v)| format!("/{k}={}", fmt_param(*v)))
        .collect();
    let prefix = match sample {
        Some(i) => format!("{}/{i:06}", f.name()),
        None => format!("{}/axioms", f.name()),
    };
    CheckRecord {
        check_id: format!("{prefix}/{}{params}", r.theorem),
        theorem: r.theorem,
        transform: f.name().to_string(),
        seed,
        sample,
        passed: r.passes_at(tol),
        params: r.params,
        lhs: r.lhs,
        rhs: r.rhs,
        gap: r.gap,
    }
}

/// All checks on one corpus element.
pub fn sample_reports(f: &KTransform, x: &crate::AlgebraElement, config: &SuiteConfig) -> Result<Vec<GapReport>> {
    let mut out = vec![check_ww(f, x)?, check_donoho_stark(f, x)?];
    for &eps in &config.eps_grid {
        for &eta in &config.eps_grid {
            out.push(check_l1_up(f, x, eps, eta)?);
        }
    }
    if !f.kff_exact() {
        return Ok(out);
    }
    for &eps in &config.eps_grid {
        for &eta in &config.eps_grid {
            if eps + eta <= 1.0 {
                out.push(check_l2_up(f, x, eps, eta)?);
            }
        }
    }
    for &p in &config.hausdorff_young_exponents {
        out.push(check_hausdorff_young(f, x, p)?);
    }
    for &p in &config.wigderson_pq_exponents {
        out.push(check_wigderson_pq(f, x, p)?);
    }
    out.push(check_hirschman_beckner(f, x)?);
    for &(eps, eta, p, q) in &config.smooth_entropy {
        out.push(check_smooth_hb(f, x, eps, eta, p, q)?);
    }
    Ok(out)
}

fn run_with(f: &KTransform, config: &SuiteConfig) -> Result<SuiteReport> {
    if !(config.tolerance > 0.0) {
        return Err(QfaError::Precondition("tolerance must be positive".into()));
    }
    let validation = validate_k_transform(f, &NormBudget { seed: config.seed, ..NormBudget::default() });
    let mut records: Vec<CheckRecord> = validation
        .gap_reports()
        .into_iter()
        .map(|r| record(f, config.seed, None, config.tolerance, r))
        .collect();
    let per_sample: Vec<Vec<CheckRecord>> = (0..config.samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = corpus_element(f.domain(), config.seed, i);
            Ok(sample_reports(f, &x, config)?
                .into_iter()
                .map(|r| record(f, config.seed, Some(i), config.tolerance, r))
                .collect())
        })
        .collect::<Result<_>>()?;
    records.extend(per_sample.into_iter().flatten());
    records.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(SuiteReport {
        transform: f.name().to_string(),
        seed: config.seed,
        samples: config.samples,
        tolerance: config.tolerance,
        validation,
        records,
    })
}

/// Worker count from `QFA_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs the suite, in a pool capped by `QFA_THREADS` when set.
pub fn run_suite(f: &KTransform, config: &SuiteConfig) -> Result<SuiteReport> {
    match thread_cap() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| QfaError::Precondition(format!("thread pool: {e}")))?;
            pool.install(|| run_with(f, config))
        }
        None => run_with(f, config),
    }
}
