//! Von Neumann entropy of `|x|²`, smooth entropy intervals and the entropic
//! uncertainty checks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::svd::jacobi_svd;
use crate::algebra::{spectral_data, AlgebraElement, SpectralData, SpectralDecomposition, C64};
use crate::error::{QfaError, Result};
use crate::report::{GapReport, Theorem};
use crate::transforms::KTransform;

/// Number of truncation levels tried for the upper endpoint.
pub const TRUNCATION_GRID: usize = 64;

/// `f(t) = 4t log t + 2t`, the Lipschitz factor of `s ↦ s² log s²` on `[0, t]`.
pub fn lipschitz_factor(t: f64) -> f64 {
    4.0 * t * t.ln() + 2.0 * t
}

fn xlogx_sq(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        let s2 = s * s;
        s2 * s2.ln()
    }
}

/// `−Σ w λ² log λ²` over spectral data.
pub fn entropy_of_spectrum(data: &SpectralData) -> f64 {
    -data.pairs().iter().map(|p| p.weight * xlogx_sq(p.value)).sum::<f64>()
}

/// `H(|x|²) = −τ(|x|² log|x|²)`.
pub fn von_neumann_entropy(x: &AlgebraElement) -> f64 {
    entropy_of_spectrum(&spectral_data(x))
}

/// `d_1^{−1/p}`, the constant with `‖z‖_∞ ≤ d_1^{−1/p}‖z‖_p`.
fn norm_comparison(x: &AlgebraElement, p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        x.shape().min_projection_trace().powf(-1.0 / p)
    }
}

/// Enclosure of the smooth entropy `inf{H(|y|²) : ‖x−y‖_p ≤ ε}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyInterval {
    pub lower: f64,
    pub upper: f64,
    /// `f(t_used)·τ(I)·d_1^{−1/p}`; the lower endpoint is `H(|x|²)` minus
    /// this times `ε`.
    pub lipschitz_constant: f64,
    pub t_used: f64,
    /// Feasible `y` with `H(|y|²) = upper`.
    pub witness: AlgebraElement,
}

pub fn smooth_entropy_bounds(x: &AlgebraElement, p: f64, eps: f64) -> Result<EntropyInterval> {
    if !(p >= 1.0) {
        return Err(QfaError::Precondition(format!("p must be in [1, ∞], got {p}")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(QfaError::Precondition(format!("eps must be in [0, 1], got {eps}")));
    }
    let dec = SpectralDecomposition::new(x)?;
    let data = dec.spectral_data();
    let h = entropy_of_spectrum(&data);

    let r = norm_comparison(x, p);
    let t_used = (x.op_norm() + r * eps).max(1.0);
    let lipschitz_constant = lipschitz_factor(t_used) * x.shape().total_trace() * r;
    let lower = h - lipschitz_constant * eps;

    let pairs = data.pairs();
    let nonzero: Vec<f64> = pairs.iter().map(|q| q.value).filter(|&v| v > 0.0).collect();
    let mut levels = vec![0.0];
    if let (Some(&hi), Some(&lo)) = (nonzero.first(), nonzero.last()) {
        for i in 0..TRUNCATION_GRID {
            let s = i as f64 / (TRUNCATION_GRID - 1) as f64;
            levels.push(lo * (hi / lo).powf(s));
        }
        // the grid endpoints must be exact eigenvalues
        levels[1] = lo;
        levels[TRUNCATION_GRID] = hi;
    }

    let part_norm = |keep: &dyn Fn(f64) -> bool| {
        crate::algebra::element::weighted_p_norm(
            pairs.iter().filter(|q| keep(q.value)).map(|q| (q.value, q.weight)),
            p,
        )
    };
    let entropy_of = |t: f64, c: f64| {
        -pairs
            .iter()
            .filter(|q| q.value > t)
            .map(|q| q.weight * xlogx_sq(c * q.value))
            .sum::<f64>()
    };

    let mut best = (h, 0.0, 1.0);
    for &t in &levels {
        let removed = part_norm(&|v| v <= t);
        if removed > eps {
            continue;
        }
        let kept = part_norm(&|v| v > t);
        let slack = if kept == 0.0 {
            0.0
        } else if p.is_infinite() {
            eps / kept
        } else {
            (eps.powf(p) - removed.powf(p)).max(0.0).powf(1.0 / p) / kept
        };
        // stay strictly inside the ball despite rounding
        let slack = slack * (1.0 - 1e-12);
        // c ↦ H(c·y) rises then falls, so the minimum sits at an endpoint
        for c in [1.0, (1.0 - slack).max(0.0), 1.0 + slack] {
            let value = entropy_of(t, c);
            if value < best.0 {
                best = (value, t, c);
            }
        }
    }
    let (upper, t, c) = best;
    let coeffs: Vec<f64> = dec
        .pairs()
        .iter()
        .map(|q| if q.value > t { c } else { 0.0 })
        .collect();
    let witness = dec.rescaled(&coeffs);
    Ok(EntropyInterval {
        lower: lower.min(upper),
        upper,
        lipschitz_constant,
        t_used,
        witness,
    })
}

/// `f(t)τ(I)‖x−y‖ ≥ |H(|x|²) − H(|y|²)|` with `t = max(‖x‖, ‖y‖, 1)`.
pub fn lipschitz_gap(x: &AlgebraElement, y: &AlgebraElement) -> Result<GapReport> {
    x.same_shape(y)?;
    let t = x.op_norm().max(y.op_norm()).max(1.0);
    let dist = (x - y).op_norm();
    let lhs = lipschitz_factor(t) * x.shape().total_trace() * dist;
    let rhs = (von_neumann_entropy(x) - von_neumann_entropy(y)).abs();
    Ok(GapReport::new(Theorem::EntropyLipschitz, lhs, rhs).param("t", t))
}

/// Singular values of a square matrix, descending.
pub fn matrix_singular_values(a: &DMatrix<C64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(QfaError::ShapeMismatch("square matrix expected".into()));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(jacobi_svd(a)?.s)
}

/// `‖A−B‖ ≥ max_i |λ_i(|A|) − λ_i(|B|)|`.
pub fn eigenvalue_perturbation_gap(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<GapReport> {
    if a.shape() != b.shape() {
        return Err(QfaError::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let sa = matrix_singular_values(a)?;
    let sb = matrix_singular_values(b)?;
    let dist = matrix_singular_values(&(a - b))?.first().copied().unwrap_or(0.0);
    let shift = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(GapReport::new(Theorem::EigenvaluePerturbation, dist, shift))
}

fn exact_gram(f: &KTransform) -> Result<()> {
    if !f.kff_exact() {
        return Err(QfaError::Precondition("entropy bounds need F*F = kI".into()));
    }
    Ok(())
}

/// `H(|x|²)/‖x‖_2² + H(|Fx|²)/‖Fx‖_2² ≥ −log‖x‖_2² − log‖Fx‖_2² + log k`.
pub fn check_hirschman_beckner(f: &KTransform, x: &AlgebraElement) -> Result<GapReport> {
    exact_gram(f)?;
    let fx = f.apply(x)?;
    let (nx, nfx) = (x.p_norm(2.0).powi(2), fx.p_norm(2.0).powi(2));
    if nx == 0.0 {
        return Err(QfaError::ZeroElement("entropy bound needs x ≠ 0".into()));
    }
    let lhs = von_neumann_entropy(x) / nx + von_neumann_entropy(&fx) / nfx;
    let rhs = -nx.ln() - nfx.ln() + f.k().ln();
    Ok(GapReport::new(Theorem::HirschmanBeckner, lhs, rhs).param("k", f.k()))
}

/// Smoothed entropy sum against its lower bound. The left side is the
/// witness (upper) value of each smooth entropy, so a failure is a genuine
/// counterexample; `lower_sum` records the certified left-side enclosure.
pub fn check_smooth_hb(
    f: &KTransform,
    x: &AlgebraElement,
    eps: f64,
    eta: f64,
    p: f64,
    q: f64,
) -> Result<GapReport> {
    exact_gram(f)?;
    let fx = f.apply(x)?;
    let (nx, nfx) = (x.p_norm(2.0).powi(2), fx.p_norm(2.0).powi(2));
    if nx == 0.0 {
        return Err(QfaError::ZeroElement("entropy bound needs x ≠ 0".into()));
    }
    let bx = smooth_entropy_bounds(x, p, eps)?;
    let bf = smooth_entropy_bounds(&fx, q, eta)?;
    let c1 = lipschitz_factor(x.op_norm() + 1.0);
    let c2 = lipschitz_factor(fx.op_norm() + 1.0);
    let corr_x = c1 / nx * norm_comparison(x, p) * x.shape().total_trace() * eps;
    let corr_f = c2 / nfx * norm_comparison(&fx, q) * fx.shape().total_trace() * eta;
    let rhs = -nx.ln() - nfx.ln() + f.k().ln() - corr_x - corr_f;
    let lhs = bx.upper / nx + bf.upper / nfx;
    Ok(GapReport::new(Theorem::SmoothHirschmanBeckner, lhs, rhs)
        .param("eps", eps)
        .param("eta", eta)
        .param("p", p)
        .param("q", q)
        .param("k", f.k())
        .param("lower_sum", bx.lower / nx + bf.lower / nfx))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySweepRow {
    pub eps: f64,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub lipschitz_constant: f64,
}

pub fn entropy_sweep(x: &AlgebraElement, ps: &[f64], epss: &[f64]) -> Result<Vec<EntropySweepRow>> {
    let mut rows = Vec::with_capacity(ps.len() * epss.len());
    for &p in ps {
        for &eps in epss {
            let b = smooth_entropy_bounds(x, p, eps)?;
            rows.push(EntropySweepRow {
                eps,
                p,
                lower: b.lower,
                upper: b.upper,
                lipschitz_constant: b.lipschitz_constant,
            });
        }
    }
    Ok(rows)
}
