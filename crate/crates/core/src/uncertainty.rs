//! Norm-product uncertainty checks and the piecewise norm function
//! `K(1/p, 1/q)` of the two-box Fourier transform.

use serde::{Deserialize, Serialize};

use crate::algebra::{support, AlgebraElement};
use crate::error::{QfaError, Result};
use crate::report::{GapReport, Theorem};
use crate::transforms::KTransform;

/// `1/p` with `1/∞ = 0`.
pub fn reciprocal(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Hölder conjugate of `p ≥ 1`, with `1 ↔ ∞`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn nonzero(x: &AlgebraElement) -> Result<()> {
    if x.max_abs_entry() == 0.0 {
        return Err(QfaError::ZeroElement("uncertainty checks need x ≠ 0".into()));
    }
    Ok(())
}

fn exact_gram(f: &KTransform) -> Result<()> {
    if !f.kff_exact() {
        return Err(QfaError::Precondition("this bound needs F*F = kI".into()));
    }
    Ok(())
}

fn exponent_at_least_two(p: f64) -> Result<()> {
    if !(p >= 2.0) {
        return Err(QfaError::Precondition(format!("exponent must be in [2, ∞], got {p}")));
    }
    Ok(())
}

/// `‖x‖_1‖Fx‖_1 ≥ k‖x‖_∞‖Fx‖_∞`.
pub fn check_ww(f: &KTransform, x: &AlgebraElement) -> Result<GapReport> {
    nonzero(x)?;
    let fx = f.apply(x)?;
    let lhs = x.p_norm(1.0) * fx.p_norm(1.0);
    let rhs = f.k() * x.op_norm() * fx.op_norm();
    Ok(GapReport::new(Theorem::WigdersonWigderson, lhs, rhs).param("k", f.k()))
}

/// `S(x)S(Fx) ≥ k`.
pub fn check_donoho_stark(f: &KTransform, x: &AlgebraElement) -> Result<GapReport> {
    nonzero(x)?;
    let fx = f.apply(x)?;
    Ok(GapReport::new(Theorem::DonohoStark, support(x) * support(&fx), f.k()).param("k", f.k()))
}

/// `‖Fx‖_p ≤ k^{1/p}‖x‖_q` for `p ∈ [2, ∞]`, `1/p + 1/q = 1`.
pub fn check_hausdorff_young(f: &KTransform, x: &AlgebraElement, p: f64) -> Result<GapReport> {
    exact_gram(f)?;
    exponent_at_least_two(p)?;
    let q = conjugate(p);
    let fx = f.apply(x)?;
    let lhs = f.k().powf(reciprocal(p)) * x.p_norm(q);
    Ok(GapReport::new(Theorem::HausdorffYoung, lhs, fx.p_norm(p))
        .param("p", p)
        .param("k", f.k()))
}

/// `‖x‖_q‖Fx‖_q ≥ k^{1−2/p}‖x‖_p‖Fx‖_p` for `p ∈ [2, ∞]`.
pub fn check_wigderson_pq(f: &KTransform, x: &AlgebraElement, p: f64) -> Result<GapReport> {
    exact_gram(f)?;
    exponent_at_least_two(p)?;
    let q = conjugate(p);
    let fx = f.apply(x)?;
    let lhs = x.p_norm(q) * fx.p_norm(q);
    let rhs = f.k().powf(1.0 - 2.0 * reciprocal(p)) * x.p_norm(p) * fx.p_norm(p);
    Ok(GapReport::new(Theorem::WigdersonPq, lhs, rhs)
        .param("p", p)
        .param("k", f.k()))
}

/// Hausdorff–Young in log form along the conjugate pairs `(q', q)`:
/// `log‖Fx‖_q − log‖x‖_{q'} − (1/q)log k`, which is `≤ 0` and vanishes at
/// `q = 2`.
pub fn riesz_thorin_profile(f: &KTransform, x: &AlgebraElement, qs: &[f64]) -> Result<Vec<(f64, f64)>> {
    exact_gram(f)?;
    nonzero(x)?;
    let fx = f.apply(x)?;
    qs.iter()
        .map(|&q| {
            exponent_at_least_two(q)?;
            let v = fx.p_norm(q).ln() - x.p_norm(conjugate(q)).ln() - reciprocal(q) * f.k().ln();
            Ok((q, v))
        })
        .collect()
}

/// The three pieces of the first quadrant on which `K` has a single
/// formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KRegion {
    #[serde(rename = "R_F")]
    RF,
    #[serde(rename = "R_T")]
    RT,
    #[serde(rename = "R_TF")]
    RTF,
    #[serde(rename = "boundary")]
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KRegionPoint {
    pub ip: f64,
    pub iq: f64,
    pub region: KRegion,
}

/// Slack used when deciding membership of points on region boundaries.
const BOUNDARY_TOL: f64 = 1e-12;

/// The regions containing `(ip, iq)`, in the order `R_F`, `R_T`, `R_TF`.
pub fn regions_containing(ip: f64, iq: f64) -> Vec<KRegion> {
    let t = BOUNDARY_TOL;
    let mut out = Vec::with_capacity(3);
    if ip + iq <= 1.0 + t && iq <= 0.5 + t {
        out.push(KRegion::RF);
    }
    if ip + iq >= 1.0 - t && ip >= 0.5 - t {
        out.push(KRegion::RT);
    }
    if ip <= 0.5 + t && iq >= 0.5 - t {
        out.push(KRegion::RTF);
    }
    out
}

pub fn classify(ip: f64, iq: f64) -> KRegionPoint {
    assert!(ip >= 0.0 && iq >= 0.0, "K is defined on the closed first quadrant");
    let regions = regions_containing(ip, iq);
    let region = match regions.as_slice() {
        [] => unreachable!("the three regions cover the first quadrant"),
        [single] => *single,
        _ => KRegion::Boundary,
    };
    KRegionPoint { ip, iq, region }
}

/// Value of the formula attached to `region` (not checking membership).
pub fn k_formula(delta: f64, region: KRegion, ip: f64, iq: f64) -> f64 {
    let exponent = match region {
        KRegion::RF | KRegion::Boundary => 1.0 - 2.0 * ip,
        KRegion::RT => 2.0 * iq - 1.0,
        KRegion::RTF => 2.0 * iq - 2.0 * ip,
    };
    delta.powf(exponent)
}

/// `K(1/p, 1/q)`. On boundaries the first applicable formula is used.
pub fn k_function(delta: f64, ip: f64, iq: f64) -> f64 {
    assert!(delta > 0.0, "delta must be positive");
    let regions = regions_containing(ip, iq);
    let first = *regions.first().expect("the three regions cover the first quadrant");
    k_formula(delta, first, ip, iq)
}

/// Largest disagreement among the formulas applicable at `(ip, iq)`.
pub fn boundary_disagreement(delta: f64, ip: f64, iq: f64) -> f64 {
    let values: Vec<f64> = regions_containing(ip, iq)
        .into_iter()
        .map(|r| k_formula(delta, r, ip, iq))
        .collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Externally supplied norms of a two-box `x` and its Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QftNorms {
    pub x_p: f64,
    pub x_q: f64,
    pub fx_p: f64,
    pub fx_q: f64,
}

/// `‖x‖_q‖Fx‖_q ≥ K(1/q,1/p)^{−2}‖x‖_p‖Fx‖_p` from user-supplied norms.
pub fn check_qft_ww(delta: f64, p: f64, q: f64, norms: &QftNorms) -> Result<GapReport> {
    let all = [norms.x_p, norms.x_q, norms.fx_p, norms.fx_q];
    if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(QfaError::Precondition("norm values must be positive".into()));
    }
    if !(delta > 0.0) || !(p > 0.0) || !(q > 0.0) {
        return Err(QfaError::Precondition("delta, p and q must be positive".into()));
    }
    let k = k_function(delta, reciprocal(q), reciprocal(p));
    let lhs = norms.x_q * norms.fx_q;
    let rhs = k.powi(-2) * norms.x_p * norms.fx_p;
    Ok(GapReport::new(Theorem::FourierKFunction, lhs, rhs)
        .param("delta", delta)
        .param("p", p)
        .param("q", q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{dft_transform, parse_builtin};
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> AlgebraElement {
        AlgebraElement::real_vector(x)
    }

    #[test]
    fn ww_examples() {
        let r = check_ww(&dft_transform(4), &v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 4.0));
        let r = check_ww(&dft_transform(2), &v(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(r.lhs, 4.0, epsilon = 1e-14);
        assert_relative_eq!(r.rhs, 4.0, epsilon = 1e-14);
        let x = v(&[0.3, -1.0, 2.0]);
        let f = dft_transform(3);
        let a = check_ww(&f, &x).unwrap();
        let b = check_ww(&f, &(&x * 2.5)).unwrap();
        assert_relative_eq!(b.gap, 2.5 * 2.5 * a.gap, max_relative = 1e-12);
        assert_eq!(a.passed, b.passed);
        assert!(check_ww(&f, &v(&[0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn donoho_stark_examples() {
        let f = dft_transform(4);
        assert_eq!(check_donoho_stark(&f, &v(&[1.0, 0.0, 0.0, 0.0])).unwrap().gap, 0.0);
        assert_eq!(check_donoho_stark(&f, &v(&[1.0, 1.0, 1.0, 1.0])).unwrap().gap, 0.0);
        let g = parse_builtin("group:s3").unwrap();
        let e = v(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = check_donoho_stark(&g, &e).unwrap();
        assert_eq!((r.lhs, r.rhs), (6.0, 6.0));
    }

    #[test]
    fn hausdorff_young_examples() {
        let f = dft_transform(4);
        let e0 = v(&[1.0, 0.0, 0.0, 0.0]);
        for p in [2.0, 4.0, f64::INFINITY] {
            assert!(check_hausdorff_young(&f, &e0, p).unwrap().gap.abs() < 1e-12);
        }
        let x = v(&[0.2, -1.0, 0.5, 3.0]);
        let r = check_hausdorff_young(&f, &x, 2.0).unwrap();
        assert!(r.gap.abs() < 1e-12);
        let r = check_hausdorff_young(&f, &x, f64::INFINITY).unwrap();
        assert_relative_eq!(r.lhs, x.p_norm(1.0));
        assert!(check_hausdorff_young(&f, &x, 1.5).is_err());
    }

    #[test]
    fn wigderson_pq_examples() {
        let f = dft_transform(4);
        let e0 = v(&[1.0, 0.0, 0.0, 0.0]);
        let r = check_wigderson_pq(&f, &e0, 4.0).unwrap();
        assert_relative_eq!(r.lhs, 4f64.powf(0.75), epsilon = 1e-12);
        assert!(r.gap.abs() < 1e-12);
        let x = v(&[0.2, -1.0, 0.5, 3.0]);
        let r = check_wigderson_pq(&f, &x, 2.0).unwrap();
        assert_relative_eq!(r.lhs, r.rhs, max_relative = 1e-14);
        let inf = check_wigderson_pq(&f, &x, f64::INFINITY).unwrap();
        let ww = check_ww(&f, &x).unwrap();
        assert_relative_eq!(inf.lhs, ww.lhs, max_relative = 1e-14);
        assert_relative_eq!(inf.rhs, ww.rhs, max_relative = 1e-14);
    }

    #[test]
    fn k_function_values() {
        assert_relative_eq!(k_function(2.0, 1.0, 0.0), 0.5);
        assert_relative_eq!(k_function(2.0, 0.0, 1.0), 4.0);
        for d in [1.1, 2.0, 7.5] {
            assert_relative_eq!(k_function(d, 0.5, 0.5), 1.0);
        }
        assert_eq!(classify(0.2, 0.2).region, KRegion::RF);
        assert_eq!(classify(0.8, 0.8).region, KRegion::RT);
        assert_eq!(classify(0.1, 0.9).region, KRegion::RTF);
        assert_eq!(classify(1.0, 0.0).region, KRegion::Boundary);
        assert_eq!(classify(0.5, 2.0).region, KRegion::Boundary);
        // the R_T / R_TF edge is outside R_F
        assert_eq!(regions_containing(0.5, 2.0), vec![KRegion::RT, KRegion::RTF]);
        assert_relative_eq!(k_function(2.0, 0.5, 2.0), 8.0);
    }

    #[test]
    fn qft_calculator() {
        let ones = QftNorms { x_p: 1.0, x_q: 1.0, fx_p: 1.0, fx_q: 1.0 };
        assert_eq!(check_qft_ww(1.0, 3.0, 1.5, &ones).unwrap().gap, 0.0);
        for q in [1.0, 2.0, 3.0, f64::INFINITY] {
            assert!(check_qft_ww(2.0, q, q, &ones).unwrap().passed);
        }
        // dft(4) surrogate with x = e_0
        let norms = QftNorms { x_p: 1.0, x_q: 1.0, fx_p: 1.0, fx_q: 4.0 };
        assert!(check_qft_ww(2.0, f64::INFINITY, 1.0, &norms).unwrap().gap >= 0.0);
        assert!(check_qft_ww(2.0, 2.0, 2.0, &QftNorms { x_p: 0.0, ..ones }).is_err());
    }

    #[test]
    fn riesz_thorin_profile_is_nonpositive() {
        let f = parse_builtin("group:s3").unwrap();
        let x = crate::corpus::corpus_element(f.domain(), 4, 0);
        let prof = riesz_thorin_profile(&f, &x, &[2.0, 2.5, 3.0, 4.0, 8.0, f64::INFINITY]).unwrap();
        assert!(prof[0].1.abs() < 1e-12);
        assert!(prof.iter().all(|&(_, v)| v <= 1e-12));
    }
}
