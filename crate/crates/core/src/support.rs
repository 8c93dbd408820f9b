//! Smooth supports: the trace of the cheapest contraction `H` that keeps a
//! relative `p`-norm residual below `ε`, the related projection-based
//! variants, and the L¹/L² smooth-support uncertainty checks.

use serde::{Deserialize, Serialize};

use crate::algebra::element::weighted_p_norm;
use crate::algebra::{spectral_data, support as plain_support, AlgebraElement, SpectralData};
use crate::error::{QfaError, Result};
use crate::report::{GapReport, Theorem};
use crate::transforms::KTransform;
use crate::TAU_NUM;

const KKT_MAX_ITERATIONS: usize = 200;
const KKT_RELATIVE_RESIDUAL: f64 = 1e-12;
/// Largest number of range eigenvalues searched exhaustively by [`f_variants`].
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothSupportResult {
    pub value: f64,
    /// `true` when `value` is the exact infimum, otherwise an upper bound.
    pub exact: bool,
    pub lower_certificate: f64,
    /// Eigenvalues of the optimal `H`, aligned with the spectral data.
    pub witness_h: Vec<f64>,
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(QfaError::Precondition(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(QfaError::Precondition(format!("exponent must be at least 1, got {p}")));
    }
    Ok(())
}

/// Residual `Σ w_j ((1−h_j)λ_j)^p` (or `max_j (1−h_j)λ_j` for `p = ∞`) on
/// eigenvalues normalized by `λ_max`.
fn residual(scaled: &[(f64, f64)], h: &[f64], p: f64) -> f64 {
    let terms = scaled.iter().zip(h).map(|(&(l, w), &hj)| ((1.0 - hj) * l, w));
    if p.is_infinite() {
        terms.map(|(v, _)| v).fold(0.0, f64::max)
    } else {
        terms.map(|(v, w)| w * v.powf(p)).sum()
    }
}

/// `S_ε^p` over the commuting family generated by `|x*|`.
pub fn smooth_support(x: &AlgebraElement, p: f64, eps: f64) -> Result<SmoothSupportResult> {
    let spec = spectral_data(x);
    let mut out = smooth_support_spectral(&spec, p, eps)?;
    // in an abelian algebra every H is already diagonal
    out.exact |= x.shape().is_abelian();
    Ok(out)
}

/// [`smooth_support`] from spectral data alone; `exact` is set for `p = 2`.
pub fn smooth_support_spectral(spec: &SpectralData, p: f64, eps: f64) -> Result<SmoothSupportResult> {
    check_exponent(p)?;
    check_unit_interval("eps", eps)?;
    let pairs = spec.pairs();
    let lmax = spec.max_value();
    let norm_p = spec.p_norm(p);
    if lmax == 0.0 {
        if eps > 0.0 {
            return Err(QfaError::ZeroElement("smooth support needs ‖x‖_p > 0 when eps > 0".into()));
        }
        return Ok(SmoothSupportResult {
            value: 0.0,
            exact: true,
            lower_certificate: 0.0,
            witness_h: vec![0.0; pairs.len()],
        });
    }
    let eps = if eps * norm_p < TAU_NUM { 0.0 } else { eps };
    let range: Vec<bool> = (0..pairs.len()).map(|j| spec.in_range(j)).collect();
    // kernel coordinates never enter the objective, so they stay at h = 0
    let scaled: Vec<(f64, f64)> = pairs
        .iter()
        .zip(&range)
        .map(|(q, &r)| (if r { q.value / lmax } else { 0.0 }, q.weight))
        .collect();

    let h = if eps == 0.0 {
        range.iter().map(|&r| if r { 1.0 } else { 0.0 }).collect()
    } else if eps >= 1.0 {
        vec![0.0; pairs.len()]
    } else if p == 1.0 {
        solve_l1(&scaled, eps)
    } else if p.is_infinite() {
        scaled
            .iter()
            .map(|&(l, _)| if l > 0.0 { (1.0 - eps / l).max(0.0) } else { 0.0 })
            .collect()
    } else {
        solve_kkt(&scaled, p, eps)
    };

    let value = pairs.iter().zip(&h).map(|(q, hj)| q.weight * hj).sum();
    let lower_certificate = if p == 1.0 {
        (1.0 - eps) * spec.p_norm(1.0) / lmax
    } else {
        0.0
    };
    Ok(SmoothSupportResult {
        value,
        exact: p == 2.0,
        lower_certificate,
        witness_h: h,
    })
}

/// Fractional knapsack: release the smallest eigenvalues first.
fn solve_l1(scaled: &[(f64, f64)], eps: f64) -> Vec<f64> {
    let total: f64 = scaled.iter().map(|&(l, w)| w * l).sum();
    let mut budget = eps * total;
    let mut h: Vec<f64> = scaled.iter().map(|&(l, _)| if l > 0.0 { 1.0 } else { 0.0 }).collect();
    for j in (0..scaled.len()).rev() {
        let (l, w) = scaled[j];
        if l == 0.0 {
            continue;
        }
        let cost = w * l;
        let g = (budget / cost).min(1.0);
        h[j] = 1.0 - g;
        budget -= g * cost;
        if budget <= 0.0 {
            break;
        }
    }
    h
}

/// KKT water-filling for `1 < p < ∞`: `1 − h_j = min(1, ν·c_j)` with
/// `c_j = (p λ_j^p)^{−1/(p−1)}`, bisecting the residual in `ν`.
fn solve_kkt(scaled: &[(f64, f64)], p: f64, eps: f64) -> Vec<f64> {
    let total: f64 = scaled.iter().map(|&(l, w)| w * l.powf(p)).sum();
    let budget = eps.powf(p) * total;
    let c: Vec<f64> = scaled
        .iter()
        .map(|&(l, _)| if l > 0.0 { (-(p.ln() + p * l.ln()) / (p - 1.0)).exp() } else { 0.0 })
        .collect();
    let h_of = |nu: f64| -> Vec<f64> {
        scaled
            .iter()
            .zip(&c)
            .map(|(&(l, _), &cj)| if l > 0.0 { 1.0 - (nu * cj).min(1.0) } else { 0.0 })
            .collect()
    };
    let mut lo = 0.0;
    let mut hi = c.iter().filter(|&&cj| cj > 0.0).map(|cj| 1.0 / cj).fold(0.0, f64::max);
    let mut nu = hi;
    for _ in 0..KKT_MAX_ITERATIONS {
        nu = 0.5 * (lo + hi);
        let r = residual(scaled, &h_of(nu), p) - budget;
        if r <= 0.0 && -r <= KKT_RELATIVE_RESIDUAL * budget {
            break;
        }
        if r > 0.0 {
            hi = nu;
        } else {
            lo = nu;
        }
    }
    let mut h = h_of(nu);
    if residual(scaled, &h, p) > budget {
        h = h_of(lo);
    }
    // clamp toward h = 1 on the largest eigenvalues until feasible
    let mut j = 0;
    while residual(scaled, &h, p) > budget && j < scaled.len() {
        let (l, w) = scaled[j];
        if l > 0.0 {
            let rest = residual(scaled, &h, p) - w * ((1.0 - h[j]) * l).powf(p);
            let room = (budget - rest).max(0.0);
            let g = ((room / w).powf(1.0 / p) / l).min(1.0 - h[j]);
            h[j] = 1.0 - g;
        }
        j += 1;
    }
    h
}

/// `|supp_ε^p(x)|` on `ℂ^n` with counting measure: drop the smallest
/// entries while the dropped part stays within `ε‖x‖_p`.
pub fn ww_support_size(x: &AlgebraElement, p: f64, eps: f64) -> Result<usize> {
    let abs = counting_abs(x)?;
    check_exponent(p)?;
    check_unit_interval("eps", eps)?;
    let budget = eps * lp(&abs, p);
    let tol = TAU_NUM * lp(&abs, p);
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut dropped = 0;
    while dropped < sorted.len() && lp(&sorted[..=dropped], p) <= budget + tol {
        dropped += 1;
    }
    Ok(sorted.len() - dropped)
}

/// Exhaustive version of [`ww_support_size`] over all subsets (dim ≤ 20).
pub fn ww_support_size_exhaustive(x: &AlgebraElement, p: f64, eps: f64) -> Result<usize> {
    let abs = counting_abs(x)?;
    if abs.len() > EXHAUSTIVE_LIMIT {
        return Err(QfaError::Precondition(format!(
            "exhaustive search limited to {EXHAUSTIVE_LIMIT} coordinates"
        )));
    }
    let norm = lp(&abs, p);
    let budget = eps * norm + TAU_NUM * norm;
    let n = abs.len();
    let mut best = n;
    for mask in 0u32..(1 << n) {
        let kept = mask.count_ones() as usize;
        if kept >= best {
            continue;
        }
        let dropped: Vec<f64> = (0..n).filter(|j| mask & (1 << j) == 0).map(|j| abs[j]).collect();
        if lp(&dropped, p) <= budget {
            best = kept;
        }
    }
    Ok(best)
}

fn counting_abs(x: &AlgebraElement) -> Result<Vec<f64>> {
    if !x.shape().is_counting() {
        return Err(QfaError::Precondition(
            "support size is defined on abelian algebras with counting measure".into(),
        ));
    }
    Ok(x.values().expect("abelian").iter().map(|z| z.norm()).collect())
}

fn lp(v: &[f64], p: f64) -> f64 {
    weighted_p_norm(v.iter().map(|&a| (a, 1.0)), p)
}

/// The projection and approximation variants of smooth support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FVariants {
    /// Best support of a spectral truncation `y` with `‖x−y‖_p ≤ ε‖x‖_p`.
    pub f1: f64,
    /// Upper end of the interval reported for the contraction variant.
    pub f2: f64,
    /// Lower end of that interval, the smooth support value.
    pub f2_lower: f64,
    /// Best trace of a spectral projection `Q` of `|x*|` with
    /// `‖(I−Q)x‖_p ≤ ε‖x‖_p`.
    pub f3: f64,
    /// `true` when the subset search over eigenvalues was exhaustive.
    pub exhaustive: bool,
}

/// Computes the three variants. Both the truncation family and the
/// projection family reduce to choosing a subset `S` of eigenpairs to keep,
/// so `f1` and `f3` share one subset search; `f2` is known only to lie
/// between the smooth support and `f3`.
pub fn f_variants(x: &AlgebraElement, p: f64, eps: f64) -> Result<FVariants> {
    check_exponent(p)?;
    check_unit_interval("eps", eps)?;
    let spec = spectral_data(x);
    if spec.max_value() == 0.0 {
        if eps > 0.0 {
            return Err(QfaError::ZeroElement("support variants need x ≠ 0 when eps > 0".into()));
        }
        return Ok(FVariants {
            f1: 0.0,
            f2: 0.0,
            f2_lower: 0.0,
            f3: 0.0,
            exhaustive: true,
        });
    }
    let s = smooth_support(x, p, eps)?;
    let (f3, exhaustive) = best_spectral_subset(&spec, p, eps);
    let f3 = if eps * spec.p_norm(p) < TAU_NUM { plain_support(x) } else { f3 };
    Ok(FVariants {
        f1: f3,
        f2: f3,
        f2_lower: s.value.min(f3),
        f3,
        exhaustive,
    })
}

fn best_spectral_subset(spec: &SpectralData, p: f64, eps: f64) -> (f64, bool) {
    let lmax = spec.max_value();
    let range: Vec<(f64, f64)> = spec
        .pairs()
        .iter()
        .enumerate()
        .filter(|(j, _)| spec.in_range(*j))
        .map(|(_, q)| (q.value / lmax, q.weight))
        .collect();
    let norm = spec.p_norm(p) / lmax;
    let budget = eps * norm + TAU_NUM * norm;
    let dropped_norm = |dropped: &mut dyn Iterator<Item = (f64, f64)>| -> f64 {
        weighted_p_norm(dropped, p)
    };
    let m = range.len();
    if m <= EXHAUSTIVE_LIMIT {
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << m) {
            let kept: f64 = (0..m).filter(|j| mask & (1 << j) != 0).map(|j| range[j].1).sum();
            if kept >= best {
                continue;
            }
            let mut it = (0..m).filter(|j| mask & (1 << j) == 0).map(|j| range[j]);
            if dropped_norm(&mut it) <= budget {
                best = kept;
            }
        }
        (best, true)
    } else {
        // release smallest eigenvalues first
        let mut kept = m;
        while kept > 0 {
            let mut it = range[kept - 1..].iter().copied();
            if dropped_norm(&mut it) > budget {
                break;
            }
            kept -= 1;
        }
        (range[..kept].iter().map(|&(_, w)| w).sum(), false)
    }
}

/// `S_ε^1(x)·S_η^1(Fx) ≥ k(1−ε)(1−η)`.
pub fn check_l1_up(f: &KTransform, x: &AlgebraElement, eps: f64, eta: f64) -> Result<GapReport> {
    let fx = f.apply(x)?;
    let sx = smooth_support(x, 1.0, eps)?.value;
    let sfx = smooth_support(&fx, 1.0, eta)?.value;
    let rhs = f.k() * (1.0 - eps) * (1.0 - eta);
    Ok(GapReport::new(Theorem::L1SmoothSupport, sx * sfx, rhs)
        .param("eps", eps)
        .param("eta", eta)
        .param("k", f.k()))
}

/// `S_ε^2(x)·S_η^2(Fx) ≥ k(1−ε−η)²`, for `F*F = kI` and `ε + η ≤ 1`.
pub fn check_l2_up(f: &KTransform, x: &AlgebraElement, eps: f64, eta: f64) -> Result<GapReport> {
    if !f.kff_exact() {
        return Err(QfaError::Precondition("the L² bound needs F*F = kI".into()));
    }
    if eps + eta > 1.0 + 1e-12 {
        return Err(QfaError::Precondition(format!("eps + eta = {} exceeds 1", eps + eta)));
    }
    let fx = f.apply(x)?;
    let sx = smooth_support(x, 2.0, eps)?.value;
    let sfx = smooth_support(&fx, 2.0, eta)?.value;
    let rhs = f.k() * (1.0 - eps - eta).max(0.0).powi(2);
    Ok(GapReport::new(Theorem::L2SmoothSupport, sx * sfx, rhs)
        .param("eps", eps)
        .param("eta", eta)
        .param("k", f.k()))
}

/// One row of an ε-sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSweepRow {
    pub eps: f64,
    pub value: f64,
    pub exact: bool,
    pub lower_certificate: f64,
    pub f1: f64,
    pub f3: f64,
}

pub fn support_sweep(x: &AlgebraElement, p: f64, grid: &[f64]) -> Result<Vec<SupportSweepRow>> {
    grid.iter()
        .map(|&eps| {
            let s = smooth_support(x, p, eps)?;
            let f = f_variants(x, p, eps)?;
            Ok(SupportSweepRow {
                eps,
                value: s.value,
                exact: s.exact,
                lower_certificate: s.lower_certificate,
                f1: f.f1,
                f3: f.f3,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraShape, SpectralDecomposition, C64};
    use crate::corpus::sample_rng;
    use crate::transforms::{dft_transform, identity_transform};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> AlgebraElement {
        AlgebraElement::real_vector(x)
    }

    #[test]
    fn kkt_keeps_tiny_eigenvalues_released() {
        let spec = SpectralData::from_tuples(&[(2.977553100159957, 1.0), (0.00037624806590983025, 1.0)]).unwrap();
        for eps in [0.5, 0.9] {
            let r = smooth_support_spectral(&spec, 4.0, eps).unwrap();
            assert_eq!(r.witness_h[1], 0.0);
            assert_relative_eq!(r.value, 1.0 - eps, epsilon = 1e-9);
        }
    }

    #[test]
    fn two_point_example() {
        let x = v(&[1.0, 1.0]);
        for p in [1.0, 2.0] {
            let s = smooth_support(&x, p, 1.0 / 3.0).unwrap();
            assert_relative_eq!(s.value, 4.0 / 3.0, epsilon = 1e-12);
            assert!(s.exact);
            assert_eq!(ww_support_size(&x, p, 1.0 / 3.0).unwrap(), 2);
        }
        let f = f_variants(&x, 1.0, 1.0 / 3.0).unwrap();
        assert_eq!((f.f1, f.f2, f.f3), (2.0, 2.0, 2.0));
    }

    #[test]
    fn three_point_l1() {
        let s = smooth_support(&v(&[1.0, 1.0, 1.0]), 1.0, 1.0 / 3.0).unwrap();
        assert_relative_eq!(s.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn eps_zero_and_one() {
        let x = v(&[3.0, 0.0, -1.0, 0.5]);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert_eq!(smooth_support(&x, p, 0.0).unwrap().value, 3.0);
            assert_eq!(smooth_support(&x, p, 1.0).unwrap().value, 0.0);
            let f = f_variants(&x, p, 0.0).unwrap();
            assert_eq!((f.f1, f.f3), (3.0, 3.0));
        }
        assert_eq!(ww_support_size(&x, 2.0, 1.0).unwrap(), 0);
    }

    #[test]
    fn zero_element() {
        let z = v(&[0.0, 0.0]);
        assert_eq!(smooth_support(&z, 2.0, 0.0).unwrap().value, 0.0);
        assert!(matches!(smooth_support(&z, 2.0, 0.5), Err(QfaError::ZeroElement(_))));
        assert!(smooth_support(&v(&[1.0]), 2.0, 1.5).is_err());
        assert!(smooth_support(&v(&[1.0]), 0.5, 0.5).is_err());
    }

    #[test]
    fn ww_support_examples() {
        assert_eq!(ww_support_size(&v(&[2.0, 1.0, 1.0]), 1.0, 0.25).unwrap(), 2);
        assert_eq!(ww_support_size_exhaustive(&v(&[2.0, 1.0, 1.0]), 1.0, 0.25).unwrap(), 2);
        let shape = AlgebraShape::abelian(&[1.0, 2.0]).unwrap();
        let x = AlgebraElement::from_values(&shape, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(ww_support_size(&x, 1.0, 0.1).is_err());
    }

    #[test]
    fn infinity_clamp() {
        let s = smooth_support(&v(&[4.0, 2.0, 1.0]), f64::INFINITY, 0.5).unwrap();
        assert_eq!(s.witness_h, vec![0.5, 0.0, 0.0]);
        assert_relative_eq!(s.value, 0.5);
    }

    #[test]
    fn witness_matches_element_residual() {
        // nonabelian check: build H from the witness and measure ‖(I−H)x‖_p
        let shape = AlgebraShape::from_pairs(&[(2, 0.5), (3, 1.5)]).unwrap();
        for p in [1.0, 1.7, 2.0, 4.0, f64::INFINITY] {
            for i in 0..10 {
                let x = crate::corpus::random_element(&shape, &mut sample_rng(3, i));
                let eps = 0.3;
                let s = smooth_support(&x, p, eps).unwrap();
                let dec = SpectralDecomposition::new(&x).unwrap();
                let h = dec.functional_calculus(&s.witness_h);
                let rest = &AlgebraElement::identity(&shape) - &h;
                let res = (&rest * &x).p_norm(p);
                assert!(res <= eps * x.p_norm(p) + TAU_NUM, "p={p}: {res}");
                assert_relative_eq!(h.trace().re, s.value, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn l1_and_l2_examples() {
        let f = dft_transform(4);
        let e0 = v(&[1.0, 0.0, 0.0, 0.0]);
        let r = check_l1_up(&f, &e0, 0.0, 0.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 4.0));
        let r = check_l2_up(&f, &e0, 0.0, 0.0).unwrap();
        assert_eq!(r.gap, 0.0);

        let id = identity_transform(&AlgebraShape::counting(2));
        let x = v(&[1.0, 1.0]);
        let r = check_l1_up(&id, &x, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert_relative_eq!(r.lhs, 16.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(r.rhs, 4.0 / 9.0, epsilon = 1e-12);
        let r = check_l2_up(&id, &x, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert_relative_eq!(r.rhs, 1.0 / 9.0, epsilon = 1e-12);
        assert!(check_l1_up(&f, &e0, 1.0, 1.0).unwrap().passed);
        assert_eq!(check_l2_up(&f, &e0, 0.5, 0.5).unwrap().rhs, 0.0);
        assert!(check_l2_up(&f, &e0, 0.6, 0.5).is_err());
        let loose = KTransform::new("m", f.domain().clone(), f.codomain().clone(), DMatrix::identity(4, 4), 2.0).unwrap();
        assert!(check_l2_up(&loose, &e0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sweep_rows() {
        let rows = support_sweep(&v(&[1.0, 1.0]), 1.0, &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        assert_eq!(rows[0].value, 2.0);
        assert_relative_eq!(rows[1].value, 4.0 / 3.0, epsilon = 1e-12);
        assert_eq!(rows[3].value, 0.0);
        assert!(rows.windows(2).all(|w| w[1].value <= w[0].value));
    }

    fn abelian_vector() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0], 1..8)
    }

    proptest! {
        #[test]
        fn greedy_support_size_matches_subsets(xs in abelian_vector(), eps in 0.0f64..=1.0, pi in 0usize..4) {
            let p = [1.0, 2.0, 3.5, f64::INFINITY][pi];
            let x = v(&xs);
            prop_assume!(x.max_abs_entry() > 0.0);
            prop_assert_eq!(ww_support_size(&x, p, eps).unwrap(), ww_support_size_exhaustive(&x, p, eps).unwrap());
            let f = f_variants(&x, p, eps).unwrap();
            prop_assert_eq!(f.f3, ww_support_size(&x, p, eps).unwrap() as f64);
            let s = smooth_support(&x, p, eps).unwrap();
            prop_assert!(s.value <= f.f3 + TAU_NUM);
        }

        #[test]
        fn smooth_support_is_monotone(xs in abelian_vector(), e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0, pi in 0usize..4) {
            let p = [1.0, 1.5, 2.0, f64::INFINITY][pi];
            let x = v(&xs);
            prop_assume!(x.max_abs_entry() > 0.0);
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let a = smooth_support(&x, p, lo).unwrap().value;
            let b = smooth_support(&x, p, hi).unwrap().value;
            prop_assert!(b <= a + TAU_NUM);
        }
    }
}
