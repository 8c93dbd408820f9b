//! Gaussian chirps and two-bump functions on the real line: closed-form
//! norms, numeric norms of mixtures, the `F_{p,q}` functional, the Beckner
//! floor for `1 < q < 2` and an explorer for the image of `F_q` when `q > 2`.
//!
//! The Fourier transform is `f̂(ξ) = ∫ f(x) e^{−2πixξ} dx`.

mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use quadrature::{integrate, Integral, QuadratureSettings};

use crate::algebra::C64;
use crate::error::{QfaError, Result};
use crate::report::{GapReport, Theorem};
use crate::uncertainty::{conjugate, reciprocal};

fn check_chirp(a: f64, b: f64) -> Result<()> {
    if !(b >= 0.0 && a > b && a.is_finite()) {
        return Err(QfaError::Precondition(format!("chirp needs a > b ≥ 0, got a = {a}, b = {b}")));
    }
    Ok(())
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r > 1.0) {
        return Err(QfaError::Precondition(format!("exponent must be in (1, ∞], got {r}")));
    }
    Ok(())
}

/// `f_{a,b}(x) = e^{−π((a+ib)x)²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChirpFunction {
    a: f64,
    b: f64,
}

impl ChirpFunction {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_chirp(a, b)?;
        Ok(Self { a, b })
    }

    /// The chirp with `a² − b² = 1`.
    pub fn on_slice(a: f64) -> Result<Self> {
        if !(a >= 1.0) {
            return Err(QfaError::Precondition(format!("slice needs a ≥ 1, got {a}")));
        }
        Self::new(a, (a * a - 1.0).max(0.0).sqrt())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn norm(&self, r: f64) -> f64 {
        chirp_norm(self.a, self.b, r).expect("validated")
    }

    pub fn fourier_norm(&self, r: f64) -> f64 {
        chirp_fourier_norm(self.a, self.b, r).expect("validated")
    }

    pub fn to_mixture(&self) -> BumpMixture {
        BumpMixture {
            terms: vec![GaussTerm { coef: C64::new(1.0, 0.0), z: C64::new(self.a, self.b) }],
        }
    }
}

/// `‖f_{a,b}‖_r = (r(a²−b²))^{−1/(2r)}`, and `1` at `r = ∞`.
pub fn chirp_norm(a: f64, b: f64, r: f64) -> Result<f64> {
    check_chirp(a, b)?;
    check_exponent(r)?;
    if r.is_infinite() {
        return Ok(1.0);
    }
    Ok((r * ((a - b) * (a + b))).powf(-0.5 / r))
}

/// `‖f̂_{a,b}‖_r = (a²+b²)^{−1/2}((a²+b²)/√(r(a²−b²)))^{1/r}`.
pub fn chirp_fourier_norm(a: f64, b: f64, r: f64) -> Result<f64> {
    check_chirp(a, b)?;
    check_exponent(r)?;
    let big = a * a + b * b;
    if r.is_infinite() {
        return Ok(big.powf(-0.5));
    }
    Ok(big.powf(-0.5) * (big / (r * ((a - b) * (a + b))).sqrt()).powf(1.0 / r))
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    check_exponent(p)?;
    if !(q > p) {
        return Err(QfaError::Precondition(format!("need 1 < p < q ≤ ∞, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `r^{1/r}`, equal to 1 at `r = ∞`.
fn root_of_self(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        r.powf(1.0 / r)
    }
}

/// `F_{p,q}(f_{a,b}) = p^{1/p}(a²+b²)^{1/q−1/p} / (q^{1/q}(a²−b²)^{1/q−1/p})`.
pub fn f_pq_chirp(a: f64, b: f64, p: f64, q: f64) -> Result<f64> {
    check_chirp(a, b)?;
    check_pq(p, q)?;
    let e = reciprocal(q) - reciprocal(p);
    let ratio = (a * a + b * b) / ((a - b) * (a + b));
    Ok(root_of_self(p) / root_of_self(q) * ratio.powf(e))
}

/// Bracket `(lo, hi)` of `F_{p,q}(g_c)` from the two-sided norm estimate of
/// a sum of two positive Gaussians; `hi = 16·lo`.
pub fn two_bump_f_bounds(c: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(QfaError::Precondition(format!("c must be positive, got {c}")));
    }
    check_pq(p, q)?;
    let n = |r: f64| {
        let e = reciprocal(r) - 0.5;
        c.powf(e) + c.powf(-e)
    };
    let lo = root_of_self(p) * n(q).powi(2) / (4.0 * root_of_self(q) * n(p).powi(2));
    Ok((lo, 16.0 * lo))
}

/// `coef · e^{−π(zx)²}` with `Re(z²) > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussTerm {
    pub coef: C64,
    pub z: C64,
}

impl GaussTerm {
    fn decay(&self) -> f64 {
        (self.z * self.z).re
    }

    fn eval(&self, x: f64) -> C64 {
        self.coef * (-(self.z * x).powi(2) * PI).exp()
    }

    /// `(coef/z) e^{−π(ξ/z)²}` with the principal branch.
    fn fourier(&self) -> GaussTerm {
        GaussTerm { coef: self.coef / self.z, z: self.z.inv() }
    }
}

/// Finite linear combination of complex Gaussians; covers chirps, the
/// two-bump family and their convex combinations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpMixture {
    terms: Vec<GaussTerm>,
}

impl BumpMixture {
    pub fn new(terms: Vec<GaussTerm>) -> Result<Self> {
        if terms.is_empty() || terms.iter().all(|t| t.coef == C64::new(0.0, 0.0)) {
            return Err(QfaError::ZeroElement("mixture needs a nonzero coefficient".into()));
        }
        if let Some(t) = terms.iter().find(|t| !(t.decay() > 0.0 && t.z.re > 0.0)) {
            return Err(QfaError::Precondition(format!("term with z = {} is not integrable", t.z)));
        }
        Ok(Self { terms })
    }

    pub fn chirp(a: f64, b: f64) -> Result<Self> {
        Ok(ChirpFunction::new(a, b)?.to_mixture())
    }

    /// `g_c(x) = c^{−1/2}e^{−π(x/c)²} + c^{1/2}e^{−π(cx)²}`, its own Fourier
    /// transform.
    pub fn two_bump(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(QfaError::Precondition(format!("c must be positive, got {c}")));
        }
        Self::new(vec![
            GaussTerm { coef: C64::new(c.powf(-0.5), 0.0), z: C64::new(1.0 / c, 0.0) },
            GaussTerm { coef: C64::new(c.sqrt(), 0.0), z: C64::new(c, 0.0) },
        ])
    }

    /// `λf + (1−λ)g`. Zero-weight sides are dropped.
    pub fn convex(lambda: f64, f: &Self, g: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(QfaError::Precondition(format!("λ must be in [0, 1], got {lambda}")));
        }
        let mut terms = Vec::with_capacity(f.terms.len() + g.terms.len());
        if lambda > 0.0 {
            terms.extend(f.terms.iter().map(|t| GaussTerm { coef: t.coef * lambda, z: t.z }));
        }
        if lambda < 1.0 {
            terms.extend(g.terms.iter().map(|t| GaussTerm { coef: t.coef * (1.0 - lambda), z: t.z }));
        }
        Self::new(terms)
    }

    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::new(self.terms.iter().map(|t| GaussTerm { coef: t.coef * c, z: t.z }).collect())
    }

    pub fn terms(&self) -> &[GaussTerm] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn fourier(&self) -> Self {
        Self { terms: self.terms.iter().map(GaussTerm::fourier).collect() }
    }

    /// Half-width beyond which every term is below `1e-12` of its peak.
    fn cutoff(&self) -> f64 {
        let s_min = self.terms.iter().map(GaussTerm::decay).fold(f64::INFINITY, f64::min);
        ((1e12f64).ln() / (PI * s_min)).sqrt()
    }

    /// Initial subdivision of `[0, L]` resolving every term's length scale.
    fn breakpoints(&self) -> Vec<f64> {
        let l = self.cutoff();
        let mut pts = vec![0.0, l];
        for t in &self.terms {
            let w = t.decay().powf(-0.5);
            for j in -3..=3 {
                let x = w * 2f64.powi(j);
                if x < l {
                    pts.push(x);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Maximum number of Gaussian products in an exact even moment.
const MOMENT_TERMS_MAX: usize = 200_000;

/// `∫|m|^{2n}` as a sum of Gaussian integrals `∫e^{−πwx²} = w^{−1/2}`.
fn exact_even_moment(m: &BumpMixture, n: usize) -> f64 {
    let mut acc: Vec<(C64, C64)> = vec![(C64::new(1.0, 0.0), C64::new(0.0, 0.0))];
    for factor in 0..2 * n {
        let conj = factor >= n;
        let mut next = Vec::with_capacity(acc.len() * m.terms.len());
        for &(c, w) in &acc {
            for t in &m.terms {
                let (tc, tw) = if conj {
                    (t.coef.conj(), (t.z * t.z).conj())
                } else {
                    (t.coef, t.z * t.z)
                };
                next.push((c * tc, w + tw));
            }
        }
        acc = next;
    }
    acc.iter().map(|&(c, w)| c / w.sqrt()).sum::<C64>().re
}

fn even_integer(r: f64) -> Option<usize> {
    (r.is_finite() && r == r.round() && (r as usize).is_multiple_of(2) && r >= 2.0).then_some(r as usize / 2)
}

/// `sup |m|`: fine grid followed by golden-section refinement around the
/// best grid points.
fn sup_norm(m: &BumpMixture) -> f64 {
    const GRID: usize = 4096;
    let f = |x: f64| m.eval(x).norm();
    let mut pts = m.breakpoints();
    let l = m.cutoff();
    pts.extend((0..=GRID).map(|i| l * (i as f64 / GRID as f64).powi(2)));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut best = vals[order[0]];
    for &i in order.iter().take(8) {
        let mut lo = pts[i.saturating_sub(1)];
        let mut hi = pts[(i + 1).min(pts.len() - 1)];
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if f(x1) >= f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        best = best.max(f(0.5 * (lo + hi)));
    }
    best
}

/// `‖m‖_r` for `r ∈ (1, ∞]`.
pub fn mixture_norm(m: &BumpMixture, r: f64, quad: &QuadratureSettings) -> Result<f64> {
    check_exponent(r)?;
    if r.is_infinite() {
        return Ok(sup_norm(m));
    }
    if let Some(n) = even_integer(r) {
        if quad.exact_even_moments && m.terms.len().pow(2 * n as u32) <= MOMENT_TERMS_MAX {
            return Ok(exact_even_moment(m, n).max(0.0).powf(1.0 / r));
        }
    }
    let half = integrate(|x| m.eval(x).norm().powf(r), &m.breakpoints(), quad)?;
    Ok((2.0 * half.value).powf(1.0 / r))
}

/// `∫ x²|m(x)|² dx` by quadrature.
pub fn second_moment(m: &BumpMixture, quad: &QuadratureSettings) -> Result<f64> {
    let half = integrate(|x| x * x * m.eval(x).norm_sqr(), &m.breakpoints(), quad)?;
    Ok(2.0 * half.value)
}

/// `F_{p,q}(m) = ‖m‖_q‖m̂‖_q / (‖m‖_p‖m̂‖_p)` with numeric norms.
pub fn mixture_f_numeric(m: &BumpMixture, p: f64, q: f64, quad: &QuadratureSettings) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let mh = m.fourier();
    let num = mixture_norm(m, q, quad)? * mixture_norm(&mh, q, quad)?;
    let den = mixture_norm(m, p, quad)? * mixture_norm(&mh, p, quad)?;
    Ok(num / den)
}

/// `F_q(m) = ‖m‖_q‖m̂‖_q / ‖m‖_2²`.
pub fn f_q(m: &BumpMixture, q: f64, quad: &QuadratureSettings) -> Result<f64> {
    mixture_f_numeric(m, 2.0, q, quad)
}

/// `(p^{1/p}/q^{1/q})^{1/2}` with `1/p + 1/q = 1`.
pub fn beckner_floor(q: f64) -> f64 {
    let p = conjugate(q);
    (root_of_self(p) / root_of_self(q)).sqrt()
}

/// Allowed shortfall of a quadrature-based Beckner check.
pub const BECKNER_TOLERANCE: f64 = 1e-6;

/// `F_q(m) ≥ (p^{1/p}/q^{1/q})^{1/2}` for `1 < q < 2`.
pub fn beckner_lower_bound_gap(m: &BumpMixture, q: f64, quad: &QuadratureSettings) -> Result<GapReport> {
    if !(q > 1.0 && q < 2.0) {
        return Err(QfaError::Precondition(format!("the floor needs 1 < q < 2, got {q}")));
    }
    let value = f_q(m, q, quad)?;
    Ok(GapReport::with_tolerance(Theorem::BecknerFloor, value, beckner_floor(q), BECKNER_TOLERANCE).param("q", q))
}

/// Both sides of `∫x²|f|² ∫ξ²|f̂|² ≥ ‖f‖_2²‖f̂‖_2²/(16π²)` for `f_{a,b}`.
pub fn heisenberg_product(a: f64, b: f64) -> Result<(f64, f64)> {
    check_chirp(a, b)?;
    let s = (a - b) * (a + b);
    let big = a * a + b * b;
    let s_hat = s / (big * big);
    let norm_sq = (2.0 * s).powf(-0.5);
    let norm_hat_sq = (2.0 * s_hat).powf(-0.5) / big;
    let lhs = norm_sq / (4.0 * PI * s) * (norm_hat_sq / (4.0 * PI * s_hat));
    let rhs = norm_sq * norm_hat_sq / (16.0 * PI * PI);
    Ok((lhs, rhs))
}

pub fn heisenberg_gap(a: f64, b: f64) -> Result<GapReport> {
    let (lhs, rhs) = heisenberg_product(a, b)?;
    Ok(GapReport::new(Theorem::Heisenberg, lhs, rhs).param("a", a).param("b", b))
}

/// Outcome of a search for `m` with `F_{p,q}(m)` equal to a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploreResult {
    pub lambda: f64,
    pub achieved: f64,
    pub target: f64,
    pub p: f64,
    pub q: f64,
    /// Chirp parameter on the slice `a² − b² = 1`.
    pub a: f64,
    pub c: f64,
    /// `F` at `λ = 1` (pure chirp) and `λ = 0` (pure two-bump).
    pub chirp_value: f64,
    pub bump_value: f64,
    pub witness: BumpMixture,
}

/// Largest chirp and two-bump parameters tried before giving up.
const A_MAX: f64 = 4096.0;
const C_MAX: f64 = 1.0e9;
const BISECTION_STEPS: usize = 200;

/// `explore_image_pq` with `p = 2`.
pub fn explore_image(q: f64, target: f64, tolerance: f64, quad: &QuadratureSettings) -> Result<ExploreResult> {
    if q > 1.0 && q < 2.0 && target < beckner_floor(q) {
        return Err(QfaError::Precondition(format!(
            "target {target} is below the floor {} of F_q for q = {q}",
            beckner_floor(q)
        )));
    }
    explore_image_pq(2.0, q, target, tolerance, quad)
}

/// Finds `λ` with `F_{p,q}(λ f_{a,√(a²−1)} + (1−λ) g_c)` within `tolerance`
/// of `target`: `a` and `c` double until the pure endpoints straddle the
/// target, then `λ` is bisected.
pub fn explore_image_pq(p: f64, q: f64, target: f64, tolerance: f64, quad: &QuadratureSettings) -> Result<ExploreResult> {
    check_pq(p, q)?;
    if reciprocal(p) + reciprocal(q) >= 1.0 {
        return Err(QfaError::Precondition(format!("need 1/p + 1/q < 1, got p = {p}, q = {q}")));
    }
    if !(target > 0.0 && target.is_finite()) || !(tolerance > 0.0) {
        return Err(QfaError::Precondition("target and tolerance must be positive".into()));
    }
    let value = |m: &BumpMixture| mixture_f_numeric(m, p, q, quad);

    let mut a = 1.0;
    let mut f = ChirpFunction::on_slice(a)?.to_mixture();
    let mut chirp_value = value(&f)?;
    while chirp_value >= target {
        a *= 2.0;
        if a > A_MAX {
            return Err(QfaError::StraddleNotFound { target, min: chirp_value, max: f64::NAN });
        }
        f = ChirpFunction::on_slice(a)?.to_mixture();
        chirp_value = value(&f)?;
    }
    let mut c = 1.0;
    let mut g = BumpMixture::two_bump(c)?;
    let mut bump_value = value(&g)?;
    while bump_value <= target {
        c *= 2.0;
        if c > C_MAX {
            return Err(QfaError::StraddleNotFound { target, min: chirp_value, max: bump_value });
        }
        g = BumpMixture::two_bump(c)?;
        bump_value = value(&g)?;
    }

    // h(1) < target < h(0)
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (f64::INFINITY, 0.0, bump_value);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let h = value(&BumpMixture::convex(mid, &f, &g)?)?;
        if (h - target).abs() < best.0 {
            best = ((h - target).abs(), mid, h);
        }
        if (h - target).abs() <= tolerance || hi - lo <= f64::EPSILON {
            break;
        }
        if h > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, lambda, achieved) = best;
    Ok(ExploreResult {
        lambda,
        achieved,
        target,
        p,
        q,
        a,
        c,
        chirp_value,
        bump_value,
        witness: BumpMixture::convex(lambda, &f, &g)?,
    })
}

/// One row of a closed-form versus quadrature comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormAgreementRow {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub fourier_closed_form: f64,
    pub fourier_quadrature: f64,
    pub max_rel_dev: f64,
}

/// Chirp norms on the grid `a ∈ {1, 1.5, 2, 4}`, `b ∈ {0, a/2, √(a²−1)}`,
/// `r ∈ {1.25, 2, 3}`, each by closed form and by quadrature.
pub fn chirp_agreement_table(quad: &QuadratureSettings) -> Result<Vec<NormAgreementRow>> {
    let quad = quad.quadrature_only();
    let mut rows = Vec::new();
    for a in [1.0, 1.5, 2.0, 4.0] {
        let mut bs = vec![0.0, 0.5 * a, (a * a - 1.0f64).sqrt()];
        bs.sort_by(f64::total_cmp);
        bs.dedup();
        for b in bs {
            if !(a > b) {
                continue;
            }
            let m = BumpMixture::chirp(a, b)?;
            for r in [1.25, 2.0, 3.0] {
                let closed_form = chirp_norm(a, b, r)?;
                let fourier_closed_form = chirp_fourier_norm(a, b, r)?;
                let quadrature = mixture_norm(&m, r, &quad)?;
                let fourier_quadrature = mixture_norm(&m.fourier(), r, &quad)?;
                let max_rel_dev = ((quadrature - closed_form) / closed_form)
                    .abs()
                    .max(((fourier_quadrature - fourier_closed_form) / fourier_closed_form).abs());
                rows.push(NormAgreementRow {
                    a,
                    b,
                    r,
                    closed_form,
                    quadrature,
                    fourier_closed_form,
                    fourier_quadrature,
                    max_rel_dev,
                });
            }
        }
    }
    Ok(rows)
}

/// `(λ, h(λ))` on a uniform grid of `points` values in `[0, 1]`.
pub fn mixture_curve(
    f: &BumpMixture,
    g: &BumpMixture,
    p: f64,
    q: f64,
    points: usize,
    quad: &QuadratureSettings,
) -> Result<Vec<(f64, f64)>> {
    assert!(points >= 2, "need at least two points");
    (0..points)
        .map(|i| {
            let lambda = i as f64 / (points - 1) as f64;
            let m = BumpMixture::convex(lambda, f, g)?;
            Ok((lambda, mixture_f_numeric(&m, p, q, quad)?))
        })
        .collect()
}
