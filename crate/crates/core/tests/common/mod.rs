//! Seeded instance generators and inequality checks shared by the
//! acceptance target and the property suites. Every check returns gaps
//! that should be nonnegative.

#![allow(dead_code)]

use nalgebra::DMatrix;
use qfa_core::algebra::support;
use qfa_core::corpus::{random_element, random_matrix, sample_rng};
use qfa_core::entropy::{eigenvalue_perturbation_gap, lipschitz_gap};
use qfa_core::support::{f_variants, smooth_support};
use qfa_core::transforms::parse_builtin;
use qfa_core::uncertainty::riesz_thorin_profile;
use qfa_core::{AlgebraElement, AlgebraShape, KTransform, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const VIOLATION_TOL: f64 = 1e-8;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    sample_rng(seed, stream)
}

/// Shapes mixing abelian, weighted and matrix blocks.
pub fn shapes() -> Vec<AlgebraShape> {
    [
        vec![(1, 1.0), (1, 1.0), (1, 1.0)],
        vec![(1, 0.5), (1, 2.0), (1, 1.5), (1, 1.0)],
        vec![(2, 1.0)],
        vec![(3, 0.5)],
        vec![(2, 2.0), (1, 1.0)],
        vec![(1, 1.0), (2, 1.0), (2, 3.0)],
    ]
    .iter()
    .map(|p| AlgebraShape::from_pairs(p).unwrap())
    .collect()
}

pub fn pick_shape(rng: &mut impl Rng) -> AlgebraShape {
    let s = shapes();
    s[rng.random_range(0..s.len())].clone()
}

/// Random element with operator-scale between 0.2 and 3.
pub fn scaled_element(shape: &AlgebraShape, rng: &mut impl Rng) -> AlgebraElement {
    let x = random_element(shape, rng);
    let s: f64 = rng.random_range(0.2..3.0);
    &x * s
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn from_inv(t: f64) -> f64 {
    if t <= 1e-15 {
        f64::INFINITY
    } else {
        1.0 / t
    }
}

const EXPONENTS: [f64; 7] = [1.0, 4.0 / 3.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY];

/// `|τ(xy)| ≤ ‖x‖_p‖y‖_q`, `|τ(xyz)| ≤ ‖x‖_p‖y‖_q‖z‖_r` and
/// `‖xy‖_r ≤ ‖x‖_p‖y‖_q`, as gaps `rhs − lhs`.
pub fn holder_gaps(seed: u64, index: u64) -> [f64; 3] {
    let mut rng = rng(seed, index);
    let shape = pick_shape(&mut rng);
    let x = scaled_element(&shape, &mut rng);
    let y = scaled_element(&shape, &mut rng);
    let z = scaled_element(&shape, &mut rng);

    let p = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
    let q = from_inv(1.0 - inv(p));
    let two = x.p_norm(p) * y.p_norm(q) - (&x * &y).trace().norm();

    // 1/p + 1/q + 1/r = 1 with 1/p, 1/q drawn from the simplex
    let a: f64 = rng.random_range(0.0..1.0);
    let b: f64 = rng.random_range(0.0..(1.0 - a));
    let (p3, q3, r3) = (from_inv(a), from_inv(b), from_inv(1.0 - a - b));
    let three = x.p_norm(p3) * y.p_norm(q3) * z.p_norm(r3) - (&(&x * &y) * &z).trace().norm();

    // 1/r = 1/p + 1/q ≤ 1
    let r = from_inv(a + b);
    let product = x.p_norm(p3) * y.p_norm(q3) - (&x * &y).p_norm(r);
    [two, three, product]
}

/// Singular value perturbation on random square matrices.
pub fn eigen_perturbation(seed: u64, index: u64) -> f64 {
    let mut rng = rng(seed, index);
    let n = rng.random_range(1..=6);
    let a = random_matrix(n, &mut rng);
    let scale: f64 = 10f64.powf(rng.random_range(-4.0..0.5));
    let b: DMatrix<C64> = &a + random_matrix(n, &mut rng) * C64::new(scale, 0.0);
    eigenvalue_perturbation_gap(&a, &b).unwrap().gap
}

/// Entropy Lipschitz bound for a random pair, near or far.
pub fn lipschitz(seed: u64, index: u64) -> f64 {
    let mut rng = rng(seed, index);
    let shape = pick_shape(&mut rng);
    let x = scaled_element(&shape, &mut rng);
    let y = if rng.random_bool(0.5) {
        let d = random_element(&shape, &mut rng);
        let s: f64 = 10f64.powf(rng.random_range(-5.0..-1.0));
        &x + &(&d * s)
    } else {
        scaled_element(&shape, &mut rng)
    };
    lipschitz_gap(&x, &y).unwrap().gap
}

const SUPPORT_EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

/// `S_ε^p ≤ f1 ≤ f2 ≤ f3`, as the three consecutive differences.
pub fn ordering_chain(seed: u64, index: u64) -> [f64; 3] {
    let mut rng = rng(seed, index);
    let shape = pick_shape(&mut rng);
    let x = scaled_element(&shape, &mut rng);
    let p = SUPPORT_EXPONENTS[rng.random_range(0..SUPPORT_EXPONENTS.len())];
    let eps: f64 = rng.random_range(0.0..=1.0);
    let s = smooth_support(&x, p, eps).unwrap().value;
    let f = f_variants(&x, p, eps).unwrap();
    [f.f1 - s, f.f2 - f.f1, f.f3 - f.f2]
}

/// `S_ε ≤ S_{cε} ≤ (1−c)τ(R(x)) + c·S_ε` for `c ∈ {0.25, 0.5, 0.9}`.
pub fn continuity_sandwich(seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng(seed, index);
    let shape = pick_shape(&mut rng);
    let x = scaled_element(&shape, &mut rng);
    let p = SUPPORT_EXPONENTS[rng.random_range(0..SUPPORT_EXPONENTS.len())];
    let eps: f64 = rng.random_range(0.0..=1.0);
    let s = smooth_support(&x, p, eps).unwrap().value;
    let r = support(&x);
    let mut gaps = Vec::new();
    for c in [0.25, 0.5, 0.9] {
        let sc = smooth_support(&x, p, c * eps).unwrap().value;
        gaps.push(sc - s);
        gaps.push((1.0 - c) * r + c * s - sc);
    }
    gaps
}

pub fn exact_transforms() -> Vec<KTransform> {
    ["dft:2", "dft:3", "dft:4", "dft:8", "group:s3", "group:z5", "tensor:[dft:2,dft:3]"]
        .iter()
        .map(|n| parse_builtin(n).unwrap())
        .collect()
}

pub const RT_EXPONENTS: [f64; 6] = [2.0, 2.5, 3.0, 4.0, 8.0, f64::INFINITY];

/// Negated log-interpolation profile, so that each entry should be `≥ 0`;
/// the last entry is `−|f(2)|`.
pub fn riesz_thorin(transforms: &[KTransform], seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng(seed, index);
    let f = &transforms[rng.random_range(0..transforms.len())];
    let x = scaled_element(f.domain(), &mut rng);
    let profile = riesz_thorin_profile(f, &x, &RT_EXPONENTS).unwrap();
    let mut gaps: Vec<f64> = profile.iter().map(|&(_, v)| -v).collect();
    gaps.push(-profile[0].1.abs());
    gaps
}

/// Runs `check` on `count` instances and returns the worst violation
/// (`max(0, −gap)`) and the number of violations beyond [`VIOLATION_TOL`].
pub fn tally(count: u64, check: impl Fn(u64) -> Vec<f64>) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for i in 0..count {
        for g in check(i) {
            let v = if g.is_nan() { f64::INFINITY } else { (-g).max(0.0) };
            worst = worst.max(v);
            if v > VIOLATION_TOL {
                bad += 1;
            }
        }
    }
    (worst, bad)
}
