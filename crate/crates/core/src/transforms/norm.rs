use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::KTransform;
use crate::algebra::{AlgebraElement, AlgebraShape, C64};
use crate::report::{GapReport, Theorem};
use crate::TAU_NUM;

/// Sampling parameters for norm queries that have no exact formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormBudget {
    pub samples: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for NormBudget {
    fn default() -> Self {
        Self {
            samples: 256,
            ascent_steps: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// `false` means `value` is only a lower bound of the true norm.
    pub certified: bool,
}

/// `‖F‖_{q→p}`. Exact for abelian domains with `q = 1` and for `q = p = 2`;
/// otherwise the best ratio found by sampling plus local ascent.
pub fn op_norm(f: &KTransform, q: f64, p: f64, budget: &NormBudget) -> NormEstimate {
    assert!(q >= 1.0 && p >= 1.0, "exponents must be at least 1");
    if q == 1.0 {
        if let Some(value) = f.exact_one_to(p) {
            return NormEstimate { value, certified: true };
        }
    }
    if q == 2.0 && p == 2.0 {
        let gram = f.matrix().adjoint() * f.matrix();
        let value = nalgebra::SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt();
        return NormEstimate { value, certified: true };
    }
    let ratio = |c: &DVector<C64>| -> f64 {
        let x = AlgebraElement::from_coordinates(f.domain(), c).expect("domain coordinates");
        let nx = x.p_norm(q);
        if nx == 0.0 {
            return 0.0;
        }
        f.apply(&x).expect("domain element").p_norm(p) / nx
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut candidates = extreme_candidates(f.domain(), budget.samples, &mut rng);
    let mut scored: Vec<(f64, DVector<C64>)> = candidates.drain(..).map(|c| (ratio(&c), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(4);
    let mut best = scored.first().map_or(0.0, |s| s.0);
    for (mut value, mut c) in scored {
        let mut step = 0.5;
        for _ in 0..budget.ascent_steps {
            let scale = c.norm().max(f64::MIN_POSITIVE);
            let trial = &c + gaussian_vector(c.len(), &mut rng) * C64::new(step * scale / (c.len() as f64).sqrt(), 0.0);
            let r = ratio(&trial);
            if r > value {
                value = r;
                c = trial;
                step = (step * 1.5).min(2.0);
            } else {
                step *= 0.5;
            }
        }
        best = best.max(value);
    }
    NormEstimate { value: best, certified: false }
}

fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Coordinates of matrix units, random rank-one elements `uv*` in single
/// blocks and dense Gaussian elements.
fn extreme_candidates(shape: &AlgebraShape, samples: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<C64>> {
    let mut out = Vec::with_capacity(samples + shape.coord_dim());
    if shape.coord_dim() <= 256 {
        for (i, b) in shape.blocks().iter().enumerate() {
            for r in 0..b.dim {
                for s in 0..b.dim {
                    out.push(AlgebraElement::matrix_unit(shape, i, r, s).coordinates());
                }
            }
        }
    }
    for t in 0..samples {
        if t % 2 == 0 {
            let i = rng.random_range(0..shape.num_blocks());
            let d = shape.blocks()[i].dim;
            let u = gaussian_vector(d, rng);
            let v = gaussian_vector(d, rng);
            let mut blocks: Vec<DMatrix<C64>> = shape.blocks().iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
            blocks[i] = &u * v.adjoint();
            out.push(AlgebraElement::new(shape.clone(), blocks).expect("shape").coordinates());
        } else {
            out.push(gaussian_vector(shape.coord_dim(), rng));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    /// No violation found by sampling; nothing proven.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    /// Norm estimate for the contraction axiom, smallest observed expansion
    /// ratio for the expansion axiom.
    pub value: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub contraction: AxiomCheck,
    pub expansion: AxiomCheck,
}

impl ValidationReport {
    /// No axiom was refuted.
    pub fn passed(&self) -> bool {
        self.contraction.verdict != Verdict::Refuted && self.expansion.verdict != Verdict::Refuted
    }

    pub fn fully_certified(&self) -> bool {
        self.contraction.verdict == Verdict::Certified && self.expansion.verdict == Verdict::Certified
    }

    /// The two axioms as `lhs ≥ rhs` reports.
    pub fn gap_reports(&self) -> [GapReport; 2] {
        [
            GapReport::new(Theorem::TransformContraction, self.contraction.bound, self.contraction.value)
                .param("certified", f64::from(u8::from(self.contraction.verdict == Verdict::Certified))),
            GapReport::with_tolerance(
                Theorem::TransformExpansion,
                self.expansion.value,
                self.expansion.bound,
                TAU_NUM * self.expansion.bound.max(1.0),
            )
            .param("certified", f64::from(u8::from(self.expansion.verdict == Verdict::Certified))),
        ]
    }
}

/// Checks both k-transform axioms, exactly where possible and by randomized
/// refutation elsewhere.
pub fn validate_k_transform(f: &KTransform, budget: &NormBudget) -> ValidationReport {
    let contraction = match f.exact_one_to_infty() {
        Some(value) => AxiomCheck {
            value,
            bound: 1.0,
            verdict: if value <= 1.0 + TAU_NUM { Verdict::Certified } else { Verdict::Refuted },
        },
        None => {
            let est = op_norm(f, 1.0, f64::INFINITY, budget);
            AxiomCheck {
                value: est.value,
                bound: 1.0,
                verdict: if est.value > 1.0 + TAU_NUM { Verdict::Refuted } else { Verdict::Inconclusive },
            }
        }
    };

    let k = f.k();
    let expansion = if f.kff_exact() {
        AxiomCheck {
            value: k,
            bound: k,
            verdict: Verdict::Certified,
        }
    } else {
        let gram = f.matrix().adjoint() * f.matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut candidates = extreme_candidates(f.domain(), budget.samples, &mut rng);
        // eigenvectors of F*F are the natural suspects
        let eig = nalgebra::SymmetricEigen::new(hermitian_part(&gram));
        for j in 0..eig.eigenvalues.len() {
            candidates.push(eig.eigenvectors.column(j).into_owned());
        }
        let mut worst = f64::INFINITY;
        for c in candidates {
            let x = AlgebraElement::from_coordinates(f.domain(), &c).expect("domain coordinates");
            let nx = x.op_norm();
            if nx == 0.0 {
                continue;
            }
            let y = AlgebraElement::from_coordinates(f.domain(), &(&gram * &c)).expect("domain coordinates");
            worst = worst.min(y.op_norm() / nx);
        }
        AxiomCheck {
            value: worst,
            bound: k,
            verdict: if worst < k - TAU_NUM * k.max(1.0) { Verdict::Refuted } else { Verdict::Inconclusive },
        }
    };
    ValidationReport { contraction, expansion }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{dft_transform, identity_transform, parse_builtin};
    use approx::assert_relative_eq;

    #[test]
    fn dft4_norms() {
        let f = dft_transform(4);
        let b = NormBudget::default();
        let n = op_norm(&f, 1.0, f64::INFINITY, &b);
        assert!(n.certified);
        assert_relative_eq!(n.value, 1.0, epsilon = 1e-14);
        let n = op_norm(&f, 2.0, 2.0, &b);
        assert!(n.certified);
        assert_relative_eq!(n.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_norms_on_a_point() {
        let id = identity_transform(&AlgebraShape::counting(1));
        for r in [1.5, 3.0, f64::INFINITY] {
            let n = op_norm(&id, r, r, &NormBudget::default());
            assert_relative_eq!(n.value, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampled_norm_is_a_lower_bound_close_to_truth() {
        // ‖DFT_n‖_{4/3→4} = n^{1/4} by Hausdorff–Young with equality at deltas
        let f = dft_transform(4);
        let n = op_norm(&f, 4.0 / 3.0, 4.0, &NormBudget::default());
        assert!(!n.certified);
        assert!(n.value <= 4f64.powf(0.25) + 1e-9);
        assert!(n.value >= 4f64.powf(0.25) - 1e-6);
    }

    #[test]
    fn adjoint_norm_agrees() {
        let f = parse_builtin("group:s3").unwrap();
        let a = op_norm(&f, 1.0, f64::INFINITY, &NormBudget::default());
        let b = op_norm(&f.adjoint(), 1.0, f64::INFINITY, &NormBudget::default());
        assert!(a.certified);
        assert!(!b.certified);
        assert!(b.value <= a.value + 1e-9);
        assert!(b.value >= a.value - 1e-3);
    }

    #[test]
    fn validation_verdicts() {
        let ok = validate_k_transform(&dft_transform(5), &NormBudget::default());
        assert!(ok.fully_certified());
        assert!(ok.gap_reports().iter().all(|r| r.passed));

        let f = dft_transform(4);
        let scaled = KTransform::new("2dft", f.domain().clone(), f.codomain().clone(), f.matrix() * C64::new(2.0, 0.0), 4.0).unwrap();
        let r = validate_k_transform(&scaled, &NormBudget::default());
        assert_eq!(r.contraction.verdict, Verdict::Refuted);
        assert!(!r.passed());

        let zero = KTransform::new("zero", f.domain().clone(), f.codomain().clone(), DMatrix::zeros(4, 4), 1.0).unwrap();
        let r = validate_k_transform(&zero, &NormBudget::default());
        assert_eq!(r.expansion.verdict, Verdict::Refuted);
        assert_eq!(r.contraction.verdict, Verdict::Certified);
        assert!(!r.gap_reports()[1].passed);
    }

    #[test]
    fn tensor_of_dfts_validates() {
        for (a, b) in [(2, 2), (2, 3), (3, 4)] {
            let t = KTransform::tensor(&dft_transform(a), &dft_transform(b));
            let r = validate_k_transform(&t, &NormBudget::default());
            assert!(r.fully_certified());
            assert_eq!(t.k(), (a * b) as f64);
            assert_relative_eq!(t.exact_one_to_infty().unwrap(), 1.0, epsilon = 1e-12);
        }
    }
}
