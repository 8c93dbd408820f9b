use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::svd::jacobi_svd;
use serde::{Deserialize, Serialize};

use super::element::{weighted_p_norm, AlgebraElement};
use super::C64;
use crate::error::{QfaError, Result};
use crate::{RANK_CUT, TAU_NUM};

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// One eigenvalue of `|x*|` and the trace of its rank-one spectral projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub value: f64,
    pub weight: f64,
}

/// Eigenvalues of `|x*|` with their trace weights, kernel included, sorted
/// descending. Ties keep block order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pairs: Vec<SpectralPair>,
}

impl SpectralData {
    pub fn new(mut pairs: Vec<SpectralPair>) -> Result<Self> {
        for p in &pairs {
            if !(p.value >= 0.0 && p.value.is_finite()) {
                return Err(QfaError::Precondition(format!("eigenvalue {} is not a nonnegative real", p.value)));
            }
            if !(p.weight > 0.0 && p.weight.is_finite()) {
                return Err(QfaError::Precondition(format!("weight {} is not positive", p.weight)));
            }
        }
        pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
        Ok(Self { pairs })
    }

    /// From `(value, weight)` tuples.
    pub fn from_tuples(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(value, weight)| SpectralPair { value, weight }).collect())
    }

    pub fn pairs(&self) -> &[SpectralPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.pairs.first().map_or(0.0, |p| p.value)
    }

    /// Threshold below which an eigenvalue counts as zero.
    pub fn rank_threshold(&self) -> f64 {
        RANK_CUT * self.max_value()
    }

    /// Whether pair `j` lies in the range projection.
    pub fn in_range(&self, j: usize) -> bool {
        let v = self.pairs[j].value;
        v > 0.0 && v > self.rank_threshold()
    }

    /// `τ(R(x))`.
    pub fn support(&self) -> f64 {
        (0..self.pairs.len())
            .filter(|&j| self.in_range(j))
            .map(|j| self.pairs[j].weight)
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.pairs.iter().map(|p| p.weight).sum()
    }

    pub fn p_norm(&self, p: f64) -> f64 {
        weighted_p_norm(self.pairs.iter().map(|q| (q.value, q.weight)), p)
    }
}

/// One left singular vector of a block together with its singular value.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub weight: f64,
    pub block: usize,
    /// Eigenvector of `|x*|` (left singular vector of the block).
    pub left: DVector<C64>,
    /// Matching right singular vector.
    pub right: DVector<C64>,
}

/// Singular value decomposition of every block, flattened and sorted like
/// [`SpectralData`].
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    element: AlgebraElement,
    pairs: Vec<Eigenpair>,
}

impl SpectralDecomposition {
    pub fn new(x: &AlgebraElement) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, (m, b)) in x.blocks().iter().zip(x.shape().blocks()).enumerate() {
            if b.dim == 1 {
                let z = m[(0, 0)];
                let r = z.norm();
                let phase = if r > 0.0 { z / r } else { C64::new(1.0, 0.0) };
                pairs.push(Eigenpair {
                    value: r,
                    weight: b.weight,
                    block: i,
                    left: DVector::from_element(1, C64::new(1.0, 0.0)),
                    right: DVector::from_element(1, phase.conj()),
                });
                continue;
            }
            let svd = jacobi_svd(m)?;
            for (j, &s) in svd.s.iter().enumerate() {
                pairs.push(Eigenpair {
                    value: s,
                    weight: b.weight,
                    block: i,
                    left: svd.u.column(j).into_owned(),
                    right: svd.v.column(j).into_owned(),
                });
            }
        }
        pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
        Ok(Self { element: x.clone(), pairs })
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.element
    }

    pub fn pairs(&self) -> &[Eigenpair] {
        &self.pairs
    }

    pub fn spectral_data(&self) -> SpectralData {
        SpectralData {
            pairs: self
                .pairs
                .iter()
                .map(|p| SpectralPair { value: p.value, weight: p.weight })
                .collect(),
        }
    }

    fn zero_blocks(&self) -> Vec<DMatrix<C64>> {
        AlgebraElement::zeros(self.element.shape()).blocks().to_vec()
    }

    fn cut(&self) -> f64 {
        RANK_CUT * self.pairs.first().map_or(0.0, |p| p.value)
    }

    fn is_range(&self, p: &Eigenpair) -> bool {
        p.value > 0.0 && p.value > self.cut()
    }

    /// `Σ_j h_j u_j u_j*`, a function of `|x*|` given per eigenpair.
    pub fn functional_calculus(&self, h: &[f64]) -> AlgebraElement {
        assert_eq!(h.len(), self.pairs.len(), "one coefficient per eigenpair");
        let mut blocks = self.zero_blocks();
        for (p, &c) in self.pairs.iter().zip(h) {
            if c != 0.0 {
                blocks[p.block] += (&p.left * p.left.adjoint()) * C64::new(c, 0.0);
            }
        }
        AlgebraElement::new(self.element.shape().clone(), blocks).expect("same shape")
    }

    /// `Σ_j c_j λ_j u_j v_j*`, i.e. `x` with each singular value rescaled.
    pub fn rescaled(&self, c: &[f64]) -> AlgebraElement {
        assert_eq!(c.len(), self.pairs.len(), "one coefficient per eigenpair");
        let mut blocks = self.zero_blocks();
        for (p, &cj) in self.pairs.iter().zip(c) {
            let s = cj * p.value;
            if s != 0.0 {
                blocks[p.block] += (&p.left * p.right.adjoint()) * C64::new(s, 0.0);
            }
        }
        AlgebraElement::new(self.element.shape().clone(), blocks).expect("same shape")
    }

    /// `|x*|`.
    pub fn abs_adjoint(&self) -> AlgebraElement {
        let h: Vec<f64> = self.pairs.iter().map(|p| p.value).collect();
        self.functional_calculus(&h)
    }

    /// Partial isometry `U` with `x = |x*| U`.
    pub fn polar_part(&self) -> AlgebraElement {
        let mut blocks = self.zero_blocks();
        for p in self.pairs.iter().filter(|p| self.is_range(p)) {
            blocks[p.block] += &p.left * p.right.adjoint();
        }
        AlgebraElement::new(self.element.shape().clone(), blocks).expect("same shape")
    }

    pub fn range_projection(&self) -> AlgebraElement {
        let h: Vec<f64> = self
            .pairs
            .iter()
            .map(|p| if self.is_range(p) { 1.0 } else { 0.0 })
            .collect();
        self.functional_calculus(&h)
    }
}

/// Polar decomposition `x = |x*| U` together with the spectrum of `|x*|`.
pub fn polar_spectral(x: &AlgebraElement) -> Result<(AlgebraElement, SpectralData)> {
    let dec = SpectralDecomposition::new(x)?;
    Ok((dec.polar_part(), dec.spectral_data()))
}

/// Spectral data of `|x*|` alone.
pub fn spectral_data(x: &AlgebraElement) -> SpectralData {
    let pairs = x
        .singular_values()
        .into_iter()
        .map(|(value, weight)| SpectralPair { value, weight })
        .collect();
    SpectralData::new(pairs).expect("singular values are nonnegative")
}

/// Range projection `R(x)`: spectral projection of `|x*|` on eigenvalues
/// above `RANK_CUT · ‖x‖`.
pub fn range_projection(x: &AlgebraElement) -> Result<AlgebraElement> {
    Ok(SpectralDecomposition::new(x)?.range_projection())
}

/// `S(x) = τ(R(x))`.
pub fn support(x: &AlgebraElement) -> f64 {
    spectral_data(x).support()
}

/// Compression `Σ_k P_k y P_k` onto the block structure cut out by the
/// eigenspaces `P_k` of the Hermitian `h`. Trace preserving and idempotent.
pub fn expectation_onto_spectral_subalgebra(
    y: &AlgebraElement,
    h: &AlgebraElement,
) -> Result<AlgebraElement> {
    y.same_shape(h)?;
    let scale = h.max_abs_entry().max(1.0);
    if !h.is_hermitian(TAU_NUM * scale) {
        return Err(QfaError::Precondition("expectation needs a Hermitian generator".into()));
    }
    let mut blocks = Vec::with_capacity(y.blocks().len());
    for (yb, hb) in y.blocks().iter().zip(h.blocks()) {
        let n = hb.nrows();
        if n == 1 {
            blocks.push(yb.clone());
            continue;
        }
        let herm = (hb + hb.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITERATIONS)
            .ok_or(QfaError::DecompositionFailure)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut out = DMatrix::zeros(n, n);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n
                && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] <= TAU_NUM * scale
            {
                end += 1;
            }
            let mut proj = DMatrix::<C64>::zeros(n, n);
            for &j in &order[start..end] {
                let v = eig.eigenvectors.column(j);
                proj += v * v.adjoint();
            }
            out += &proj * yb * &proj;
            start = end;
        }
        blocks.push(out);
    }
    AlgebraElement::new(y.shape().clone(), blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> AlgebraElement {
        let shape = AlgebraShape::from_pairs(&[(1, 2.0), (3, 0.5), (2, 1.0)]).unwrap();
        AlgebraElement::new(
            shape,
            vec![
                DMatrix::from_element(1, 1, c(-0.5, 1.5)),
                DMatrix::from_fn(3, 3, |r, s| c((r + 2 * s) as f64 * 0.3 - 0.4, (r as f64 - s as f64) * 0.7)),
                DMatrix::from_fn(2, 2, |r, s| c(1.0 + r as f64, -(s as f64))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn positive_diagonal_polar() {
        let x = AlgebraElement::real_vector(&[2.0, 0.0, 0.5]);
        let (u, spec) = polar_spectral(&x).unwrap();
        assert_eq!(u, AlgebraElement::real_vector(&[1.0, 0.0, 1.0]));
        let values: Vec<f64> = spec.pairs().iter().map(|p| p.value).collect();
        assert_eq!(values, vec![2.0, 0.5, 0.0]);
    }

    #[test]
    fn matrix_unit_spectrum() {
        let shape = AlgebraShape::from_pairs(&[(2, 1.0)]).unwrap();
        let x = AlgebraElement::matrix_unit(&shape, 0, 0, 1).scale(c(2.0, 0.0));
        let (_, spec) = polar_spectral(&x).unwrap();
        let tuples: Vec<(f64, f64)> = spec.pairs().iter().map(|p| (p.value, p.weight)).collect();
        assert_relative_eq!(tuples[0].0, 2.0, epsilon = 1e-14);
        assert_eq!(tuples[0].1, 1.0);
        assert!(tuples[1].0.abs() < 1e-14);
        assert_eq!(tuples[1].1, 1.0);
    }

    #[test]
    fn zero_element() {
        let shape = AlgebraShape::from_pairs(&[(2, 1.0), (1, 3.0)]).unwrap();
        let z = AlgebraElement::zeros(&shape);
        let (u, spec) = polar_spectral(&z).unwrap();
        assert_eq!(u, z);
        assert!(spec.pairs().iter().all(|p| p.value == 0.0));
        assert_eq!(range_projection(&z).unwrap(), z);
        assert_eq!(support(&z), 0.0);
    }

    #[test]
    fn polar_reconstruction() {
        let x = sample();
        let dec = SpectralDecomposition::new(&x).unwrap();
        let rebuilt = &dec.abs_adjoint() * &dec.polar_part();
        assert!((&x - &rebuilt).p_norm(2.0) <= TAU_NUM * x.p_norm(2.0));
        let u = dec.polar_part();
        // partial isometry: U U* U = U
        let uuu = &(&u * &u.adjoint()) * &u;
        assert!((&uuu - &u).max_abs_entry() < 1e-10);
        let spec = dec.spectral_data();
        assert_relative_eq!(spec.total_weight(), x.shape().total_trace(), max_relative = 1e-14);
    }

    #[test]
    fn range_projection_examples() {
        let x = AlgebraElement::real_vector(&[1.0, 0.0, 2.0]);
        assert_eq!(range_projection(&x).unwrap(), AlgebraElement::real_vector(&[1.0, 0.0, 1.0]));
        assert_eq!(support(&x), 2.0);

        // the 3x3 block of sample() has rank 2; shifting makes it invertible
        let base = sample();
        let inv = &base + &AlgebraElement::identity(base.shape()).scale(c(5.0, 0.0));
        let r = range_projection(&inv).unwrap();
        assert!((&r - &AlgebraElement::identity(inv.shape())).max_abs_entry() < 1e-10);

        let r = range_projection(&base).unwrap();
        assert!(r.is_projection(TAU_NUM));
        assert!((&(&r * &base) - &base).max_abs_entry() < TAU_NUM);
        assert!((support(&base) - (2.0 + 2.0 * 0.5 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn rank_one_support_is_block_weight() {
        let shape = AlgebraShape::from_pairs(&[(2, 3.0)]).unwrap();
        let x = AlgebraElement::new(
            shape,
            vec![DMatrix::from_fn(2, 2, |r, s| c((r + 1) as f64 * (s + 2) as f64, 0.0))],
        )
        .unwrap();
        assert_relative_eq!(support(&x), 3.0);
        let r = range_projection(&x).unwrap();
        assert_relative_eq!(r.trace().re, support(&x), epsilon = 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let shape = AlgebraShape::from_pairs(&[(2, 1.0)]).unwrap();
        let diag = |a: f64, b: f64| {
            AlgebraElement::new(
                shape.clone(),
                vec![DMatrix::from_diagonal(&DVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]))],
            )
            .unwrap()
        };
        let y = diag(3.0, -1.0);
        let h = diag(1.0, 2.0);
        assert!(expectation_onto_spectral_subalgebra(&y, &h).unwrap().approx_eq(&y));

        let e12 = AlgebraElement::matrix_unit(&shape, 0, 0, 1);
        let out = expectation_onto_spectral_subalgebra(&e12, &h).unwrap();
        assert!(out.max_abs_entry() < 1e-14);

        let id = AlgebraElement::identity(&shape);
        let out = expectation_onto_spectral_subalgebra(&e12, &id).unwrap();
        assert!(out.approx_eq(&e12));
    }

    #[test]
    fn expectation_is_trace_preserving_and_idempotent() {
        let y = sample();
        let h = &y + &y.adjoint();
        let e = expectation_onto_spectral_subalgebra(&y, &h).unwrap();
        assert_relative_eq!(e.trace().re, y.trace().re, epsilon = 1e-12);
        assert_relative_eq!(e.trace().im, y.trace().im, epsilon = 1e-12);
        let ee = expectation_onto_spectral_subalgebra(&e, &h).unwrap();
        assert!(ee.approx_eq(&e));
        assert!(expectation_onto_spectral_subalgebra(&y, &y).is_err());
    }
}
