use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::shape::AlgebraShape;
use super::svd::jacobi_svd;
use super::C64;
use crate::error::{QfaError, Result};
use crate::TAU_NUM;

/// A block-diagonal operator `x = ⊕_i x_i` in an [`AlgebraShape`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<DMatrix<C64>>,
}

impl AlgebraElement {
    pub fn new(shape: AlgebraShape, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(QfaError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (m, b)) in blocks.iter().zip(shape.blocks()).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(QfaError::ShapeMismatch(format!(
                    "block {i} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                )));
            }
        }
        Ok(Self { shape, blocks })
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.blocks().iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
        Self { shape: shape.clone(), blocks }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|b| DMatrix::identity(b.dim, b.dim))
            .collect();
        Self { shape: shape.clone(), blocks }
    }

    /// The matrix unit `e_{rs}` inside block `block`.
    pub fn matrix_unit(shape: &AlgebraShape, block: usize, r: usize, s: usize) -> Self {
        let mut x = Self::zeros(shape);
        x.blocks[block][(r, s)] = C64::new(1.0, 0.0);
        x
    }

    /// Element of an abelian shape given by its values on the points.
    pub fn from_values(shape: &AlgebraShape, values: &[C64]) -> Result<Self> {
        if !shape.is_abelian() || values.len() != shape.num_blocks() {
            return Err(QfaError::ShapeMismatch(format!(
                "{} values do not describe a function on this shape",
                values.len()
            )));
        }
        let blocks = values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
        Ok(Self { shape: shape.clone(), blocks })
    }

    /// Real-valued function on `C^n` with counting measure.
    pub fn real_vector(values: &[f64]) -> Self {
        let shape = AlgebraShape::counting(values.len());
        let vals: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::from_values(&shape, &vals).expect("counting shape matches")
    }

    /// Rebuilds an element from coordinates in the trace-orthonormal basis
    /// `e_{rs}/√δ_i`.
    pub fn from_coordinates(shape: &AlgebraShape, coords: &DVector<C64>) -> Result<Self> {
        if coords.len() != shape.coord_dim() {
            return Err(QfaError::ShapeMismatch(format!(
                "{} coordinates for a shape of coordinate dimension {}",
                coords.len(),
                shape.coord_dim()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut k = 0;
        for b in shape.blocks() {
            let scale = 1.0 / b.weight.sqrt();
            let mut m = DMatrix::zeros(b.dim, b.dim);
            for r in 0..b.dim {
                for s in 0..b.dim {
                    m[(r, s)] = coords[k] * scale;
                    k += 1;
                }
            }
            blocks.push(m);
        }
        Ok(Self { shape: shape.clone(), blocks })
    }

    /// Coordinates in the trace-orthonormal basis, so that
    /// `τ(y* x) = coords(y)^* coords(x)`.
    pub fn coordinates(&self) -> DVector<C64> {
        let mut out = DVector::zeros(self.shape.coord_dim());
        let mut k = 0;
        for (m, b) in self.blocks.iter().zip(self.shape.blocks()) {
            let scale = b.weight.sqrt();
            for r in 0..b.dim {
                for s in 0..b.dim {
                    out[k] = m[(r, s)] * scale;
                    k += 1;
                }
            }
        }
        out
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<C64> {
        &self.blocks[i]
    }

    /// Point values of an element of an abelian shape.
    pub fn values(&self) -> Option<Vec<C64>> {
        self.shape
            .is_abelian()
            .then(|| self.blocks.iter().map(|m| m[(0, 0)]).collect())
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(QfaError::ShapeMismatch("elements live in different algebras".into()))
        }
    }

    /// `τ(x) = Σ δ_i Tr(x_i)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.shape.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|m| m * c)
    }

    pub fn map_blocks(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(
        &self,
        other: &Self,
        f: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>,
    ) -> Self {
        assert_eq!(self.shape, other.shape, "elements live in different algebras");
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Singular values of every block, paired with the block weight. These are
    /// the eigenvalues of `|x|` (equivalently of `|x*|`) with multiplicity.
    pub fn singular_values(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.blocks.iter().map(|m| m.nrows()).sum());
        for (m, b) in self.blocks.iter().zip(self.shape.blocks()) {
            if b.dim == 1 {
                out.push((m[(0, 0)].norm(), b.weight));
            } else {
                let d = jacobi_svd(m).expect("Jacobi SVD converges on finite input");
                out.extend(d.s.iter().map(|&s| (s, b.weight)));
            }
        }
        out
    }

    /// Operator norm, the largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().iter().map(|p| p.0).fold(0.0, f64::max)
    }

    /// `‖x‖_p = τ(|x|^p)^{1/p}` for `p > 0`; `p = ∞` gives the operator norm.
    pub fn p_norm(&self, p: f64) -> f64 {
        assert!(p > 0.0, "p-norms need p > 0, got {p}");
        let sv = self.singular_values();
        weighted_p_norm(sv.iter().copied(), p)
    }

    /// Largest absolute entry deviation, used for tolerance predicates.
    pub fn max_abs_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs_entry() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (&(self * self) - self).max_abs_entry() <= tol
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && self.blocks.iter().all(|m| {
                let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
                h.symmetric_eigenvalues().iter().all(|&l| l >= -tol)
            })
    }

    /// `‖x − y‖_2` relative to `max(‖x‖_2, 1)` is below `TAU_NUM`.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.shape == other.shape
            && (self - other).p_norm(2.0) <= TAU_NUM * self.p_norm(2.0).max(1.0)
    }
}

/// `(Σ w λ^p)^{1/p}` over (value, weight) pairs, `p = ∞` is the max.
/// `(Σ w s^p)^{1/p}`, evaluated relative to the largest `s` so that large
/// exponents neither underflow nor overflow.
pub(crate) fn weighted_p_norm(pairs: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    let pairs: Vec<(f64, f64)> = pairs.filter(|&(s, _)| s > 0.0).collect();
    let top = pairs.iter().map(|&(s, _)| s).fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let sum: f64 = pairs.iter().map(|&(s, w)| w * (s / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: Self) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: Self) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: Self) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: f64) -> AlgebraElement {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        self.scale(C64::new(-1.0, 0.0))
    }
}

// JSON: {"shape": {...}, "data": [[[re, im], ...] per block, row-major]}
#[derive(Serialize, Deserialize)]
struct RawElement {
    shape: AlgebraShape,
    data: Vec<Vec<[f64; 2]>>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let data = self
            .blocks
            .iter()
            .map(|m| {
                let mut row_major = Vec::with_capacity(m.len());
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        let z = m[(r, c)];
                        row_major.push([z.re, z.im]);
                    }
                }
                row_major
            })
            .collect();
        RawElement { shape: self.shape.clone(), data }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawElement::deserialize(deserializer)?;
        let mut blocks = Vec::with_capacity(raw.data.len());
        for (entries, b) in raw.data.iter().zip(raw.shape.blocks()) {
            if entries.len() != b.dim * b.dim {
                return Err(D::Error::custom(format!(
                    "block of dimension {} needs {} entries, got {}",
                    b.dim,
                    b.dim * b.dim,
                    entries.len()
                )));
            }
            blocks.push(DMatrix::from_row_iterator(
                b.dim,
                b.dim,
                entries.iter().map(|&[re, im]| C64::new(re, im)),
            ));
        }
        AlgebraElement::new(raw.shape, blocks).map_err(D::Error::custom)
    }
}
