use serde::{Deserialize, Serialize};

use crate::error::{QfaError, Result};

/// One matrix summand `M_dim(C)` carrying trace weight `weight`, so that a
/// rank-one projection in it has trace `weight`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

impl Block {
    pub fn new(dim: usize, weight: f64) -> Self {
        Self { dim, weight }
    }
}

/// A finite-dimensional von Neumann algebra `⊕_i M_{n_i}(C)` with the faithful
/// trace `Σ_i δ_i Tr_i`.
///
/// The JSON form is `{"blocks":[{"dim":n,"weight":w},...]}`; deserialization
/// runs the same validation as [`AlgebraShape::new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape")]
pub struct AlgebraShape {
    blocks: Vec<Block>,
}

#[derive(Deserialize)]
struct RawShape {
    blocks: Vec<Block>,
}

impl TryFrom<RawShape> for AlgebraShape {
    type Error = QfaError;

    fn try_from(raw: RawShape) -> Result<Self> {
        AlgebraShape::new(raw.blocks)
    }
}

impl AlgebraShape {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(QfaError::InvalidShape("an algebra needs at least one block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(QfaError::InvalidShape(format!("block {i} has dimension 0")));
            }
            if !(b.weight.is_finite() && b.weight > 0.0) {
                return Err(QfaError::InvalidShape(format!(
                    "block {i} has non-positive or non-finite weight {}",
                    b.weight
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// Convenience constructor from `(dim, weight)` pairs.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(d, w)| Block::new(d, w)).collect())
    }

    /// `n` points carrying the given weights.
    pub fn abelian(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| Block::new(1, w)).collect())
    }

    /// `C^n` with the counting measure.
    pub fn counting(n: usize) -> Self {
        assert!(n > 0, "counting measure on an empty set");
        Self {
            blocks: vec![Block::new(1, 1.0); n],
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `τ(I) = Σ δ_i n_i`.
    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.dim as f64).sum()
    }

    /// Trace of a minimal projection of smallest trace, `min_i δ_i`.
    pub fn min_projection_trace(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.weight)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_abelian(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }

    pub fn is_counting(&self) -> bool {
        self.is_abelian() && self.blocks.iter().all(|b| b.weight == 1.0)
    }

    /// Real dimension of the coordinate space, `Σ n_i²`.
    pub fn coord_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Starting coordinate of each block in the canonical vectorization.
    pub fn coord_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            offsets.push(acc);
            acc += b.dim * b.dim;
        }
        offsets
    }

    /// Tensor product shape, blocks ordered `(i, j)` with `i` major.
    pub fn tensor(&self, other: &AlgebraShape) -> AlgebraShape {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|a| {
                other
                    .blocks
                    .iter()
                    .map(move |b| Block::new(a.dim * b.dim, a.weight * b.weight))
            })
            .collect();
        AlgebraShape { blocks }
    }
}
