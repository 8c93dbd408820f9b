//! k-transforms: linear maps between two finite von Neumann algebras with
//! `‖F‖_{1→∞} ≤ 1` and `‖F*F(x)‖_∞ ≥ k‖x‖_∞`.
//!
//! A transform is stored as its coordinate matrix in the trace-orthonormal
//! bases `e_{rs}/√δ_i` of domain and codomain, so the trace adjoint is the
//! conjugate transpose.

mod builtin;
mod norm;

pub use builtin::{
    cyclic_group, dft_transform, group_fourier, identity_transform, parse_builtin,
    symmetric_group_s3, CayleyTable, FiniteGroup,
};
pub use norm::{op_norm, validate_k_transform, AxiomCheck, NormBudget, NormEstimate, ValidationReport, Verdict};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{AlgebraElement, AlgebraShape, C64};
use crate::error::{QfaError, Result};
use crate::TAU_NUM;

/// What has been established exactly about a transform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certification {
    /// `‖F‖_{1→∞} ≤ 1` was verified by an exact computation.
    pub one_infty_certified: bool,
    /// `F*F = kI` holds within tolerance.
    pub kff_exact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KTransform {
    name: String,
    domain: AlgebraShape,
    codomain: AlgebraShape,
    matrix: DMatrix<C64>,
    k: f64,
    cert: Certification,
}

impl KTransform {
    /// Builds a transform from its coordinate matrix and derives the
    /// certification flags numerically.
    pub fn new(
        name: impl Into<String>,
        domain: AlgebraShape,
        codomain: AlgebraShape,
        matrix: DMatrix<C64>,
        k: f64,
    ) -> Result<Self> {
        let mut t = Self::unchecked(name, domain, codomain, matrix, k)?;
        t.cert = Certification {
            one_infty_certified: t.exact_one_to_infty().is_some_and(|v| v <= 1.0 + TAU_NUM),
            kff_exact: t.gram_deviation() <= gram_tolerance(t.k),
        };
        Ok(t)
    }

    /// Builds a transform whose certification is known by construction.
    pub(crate) fn with_certification(
        name: impl Into<String>,
        domain: AlgebraShape,
        codomain: AlgebraShape,
        matrix: DMatrix<C64>,
        k: f64,
        cert: Certification,
    ) -> Result<Self> {
        let mut t = Self::unchecked(name, domain, codomain, matrix, k)?;
        t.cert = cert;
        Ok(t)
    }

    fn unchecked(
        name: impl Into<String>,
        domain: AlgebraShape,
        codomain: AlgebraShape,
        matrix: DMatrix<C64>,
        k: f64,
    ) -> Result<Self> {
        if matrix.nrows() != codomain.coord_dim() || matrix.ncols() != domain.coord_dim() {
            return Err(QfaError::ShapeMismatch(format!(
                "coordinate matrix is {}x{}, shapes need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                codomain.coord_dim(),
                domain.coord_dim()
            )));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(QfaError::Precondition(format!("k must be positive, got {k}")));
        }
        Ok(Self {
            name: name.into(),
            domain,
            codomain,
            matrix,
            k,
            cert: Certification::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &AlgebraShape {
        &self.domain
    }

    pub fn codomain(&self) -> &AlgebraShape {
        &self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn certification(&self) -> Certification {
        self.cert
    }

    pub fn kff_exact(&self) -> bool {
        self.cert.kff_exact
    }

    /// Same map with a different name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if x.shape() != &self.domain {
            return Err(QfaError::ShapeMismatch(format!(
                "element does not belong to the domain of {}",
                self.name
            )));
        }
        let coords: DVector<C64> = &self.matrix * x.coordinates();
        AlgebraElement::from_coordinates(&self.codomain, &coords)
    }

    /// Adjoint with respect to the two traces.
    pub fn adjoint(&self) -> KTransform {
        let matrix = self.matrix.adjoint();
        let square = self.matrix.nrows() == self.matrix.ncols();
        let mut t = KTransform {
            name: format!("adjoint({})", self.name),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix,
            k: self.k,
            cert: Certification {
                // ‖F*‖_{1→∞} = ‖F‖_{1→∞}
                one_infty_certified: self.cert.one_infty_certified,
                kff_exact: false,
            },
        };
        t.cert.kff_exact = if square && self.cert.kff_exact {
            true
        } else {
            t.gram_deviation() <= gram_tolerance(t.k)
        };
        t
    }

    /// `F2 ∘ F1` as a plain linear map (the `k` is `k1·k2`, an upper
    /// bookkeeping value only).
    pub fn compose(first: &KTransform, second: &KTransform) -> Result<KTransform> {
        if first.codomain != second.domain {
            return Err(QfaError::ShapeMismatch("composition of incompatible transforms".into()));
        }
        KTransform::new(
            format!("{}*{}", second.name, first.name),
            first.domain.clone(),
            second.codomain.clone(),
            &second.matrix * &first.matrix,
            first.k * second.k,
        )
    }

    /// Tensor product `F1 ⊗ F2` acting on tensor-product algebras.
    pub fn tensor(f1: &KTransform, f2: &KTransform) -> KTransform {
        let domain = f1.domain.tensor(&f2.domain);
        let codomain = f1.codomain.tensor(&f2.codomain);
        let dom_map = tensor_coordinate_map(&f1.domain, &f2.domain);
        let cod_map = tensor_coordinate_map(&f1.codomain, &f2.codomain);
        let (r1, c1) = f1.matrix.shape();
        let (r2, c2) = f2.matrix.shape();
        let mut matrix = DMatrix::zeros(r1 * r2, c1 * c2);
        for a in 0..r1 {
            for b in 0..c1 {
                let m1 = f1.matrix[(a, b)];
                if m1 == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..r2 {
                    for d in 0..c2 {
                        matrix[(cod_map[a * r2 + c], dom_map[b * c2 + d])] = m1 * f2.matrix[(c, d)];
                    }
                }
            }
        }
        KTransform {
            name: format!("tensor:[{},{}]", f1.name, f2.name),
            domain,
            codomain,
            matrix,
            k: f1.k * f2.k,
            cert: Certification {
                one_infty_certified: f1.cert.one_infty_certified && f2.cert.one_infty_certified,
                kff_exact: f1.cert.kff_exact && f2.cert.kff_exact,
            },
        }
    }

    /// `‖M*M − kI‖` (operator norm) for the coordinate matrix `M`.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.matrix.ncols();
        let gram = self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(n, n) * C64::new(self.k, 0.0);
        if n == 0 {
            return 0.0;
        }
        nalgebra::SymmetricEigen::new(gram).eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Exact `‖F‖_{1→∞}` for abelian domains: the extreme points of the 1-norm
    /// ball are unimodular multiples of `e_j/d(e_j)`.
    pub fn exact_one_to_infty(&self) -> Option<f64> {
        self.exact_one_to(f64::INFINITY)
    }

    pub(crate) fn exact_one_to(&self, p: f64) -> Option<f64> {
        if !self.domain.is_abelian() {
            return None;
        }
        let mut best: f64 = 0.0;
        for (j, b) in self.domain.blocks().iter().enumerate() {
            let e = AlgebraElement::matrix_unit(&self.domain, j, 0, 0);
            let fe = self.apply(&e).expect("domain element");
            best = best.max(fe.p_norm(p) / b.weight);
        }
        Some(best)
    }
}

fn gram_tolerance(k: f64) -> f64 {
    TAU_NUM * k.max(1.0)
}

/// Index map sending Kronecker-ordered coordinate pairs `(a, b)` (flattened as
/// `a·dim(B) + b`) to the canonical coordinate of the product shape.
fn tensor_coordinate_map(a: &AlgebraShape, b: &AlgebraShape) -> Vec<usize> {
    let product = a.tensor(b);
    let prod_offsets = product.coord_offsets();
    let b_total = b.coord_dim();
    let mut map = vec![0; a.coord_dim() * b_total];
    let mut ia = 0;
    for (i, ba) in a.blocks().iter().enumerate() {
        for r in 0..ba.dim {
            for s in 0..ba.dim {
                let mut ib = 0;
                for (j, bb) in b.blocks().iter().enumerate() {
                    let block = i * b.num_blocks() + j;
                    let dim = ba.dim * bb.dim;
                    for t in 0..bb.dim {
                        for u in 0..bb.dim {
                            let row = r * bb.dim + t;
                            let col = s * bb.dim + u;
                            map[ia * b_total + ib] = prod_offsets[block] + row * dim + col;
                            ib += 1;
                        }
                    }
                }
                ia += 1;
            }
        }
    }
    map
}

// JSON: {"domain": shape, "codomain": shape, "k": k, "matrix": [[re, im], ...]}
#[derive(Serialize, Deserialize)]
struct RawTransform {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    domain: AlgebraShape,
    codomain: AlgebraShape,
    k: f64,
    matrix: Vec<[f64; 2]>,
}

impl Serialize for KTransform {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut matrix = Vec::with_capacity(self.matrix.len());
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                let z = self.matrix[(r, c)];
                matrix.push([z.re, z.im]);
            }
        }
        RawTransform {
            name: Some(self.name.clone()),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            k: self.k,
            matrix,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KTransform {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawTransform::deserialize(deserializer)?;
        let rows = raw.codomain.coord_dim();
        let cols = raw.domain.coord_dim();
        if raw.matrix.len() != rows * cols {
            return Err(D::Error::custom(format!(
                "matrix has {} entries, shapes need {rows}x{cols}",
                raw.matrix.len()
            )));
        }
        let matrix = DMatrix::from_row_iterator(rows, cols, raw.matrix.iter().map(|&[re, im]| C64::new(re, im)));
        KTransform::new(raw.name.unwrap_or_else(|| "custom".into()), raw.domain, raw.codomain, matrix, raw.k)
            .map_err(D::Error::custom)
    }
}
