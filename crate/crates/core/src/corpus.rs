//! Seeded random elements used by property tests, the verification suite and
//! the CLI.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraShape, C64};

/// Structural families drawn by [`random_element`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Dense,
    Sparse,
    LowRank,
    Spiky,
    Phases,
    Positive,
}

const KINDS: [ElementKind; 6] = [
    ElementKind::Dense,
    ElementKind::Sparse,
    ElementKind::LowRank,
    ElementKind::Spiky,
    ElementKind::Phases,
    ElementKind::Positive,
];

/// Generator for sample `index` of a seeded corpus; each index gets its own
/// ChaCha stream so samples are independent of evaluation order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Element `index` of the corpus for `seed` on `shape`.
pub fn corpus_element(shape: &AlgebraShape, seed: u64, index: u64) -> AlgebraElement {
    random_element(shape, &mut sample_rng(seed, index))
}

/// Nonzero element with `‖x‖_2 = 1` drawn from a mixture of structural
/// families.
pub fn random_element(shape: &AlgebraShape, rng: &mut impl Rng) -> AlgebraElement {
    let kind = KINDS[rng.random_range(0..KINDS.len())];
    random_element_of_kind(shape, kind, rng)
}

pub fn random_element_of_kind(shape: &AlgebraShape, kind: ElementKind, rng: &mut impl Rng) -> AlgebraElement {
    let x = loop {
        let x = raw_element(shape, kind, rng);
        if x.p_norm(2.0) > 1e-6 {
            break x;
        }
    };
    let n = x.p_norm(2.0);
    &x * (1.0 / n)
}

fn raw_element(shape: &AlgebraShape, kind: ElementKind, rng: &mut impl Rng) -> AlgebraElement {
    let blocks = shape
        .blocks()
        .iter()
        .map(|b| {
            let d = b.dim;
            match kind {
                ElementKind::Dense => gaussian(d, d, rng),
                ElementKind::Sparse => DMatrix::from_fn(d, d, |_, _| {
                    if rng.random_bool(0.3) {
                        gauss(rng)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }),
                ElementKind::LowRank => {
                    if rng.random_bool(0.5) {
                        let u = gaussian(d, 1, rng);
                        let v = gaussian(d, 1, rng);
                        &u * v.adjoint()
                    } else {
                        DMatrix::zeros(d, d)
                    }
                }
                ElementKind::Spiky => gaussian(d, d, rng) * C64::new(1e-3, 0.0),
                ElementKind::Phases => {
                    if d == 1 {
                        DMatrix::from_element(1, 1, C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                    } else {
                        // unitary factor of a Gaussian matrix
                        let g = gaussian(d, d, rng);
                        g.qr().q()
                    }
                }
                ElementKind::Positive => {
                    let g = gaussian(d, d, rng);
                    &g * g.adjoint()
                }
            }
        })
        .collect();
    let mut x = AlgebraElement::new(shape.clone(), blocks).expect("blocks follow the shape");
    if kind == ElementKind::Spiky {
        let i = rng.random_range(0..shape.num_blocks());
        let d = shape.blocks()[i].dim;
        let (r, s) = (rng.random_range(0..d), rng.random_range(0..d));
        x = &x + &AlgebraElement::matrix_unit(shape, i, r, s).scale(gauss(rng) + C64::new(3.0, 0.0));
    }
    x
}

fn gauss(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian(r: usize, c: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(r, c, |_, _| gauss(rng))
}

/// Random square complex matrix with Gaussian entries.
pub fn random_matrix(n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    gaussian(n, n, rng)
}

/// Random Hermitian element of `shape` (not normalized).
pub fn random_hermitian(shape: &AlgebraShape, rng: &mut impl Rng) -> AlgebraElement {
    let x = random_element(shape, rng);
    &x + &x.adjoint()
}
