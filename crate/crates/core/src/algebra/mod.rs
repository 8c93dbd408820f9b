//! Finite-dimensional von Neumann algebras `⊕_i M_{n_i}(C)` with weighted
//! traces, their elements, Schatten norms and spectral calculus.

pub(crate) mod element;
mod shape;
mod spectral;
pub(crate) mod svd;

pub use element::AlgebraElement;
pub use shape::{AlgebraShape, Block};
pub use spectral::{
    expectation_onto_spectral_subalgebra, polar_spectral, range_projection, spectral_data, support,
    Eigenpair, SpectralData, SpectralDecomposition, SpectralPair,
};

pub type C64 = nalgebra::Complex<f64>;
