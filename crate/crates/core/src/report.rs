use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::TAU_NUM;

/// The inequality a [`GapReport`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `‖F‖_{1→∞} ≤ 1`.
    TransformContraction,
    /// `‖F*F(x)‖_∞ ≥ k‖x‖_∞`.
    TransformExpansion,
    /// `‖x‖_1‖Fx‖_1 ≥ k‖x‖_∞‖Fx‖_∞`.
    WigdersonWigderson,
    /// `S(x)S(Fx) ≥ k`.
    DonohoStark,
    /// `S^1_ε(x)S^1_η(Fx) ≥ k(1−ε)(1−η)`.
    L1SmoothSupport,
    /// `S^2_ε(x)S^2_η(Fx) ≥ k(1−ε−η)²`.
    L2SmoothSupport,
    /// `‖Fx‖_p ≤ k^{1/p}‖x‖_q`.
    HausdorffYoung,
    /// `‖x‖_q‖Fx‖_q ≥ k^{1−2/p}‖x‖_p‖Fx‖_p`.
    WigdersonPq,
    /// Two-box Fourier norm-product bound driven by `K(1/q,1/p)`.
    FourierKFunction,
    /// Entropy sum lower bound.
    HirschmanBeckner,
    /// Smoothed entropy sum lower bound.
    SmoothHirschmanBeckner,
    /// Lipschitz continuity of `H(|x|²)` in operator norm.
    EntropyLipschitz,
    /// Singular value perturbation bound.
    EigenvaluePerturbation,
    /// `F_q(f) ≥ (p^{1/p}/q^{1/q})^{1/2}` for `1 < q < 2`.
    BecknerFloor,
    /// Heisenberg second-moment product.
    Heisenberg,
}

impl Theorem {
    pub fn label(self) -> &'static str {
        match self {
            Theorem::TransformContraction => "transform-contraction",
            Theorem::TransformExpansion => "transform-expansion",
            Theorem::WigdersonWigderson => "wigderson-wigderson",
            Theorem::DonohoStark => "donoho-stark",
            Theorem::L1SmoothSupport => "l1-smooth-support",
            Theorem::L2SmoothSupport => "l2-smooth-support",
            Theorem::HausdorffYoung => "hausdorff-young",
            Theorem::WigdersonPq => "wigderson-pq",
            Theorem::FourierKFunction => "fourier-k-function",
            Theorem::HirschmanBeckner => "hirschman-beckner",
            Theorem::SmoothHirschmanBeckner => "smooth-hirschman-beckner",
            Theorem::EntropyLipschitz => "entropy-lipschitz",
            Theorem::EigenvaluePerturbation => "eigenvalue-perturbation",
            Theorem::BecknerFloor => "beckner-floor",
            Theorem::Heisenberg => "heisenberg",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Both sides of an inequality `lhs ≥ rhs` and their difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub theorem: Theorem,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub passed: bool,
    /// Numeric parameters of the check (exponents, ε, k, ...).
    #[serde(with = "json_float::map")]
    pub params: BTreeMap<String, f64>,
}

impl GapReport {
    /// Report for `lhs ≥ rhs` with the default tolerance.
    pub fn new(theorem: Theorem, lhs: f64, rhs: f64) -> Self {
        Self::with_tolerance(theorem, lhs, rhs, TAU_NUM)
    }

    pub fn with_tolerance(theorem: Theorem, lhs: f64, rhs: f64, tol: f64) -> Self {
        let gap = lhs - rhs;
        Self {
            theorem,
            lhs,
            rhs,
            gap,
            passed: gap >= -tol,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Re-evaluates `passed` against another tolerance.
    pub fn passes_at(&self, tol: f64) -> bool {
        self.gap >= -tol
    }
}

/// Serde adapters writing non-finite floats as the strings `"inf"`,
/// `"-inf"` and `"nan"`, which JSON numbers cannot express.
pub mod json_float {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Number(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: {other}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod map {
        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            s.collect_map(m.iter().map(|(k, v)| (k, to_repr(*v))))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            BTreeMap::<String, Repr>::deserialize(d)?
                .into_iter()
                .map(|(k, r)| Ok((k, from_repr(r)?)))
                .collect()
        }
    }
}
