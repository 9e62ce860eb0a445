//! Error types.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("angle inequality hypothesis violated: inf d(v, F_perp) = {infimum:.3e} <= {threshold:.3e} (T meets F_perp)")]
    AngleHypothesis { infimum: f64, threshold: f64 },

    #[error("input document: {0}")]
    Schema(String),

    #[error("simplex {index} is degenerate (min height {height:.3e})")]
    DegenerateSimplex { index: usize, height: f64 },

    #[error("open simplices {a} and {b} overlap (strata must be pairwise disjoint)")]
    Disjointness { a: usize, b: usize },

    #[error("simplex {simplex} belongs to {count} strata; strata must partition the complex")]
    Coverage { simplex: usize, count: usize },

    #[error("stratum '{stratum}': {reason}")]
    StratumInvalid { stratum: String, reason: String },

    #[error("frontier condition: {reason}")]
    Frontier { reason: String },

    #[error("tube profiles: strata '{a}' and '{b}' admit no disjoint tubes (closure gap {gap:.3e})")]
    TubeCollision { a: String, b: String, gap: f64 },

    #[error("bump function domain: {0}")]
    BumpDomain(String),

    #[error("point is not on the complex (distance {dist:.3e})")]
    OffComplex { dist: f64 },

    #[error("distance gradient undefined on stratum (d(x,S) = {dist:.3e})")]
    GradientOnStratum { dist: f64 },

    #[error("point outside retraction domain of stratum '{stratum}'")]
    OutsideTube { stratum: String },

    #[error("net resolution {h:.3e} below resource guard {min:.3e}")]
    NetResolution { h: f64, min: f64 },

    #[error("map: {0}")]
    Map(String),

    #[error("expression parse: {0}")]
    ExpressionParse(String),

    #[error("anchors violate the {constant}-Lipschitz bound in coordinate {coordinate}: |f(a)-f(b)| = {value:.6} > {bound:.6} for anchors {a} and {b}")]
    LipschitzViolation {
        constant: f64,
        coordinate: usize,
        a: usize,
        b: usize,
        value: f64,
        bound: f64,
    },

    #[error("epsilon unreachable on stratum '{stratum}' after {halvings} delta halvings")]
    EpsilonUnreachable { stratum: String, halvings: usize },

    #[error("separation input: {0}")]
    Separation(String),

    #[error("profile/complex mismatch: {0}")]
    ProfileMismatch(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
