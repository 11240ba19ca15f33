//! Error types, split by subsystem.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("level {level} exceeds the depth cap of 62")]
    DepthLimit { level: u32 },
    #[error("index {index} does not fit in level {level}")]
    InvalidIndex { level: u32, index: u64 },
    #[error("beta = {beta} rejected: weights need beta > 1")]
    InvalidBeta { beta: f64 },
    #[error("beta mismatch: {left} vs {right}")]
    BetaMismatch { left: f64, right: f64 },
    #[error("depth bound {depth} is below the deepest support level {support}")]
    DepthTooSmall { depth: u32, support: u32 },
    #[error("total variation {norm} exceeds the unit ball")]
    MassExceedsUnit { norm: f64 },
    #[error("node set is not ancestor-closed: missing parent of ({level},{index})")]
    NotAncestorClosed { level: u32, index: u64 },
    #[error("terminal candidates are not an antichain")]
    NotAntichain,
    #[error("size bound violated: {detail}")]
    SizeBoundViolated { detail: String },
    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },
    #[error("enumeration budget exceeded: n = {n} > {max}")]
    EnumerationBudget { n: u32, max: u32 },
    #[error("serialization: {detail}")]
    Serde { detail: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("k must be at least 1")]
    ZeroBalls,
    #[error("mixed beta values in one cloud: {left} vs {right}")]
    MixedBeta { left: f64, right: f64 },
    #[error("search budget exceeded: {combinations} center subsets")]
    SearchBudget { combinations: u128 },
    #[error("packing budget exceeded: n = {n} > {max}")]
    PackingBudget { n: u32, max: u32 },
    #[error("net of {size} elements exceeds the materialization budget")]
    NetBudget { size: u128 },
    #[error("fit needs at least 3 points with positive values")]
    DegenerateFit,
    #[error("rate shape undefined: {detail}")]
    RateUndefined { detail: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolterraError {
    #[error("argument {value} outside [0, r] with r = {r}")]
    OutOfRange { value: f64, r: f64 },
    #[error("kernel config rejected: {detail}")]
    BadConfig { detail: String },
    #[error("quadrature did not converge: panel budget {panels} exhausted, error estimate {estimate:e}")]
    NonConvergence { panels: u32, estimate: f64 },
    #[error("total variation {norm} exceeds the unit ball")]
    MassExceedsUnit { norm: f64 },
    #[error("atom at {location} not covered by the partition")]
    NotCovered { location: f64 },
    #[error("operation supports atomic measures only (density pieces present)")]
    DensityUnsupported,
    #[error("partition is not an essential partition for this call: {detail}")]
    BadPartition { detail: String },
    #[error("net of {size} coefficient profiles exceeds the budget")]
    NetBudget { size: u128 },
}
