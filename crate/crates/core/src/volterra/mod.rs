//! A critically singular Volterra convolution kernel on a short interval:
//! evaluation, singularity-aware quadrature for inner products, essential
//! dyadic partitions driven by a measure's variation profile, finite-rank
//! kernel approximants with certified error, and the coarsened partition
//! with its coefficient net.

pub mod kernel;
pub mod measure;
pub mod partition;
pub mod quad;
pub mod rank;

use crate::error::VolterraError;

/// Upper endpoint bound: the kernel profile u^(-1/2) |ln u|^(-beta) is
/// decreasing and convex only while u stays below e^(-2).
pub const R_LIMIT: f64 = 0.1353352832366127; // e^(-2)

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Right end of the base interval (0, r].
    pub r: f64,
    /// Log exponent; 1 is the critical case.
    pub beta: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { r: 0.1, beta: 1.0 }
    }
}

impl KernelConfig {
    pub fn new(r: f64, beta: f64) -> Result<Self, VolterraError> {
        if !(r > 0.0) || r >= R_LIMIT {
            return Err(VolterraError::BadConfig {
                detail: format!("r = {r} outside (0, e^-2)"),
            });
        }
        if !(beta >= 1.0) {
            return Err(VolterraError::BadConfig {
                detail: format!("beta = {beta} below 1"),
            });
        }
        Ok(KernelConfig { r, beta })
    }

    pub(crate) fn check_range(&self, value: f64) -> Result<(), VolterraError> {
        if !(0.0..=self.r).contains(&value) {
            return Err(VolterraError::OutOfRange {
                value,
                r: self.r,
            });
        }
        Ok(())
    }
}
