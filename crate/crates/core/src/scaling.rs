//! Rate shapes and log-log exponent fitting for the covering experiments.

use serde::{Deserialize, Serialize};

use crate::error::CoverError;

/// Least-squares fit of log(values) against log(ns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub ns: Vec<u64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
}

pub fn fit_exponent(ns: &[u64], values: &[f64]) -> Result<ScalingFit, CoverError> {
    if ns.len() != values.len() || ns.len() < 3 {
        return Err(CoverError::DegenerateFit);
    }
    if ns.iter().any(|&n| n == 0) || values.iter().any(|&v| !(v > 0.0)) {
        return Err(CoverError::DegenerateFit);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|&v| v.ln()).collect();
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        // All ns equal: slope is unidentifiable.
        return Err(CoverError::DegenerateFit);
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(ScalingFit {
        ns: ns.to_vec(),
        values: values.to_vec(),
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Upper,
    Lower,
    /// Convex-hull rate driven by the polynomial exponent of the generating
    /// set; coincides with Upper for this operator family.
    Hull,
}

/// Entropy-rate shape (constants omitted) for weight exponent beta at
/// scale n. Below the critical exponent 2 the upper and lower shapes
/// agree; at 2 they split by a log factor; above 2 a negative log power
/// appears. The hull shape follows the generating set's polynomial decay
/// alpha = (beta-1)/2 through the three hull regimes.
pub fn reference_rate(beta: f64, n: u64, kind: RateKind) -> Result<f64, CoverError> {
    if !(beta > 1.0) {
        return Err(CoverError::RateUndefined {
            detail: format!("beta = {beta} not above 1"),
        });
    }
    if n == 0 {
        return Err(CoverError::RateUndefined {
            detail: "n must be positive".into(),
        });
    }
    let nf = n as f64;
    let log_needed = beta >= 2.0 && !matches!(kind, RateKind::Lower if beta == 2.0);
    if log_needed && n < 2 {
        return Err(CoverError::RateUndefined {
            detail: "log-corrected shapes need n >= 2".into(),
        });
    }
    let rate = match kind {
        RateKind::Hull => {
            let alpha = (beta - 1.0) / 2.0;
            if alpha < 0.5 {
                nf.powf(-alpha)
            } else if alpha == 0.5 {
                nf.powf(-0.5) * nf.ln()
            } else {
                nf.powf(-0.5) * nf.ln().powf(0.5 - alpha)
            }
        }
        RateKind::Upper => {
            if beta < 2.0 {
                nf.powf(-(beta - 1.0) / 2.0)
            } else if beta == 2.0 {
                nf.powf(-0.5) * nf.ln()
            } else {
                nf.powf(-0.5) * nf.ln().powf(1.0 - beta / 2.0)
            }
        }
        RateKind::Lower => {
            if beta < 2.0 {
                nf.powf(-(beta - 1.0) / 2.0)
            } else if beta == 2.0 {
                nf.powf(-0.5)
            } else {
                nf.powf(-0.5) * nf.ln().powf(1.0 - beta / 2.0)
            }
        }
    };
    Ok(rate)
}

/// Shape of the sharp finite-dimensional packing estimate:
/// sqrt(ln(1 + m/k) / k), constants omitted.
pub fn carl_shape(m: u64, k: u64) -> Result<f64, CoverError> {
    if m == 0 || k == 0 {
        return Err(CoverError::RateUndefined {
            detail: "carl shape needs positive m and k".into(),
        });
    }
    Ok(((1.0 + m as f64 / k as f64).ln() / k as f64).sqrt())
}

/// CSV rows (n, k, radius, bound) with a fixed header, for plotting.
pub fn write_scaling_csv(
    path: &std::path::Path,
    rows: &[(u64, u64, f64, f64)],
) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "n,k,radius,bound")?;
    for (n, k, radius, bound) in rows {
        writeln!(out, "{n},{k},{radius},{bound}")?;
    }
    Ok(())
}
