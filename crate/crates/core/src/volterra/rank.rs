//! Finite-rank reductions of the kernel map: a measure is replaced by a
//! formal combination of kernel sections K_t, with one anchor per
//! partition interval (the interval's left end). Norms of such
//! combinations come from the Gram matrix of pairwise inner products,
//! never from discretizing L2 on a grid, so quadrature is the only
//! error source. An anchor at 0 stands for the zero function and is
//! dropped on construction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::kernel::{kernel_inner, kernel_norm_sq};
use super::measure::IntervalMeasure;
use super::partition::{verify_refinement, DyadicInterval, DyadicPartition};
use super::quad::QuadratureConfig;
use super::KernelConfig;
use crate::error::VolterraError;

/// Memo for kernel inner products; keyed on the bit patterns of the
/// ordered anchor pair, so lookups are exact and the fill order never
/// affects the values.
#[derive(Debug, Default)]
pub struct GramCache {
    map: HashMap<(u64, u64), f64>,
}

impl GramCache {
    pub fn new() -> Self {
        GramCache::default()
    }

    pub fn inner(
        &mut self,
        a: f64,
        b: f64,
        cfg: &KernelConfig,
        quad: &QuadratureConfig,
    ) -> Result<f64, VolterraError> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let key = (lo.to_bits(), hi.to_bits());
        if let Some(&v) = self.map.get(&key) {
            return Ok(v);
        }
        let v = kernel_inner(lo, hi, cfg, quad)?;
        self.map.insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Formal combination sum_i coefficient_i * K_{anchor_i}; anchors are
/// strictly increasing, coefficients nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCombination {
    terms: Vec<(f64, f64)>,
}

impl KernelCombination {
    pub fn zero() -> Self {
        KernelCombination { terms: Vec::new() }
    }

    /// Merge duplicate anchors, drop zero coefficients and the zero
    /// function anchored at 0.
    pub fn from_terms(terms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut collected: Vec<(f64, f64)> = terms
            .into_iter()
            .filter(|&(anchor, _)| anchor != 0.0)
            .collect();
        collected.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite anchors"));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (anchor, coef) in collected {
            match merged.last_mut() {
                Some((last, c)) if *last == anchor => *c += coef,
                _ => merged.push((anchor, coef)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        KernelCombination { terms: merged }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sub(&self, other: &KernelCombination) -> KernelCombination {
        KernelCombination::from_terms(
            self.terms
                .iter()
                .copied()
                .chain(other.terms.iter().map(|&(a, c)| (a, -c))),
        )
    }

    /// Squared norm via the Gram expansion, clamped at zero against
    /// cancellation noise.
    pub fn norm_sq(
        &self,
        cfg: &KernelConfig,
        quad: &QuadratureConfig,
        cache: &mut GramCache,
    ) -> Result<f64, VolterraError> {
        let mut total = 0.0;
        for (i, &(ai, ci)) in self.terms.iter().enumerate() {
            total += ci * ci * cache.inner(ai, ai, cfg, quad)?;
            for &(aj, cj) in &self.terms[i + 1..] {
                total += 2.0 * ci * cj * cache.inner(ai, aj, cfg, quad)?;
            }
        }
        Ok(total.max(0.0))
    }

    pub fn norm(
        &self,
        cfg: &KernelConfig,
        quad: &QuadratureConfig,
        cache: &mut GramCache,
    ) -> Result<f64, VolterraError> {
        Ok(self.norm_sq(cfg, quad, cache)?.sqrt())
    }
}

/// Image of an atomic measure under the kernel map itself: one term per
/// atom, anchored at the atom's location.
pub fn vstar_measure(mu: &IntervalMeasure) -> Result<KernelCombination, VolterraError> {
    if !mu.is_atomic() {
        return Err(VolterraError::DensityUnsupported);
    }
    Ok(KernelCombination::from_terms(mu.atoms().iter().copied()))
}

/// Rank-|part| reduction: coefficient mu(I) on the section anchored at
/// the left end of each partition interval.
pub fn finite_rank_apply(
    mu: &IntervalMeasure,
    part: &DyadicPartition,
    cfg: &KernelConfig,
) -> Result<KernelCombination, VolterraError> {
    part.verify_cover()?;
    Ok(KernelCombination::from_terms(part.intervals.iter().map(
        |iv| (iv.left_end(cfg.r), mu.mass_on(iv.level, iv.index, cfg.r)),
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxErrorReport {
    /// Distance between the measure's kernel image and its rank-reduced image.
    pub err: f64,
    /// 4 / (n ln 2): cap on each diagonal sign-component square.
    pub diag_bound: f64,
    /// 4 (ln 2)^(-1/2) n^(-1/2) plus quadrature slack.
    pub bound: f64,
    pub rank: usize,
    pub pass: bool,
}

/// Build the adaptive partition for mu at parameter n and measure the
/// reduction error exactly via the Gram expansion of the difference
/// terms (+m at each atom, -m at its interval's anchor).
pub fn approximation_error(
    mu: &IntervalMeasure,
    n: u64,
    cfg: &KernelConfig,
    quad: &QuadratureConfig,
) -> Result<ApproxErrorReport, VolterraError> {
    if !mu.is_atomic() {
        return Err(VolterraError::DensityUnsupported);
    }
    let part = super::partition::essential_partition(mu, n, cfg)?;
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for &(x, m) in mu.atoms() {
        let holder = part.locate(x, cfg.r)?;
        terms.push((x, m));
        terms.push((holder.left_end(cfg.r), -m));
    }
    let diff = KernelCombination::from_terms(terms);
    let mut cache = GramCache::new();
    let err = diff.norm(cfg, quad, &mut cache)?;
    let diag_bound = 4.0 / (std::f64::consts::LN_2 * n as f64);
    let bound =
        4.0 / (std::f64::consts::LN_2.sqrt() * (n as f64).sqrt()) + 10.0 * quad.abs_tol;
    Ok(ApproxErrorReport {
        err,
        diag_bound,
        bound,
        rank: part.len(),
        pass: err <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    /// Exact operator gap on unit atomic measures: the worst single-atom
    /// case max_J ||K_{t_J} - K_{t_{E(J)}}|| attains the supremum, since
    /// the image of the unit ball is the convex hull of those extremes.
    pub sup_norm: f64,
    /// 4 (ln n)^(-1/2), from the smoothness modulus at offset n^(-1/4).
    pub bound: f64,
    /// Rank of the gap operator: number of fine intervals.
    pub rank: usize,
    pub pass: bool,
}

/// Gap between the fine-partition reduction and its coarse companion.
pub fn split_norm_bound(
    fine: &DyadicPartition,
    coarse: &DyadicPartition,
    n: u64,
    cfg: &KernelConfig,
    quad: &QuadratureConfig,
) -> Result<SplitReport, VolterraError> {
    if n < 2 {
        return Err(VolterraError::BadConfig {
            detail: "split bound needs n >= 2".into(),
        });
    }
    verify_refinement(fine, coarse)?;
    let mut cache = GramCache::new();
    let mut sup_sq = 0.0f64;
    for iv in &fine.intervals {
        let parent = coarse
            .intervals
            .iter()
            .find(|c| c.contains(iv))
            .expect("refinement verified");
        let a = parent.left_end(cfg.r);
        let b = iv.left_end(cfg.r);
        if a == b {
            continue;
        }
        let dist_sq = kernel_norm_sq(a, cfg)? + kernel_norm_sq(b, cfg)?
            - 2.0 * cache.inner(a, b, cfg, quad)?;
        sup_sq = sup_sq.max(dist_sq.max(0.0));
    }
    let sup_norm = sup_sq.sqrt();
    let bound = 4.0 / (n as f64).ln().sqrt() + 10.0 * quad.abs_tol;
    Ok(SplitReport {
        sup_norm,
        bound,
        rank: fine.len(),
        pass: sup_norm <= bound,
    })
}

/// Net of coefficient profiles j_I / n over the coarse anchors,
/// j_I in [1-n, n-1]: size (2n-1)^{|intervals|}, and rounding any unit
/// measure's interval masses onto the grid costs at most
/// max ||K_t|| * |intervals| / n in norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseNet {
    pub intervals: Vec<DyadicInterval>,
    pub anchors: Vec<f64>,
    pub n: u64,
    pub size: u128,
    pub max_kernel_norm: f64,
    pub error_bound: f64,
}

pub fn ne_net(
    coarse: &DyadicPartition,
    n: u64,
    cfg: &KernelConfig,
) -> Result<CoarseNet, VolterraError> {
    if n == 0 {
        return Err(VolterraError::BadConfig {
            detail: "net parameter n must be positive".into(),
        });
    }
    coarse.verify_cover()?;
    let dims = coarse.intervals.len();
    if dims > 64 {
        return Err(VolterraError::NetBudget { size: u128::MAX });
    }
    let size = (2u128 * n as u128 - 1)
        .checked_pow(dims as u32)
        .ok_or(VolterraError::NetBudget { size: u128::MAX })?;
    let anchors: Vec<f64> = coarse
        .intervals
        .iter()
        .map(|iv| iv.left_end(cfg.r))
        .collect();
    let max_kernel_norm = kernel_norm_sq(cfg.r, cfg)?.sqrt();
    Ok(CoarseNet {
        intervals: coarse.intervals.clone(),
        anchors,
        n,
        size,
        max_kernel_norm,
        error_bound: max_kernel_norm * dims as f64 / n as f64,
    })
}

/// Grid profile nearest to the measure's interval masses: each
/// coordinate is round(mu(I) * n) clamped into [1-n, n-1].
pub fn nearest_profile(net: &CoarseNet, mu: &IntervalMeasure, r: f64) -> Vec<i64> {
    let cap = net.n as i64 - 1;
    net.intervals
        .iter()
        .map(|iv| {
            let scaled = mu.mass_on(iv.level, iv.index, r) * net.n as f64;
            (scaled.round() as i64).clamp(-cap, cap)
        })
        .collect()
}

/// The combination a profile stands for: sum_I (j_I / n) K_{t_I}.
pub fn profile_combination(net: &CoarseNet, profile: &[i64]) -> KernelCombination {
    assert_eq!(profile.len(), net.anchors.len(), "profile dimension");
    KernelCombination::from_terms(
        net.anchors
            .iter()
            .zip(profile)
            .map(|(&t, &j)| (t, j as f64 / net.n as f64)),
    )
}
