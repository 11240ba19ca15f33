//! Adaptive binary partitions of (0, r] driven by the variation of a
//! measure: an interval at depth l is divided exactly when the measure's
//! variation on it reaches l/n. The root always divides, so the result
//! has at least two intervals. Division stops fast away from the mass,
//! which is what caps the partition size at 2(n + 1).

use serde::{Deserialize, Serialize};

use super::measure::IntervalMeasure;
use super::KernelConfig;
use crate::error::VolterraError;

const VARIATION_SLACK: f64 = 1e-9;

/// Binary subinterval (index r/2^level, (index+1) r/2^level].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub const ROOT: DyadicInterval = DyadicInterval { level: 0, index: 0 };

    pub fn left_end(&self, r: f64) -> f64 {
        self.index as f64 * self.length(r)
    }

    pub fn right_end(&self, r: f64) -> f64 {
        (self.index + 1) as f64 * self.length(r)
    }

    pub fn length(&self, r: f64) -> f64 {
        r / (1u64 << self.level) as f64
    }

    pub fn children(&self) -> (DyadicInterval, DyadicInterval) {
        let level = self.level + 1;
        (
            DyadicInterval {
                level,
                index: 2 * self.index,
            },
            DyadicInterval {
                level,
                index: 2 * self.index + 1,
            },
        )
    }

    pub fn ancestor_at(&self, level: u32) -> DyadicInterval {
        assert!(level <= self.level, "ancestor level above own level");
        DyadicInterval {
            level,
            index: self.index >> (self.level - level),
        }
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && other.ancestor_at(self.level) == *self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    /// Kept (undivided) intervals, sorted left to right; a disjoint cover of (0, r].
    pub intervals: Vec<DyadicInterval>,
    /// Every interval that was divided while building, sorted.
    pub divided: Vec<DyadicInterval>,
}

impl DyadicPartition {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Kept interval containing x, found by binary-interval membership.
    pub fn locate(&self, x: f64, r: f64) -> Result<DyadicInterval, VolterraError> {
        if !(x > 0.0) || x > r {
            return Err(VolterraError::OutOfRange { value: x, r });
        }
        for iv in &self.intervals {
            let idx = super::measure::interval_index(x, iv.level, r);
            if idx == iv.index {
                return Ok(*iv);
            }
        }
        Err(VolterraError::NotCovered { location: x })
    }

    /// Exact disjoint-cover check in integer arithmetic: each interval at
    /// level l occupies 2^(L-l) slots at the deepest level L, and the
    /// sorted slots must tile 0..2^L without gap or overlap.
    pub fn verify_cover(&self) -> Result<(), VolterraError> {
        let max_level = self
            .intervals
            .iter()
            .map(|iv| iv.level)
            .max()
            .ok_or_else(|| VolterraError::BadPartition {
                detail: "empty interval list".into(),
            })?;
        let mut slots: Vec<(u64, u64)> = self
            .intervals
            .iter()
            .map(|iv| {
                let shift = max_level - iv.level;
                (iv.index << shift, 1u64 << shift)
            })
            .collect();
        slots.sort_unstable();
        let mut cursor = 0u64;
        for (pos, width) in slots {
            if pos != cursor {
                return Err(VolterraError::BadPartition {
                    detail: format!("gap or overlap at slot {pos}, expected {cursor}"),
                });
            }
            cursor = pos + width;
        }
        if cursor != 1u64 << max_level {
            return Err(VolterraError::BadPartition {
                detail: "cover does not reach the right endpoint".into(),
            });
        }
        Ok(())
    }
}

/// Build the adaptive partition for mu at refusal parameter n. Division
/// rule: an interval at level l divides when the variation on it is at
/// least l/n. The total variation must not exceed one.
pub fn essential_partition(
    mu: &IntervalMeasure,
    n: u64,
    cfg: &KernelConfig,
) -> Result<DyadicPartition, VolterraError> {
    if n == 0 || n > 60 {
        return Err(VolterraError::BadConfig {
            detail: format!("partition parameter n={n} outside 1..=60"),
        });
    }
    let norm = mu.total_variation();
    if norm > 1.0 + VARIATION_SLACK {
        return Err(VolterraError::MassExceedsUnit { norm });
    }
    let mut kept: Vec<DyadicInterval> = Vec::new();
    let mut divided: Vec<DyadicInterval> = Vec::new();
    let mut stack = vec![DyadicInterval::ROOT];
    while let Some(iv) = stack.pop() {
        let threshold = iv.level as f64 / n as f64;
        let var = mu.variation_on(iv.level, iv.index, cfg.r);
        if var >= threshold {
            divided.push(iv);
            let (a, b) = iv.children();
            stack.push(b);
            stack.push(a);
        } else {
            kept.push(iv);
        }
    }
    kept.sort_unstable();
    divided.sort_unstable();
    let part = DyadicPartition {
        intervals: kept,
        divided,
    };
    part.verify_cover()?;
    Ok(part)
}

/// Sum of level * q_level over the division tree, where q_l counts
/// divided intervals at level l with no divided child.
pub fn terminal_weight(part: &DyadicPartition) -> u64 {
    let mut weighted = 0u64;
    for iv in &part.divided {
        let (a, b) = iv.children();
        let child_divided =
            part.divided.binary_search(&a).is_ok() || part.divided.binary_search(&b).is_ok();
        if !child_divided {
            weighted += iv.level as u64;
        }
    }
    weighted
}

/// Size certificates: returns (interval count, sum of level * q_level).
/// Errors unless count <= 2(n+1) and the weighted sum <= n.
pub fn verify_essential_sizes(
    part: &DyadicPartition,
    n: u64,
) -> Result<(usize, u64), VolterraError> {
    let count = part.intervals.len();
    let weighted = terminal_weight(part);
    if count as u64 > 2 * (n + 1) {
        return Err(VolterraError::BadPartition {
            detail: format!("{count} intervals exceeds cap {}", 2 * (n + 1)),
        });
    }
    if weighted > n {
        return Err(VolterraError::BadPartition {
            detail: format!("weighted terminal sum {weighted} exceeds {n}"),
        });
    }
    Ok((count, weighted))
}

/// Depth cap for the coarse companion partition: ceil(log2(n) / 4).
pub fn auxiliary_depth(n: u64) -> u32 {
    ((n as f64).log2() / 4.0).ceil() as u32
}

/// Coarsen the adaptive partition to level at most auxiliary_depth(n):
/// deep intervals are replaced by their ancestor at that level, shallow
/// ones are kept as they are. The result is again a disjoint cover and
/// the input refines it.
pub fn auxiliary_partition(
    part: &DyadicPartition,
    n: u64,
) -> Result<DyadicPartition, VolterraError> {
    if n == 0 {
        return Err(VolterraError::BadConfig {
            detail: "auxiliary partition needs n >= 1".into(),
        });
    }
    let m = auxiliary_depth(n);
    let mut coarse: Vec<DyadicInterval> = part
        .intervals
        .iter()
        .map(|iv| {
            if iv.level <= m {
                *iv
            } else {
                iv.ancestor_at(m)
            }
        })
        .collect();
    coarse.sort_unstable();
    coarse.dedup();
    let out = DyadicPartition {
        intervals: coarse,
        divided: Vec::new(),
    };
    out.verify_cover()?;
    if out.len() as u64 > 1u64 << m {
        return Err(VolterraError::BadPartition {
            detail: format!("coarse partition larger than 2^{m}"),
        });
    }
    verify_refinement(part, &out)?;
    Ok(out)
}

/// Every fine interval must sit inside exactly one coarse interval.
pub fn verify_refinement(
    fine: &DyadicPartition,
    coarse: &DyadicPartition,
) -> Result<(), VolterraError> {
    for iv in &fine.intervals {
        let hits = coarse.intervals.iter().filter(|c| c.contains(iv)).count();
        if hits != 1 {
            return Err(VolterraError::BadPartition {
                detail: format!(
                    "interval level {} index {} has {hits} coarse parents",
                    iv.level, iv.index
                ),
            });
        }
    }
    Ok(())
}
