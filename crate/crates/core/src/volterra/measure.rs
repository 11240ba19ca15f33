//! Signed measures on the base interval (0, r]: finitely many atoms plus
//! optional piecewise-constant density pieces. Everything the partition
//! machinery needs (variation and signed mass on any binary subinterval)
//! is computed exactly from this representation.
//!
//! Binary intervals are half open: (i r/2^l, (i+1) r/2^l]. Membership is
//! decided by the index formula ceil(x 2^l / r) - 1, so every atom lands
//! in exactly one interval per level, including atoms sitting exactly on
//! a division point (they go left, since the left piece owns its right
//! endpoint).

use serde::{Deserialize, Serialize};

use super::KernelConfig;
use crate::error::VolterraError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    /// Support (lo, hi], constant height.
    pub lo: f64,
    pub hi: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMeasure {
    /// (location, mass); locations strictly inside (0, r], strictly sorted.
    atoms: Vec<(f64, f64)>,
    pieces: Vec<DensityPiece>,
}

/// Level-l binary interval index containing x in (0, r].
pub fn interval_index(x: f64, level: u32, r: f64) -> u64 {
    let scaled = (x / r) * (1u64 << level) as f64;
    let i = scaled.ceil() - 1.0;
    (i.max(0.0) as u64).min((1u64 << level) - 1)
}

impl IntervalMeasure {
    pub fn zero() -> Self {
        IntervalMeasure {
            atoms: Vec::new(),
            pieces: Vec::new(),
        }
    }

    pub fn from_atoms(
        atoms: impl IntoIterator<Item = (f64, f64)>,
        cfg: &KernelConfig,
    ) -> Result<Self, VolterraError> {
        let mut collected: Vec<(f64, f64)> = Vec::new();
        for (x, mass) in atoms {
            if !(x > 0.0) || x > cfg.r {
                return Err(VolterraError::OutOfRange { value: x, r: cfg.r });
            }
            collected.push((x, mass));
        }
        collected.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite locations"));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x, mass) in collected {
            match merged.last_mut() {
                Some((last_x, last_mass)) if *last_x == x => *last_mass += mass,
                _ => merged.push((x, mass)),
            }
        }
        merged.retain(|&(_, m)| m != 0.0);
        Ok(IntervalMeasure {
            atoms: merged,
            pieces: Vec::new(),
        })
    }

    pub fn with_density(mut self, piece: DensityPiece, cfg: &KernelConfig) -> Result<Self, VolterraError> {
        if !(piece.lo >= 0.0 && piece.lo < piece.hi && piece.hi <= cfg.r) {
            return Err(VolterraError::OutOfRange {
                value: piece.hi,
                r: cfg.r,
            });
        }
        if piece.height != 0.0 {
            self.pieces.push(piece);
        }
        Ok(self)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.pieces.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        let atom_part: f64 = self.atoms.iter().map(|&(_, m)| m.abs()).sum();
        let density_part: f64 = self
            .pieces
            .iter()
            .map(|p| p.height.abs() * (p.hi - p.lo))
            .sum();
        atom_part + density_part
    }

    pub fn scale(&self, factor: f64) -> Self {
        IntervalMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|&(x, m)| (x, m * factor))
                .filter(|&(_, m)| m != 0.0)
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| DensityPiece {
                    height: p.height * factor,
                    ..*p
                })
                .filter(|p| p.height != 0.0)
                .collect(),
        }
    }

    fn density_overlap(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut signed = 0.0;
        let mut var = 0.0;
        for p in &self.pieces {
            let span = (p.hi.min(hi) - p.lo.max(lo)).max(0.0);
            signed += p.height * span;
            var += p.height.abs() * span;
        }
        (signed, var)
    }

    /// Signed mass of the level/index binary interval.
    pub fn mass_on(&self, level: u32, index: u64, r: f64) -> f64 {
        let atom_part: f64 = self
            .atoms
            .iter()
            .filter(|&&(x, _)| interval_index(x, level, r) == index)
            .map(|&(_, m)| m)
            .sum();
        let width = r / (1u64 << level) as f64;
        let lo = index as f64 * width;
        atom_part + self.density_overlap(lo, lo + width).0
    }

    /// Variation of the measure on the level/index binary interval.
    pub fn variation_on(&self, level: u32, index: u64, r: f64) -> f64 {
        let atom_part: f64 = self
            .atoms
            .iter()
            .filter(|&&(x, _)| interval_index(x, level, r) == index)
            .map(|&(_, m)| m.abs())
            .sum();
        let width = r / (1u64 << level) as f64;
        let lo = index as f64 * width;
        atom_part + self.density_overlap(lo, lo + width).1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialization cannot fail")
    }

    pub fn from_json(text: &str, cfg: &KernelConfig) -> Result<Self, VolterraError> {
        let raw: IntervalMeasure =
            serde_json::from_str(text).map_err(|e| VolterraError::BadConfig {
                detail: format!("measure parse: {e}"),
            })?;
        let mut out = IntervalMeasure::from_atoms(raw.atoms.iter().copied(), cfg)?;
        for p in raw.pieces {
            out = out.with_density(p, cfg)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> KernelConfig {
        KernelConfig::default()
    }

    #[test]
    fn atom_at_zero_rejected() {
        assert!(matches!(
            IntervalMeasure::from_atoms(vec![(0.0, 1.0)], &cfg()),
            Err(VolterraError::OutOfRange { .. })
        ));
        assert!(IntervalMeasure::from_atoms(vec![(0.11, 1.0)], &cfg()).is_err());
    }

    #[test]
    fn duplicates_merge_and_cancel() {
        let mu = IntervalMeasure::from_atoms(
            vec![(0.05, 1.0), (0.05, -1.0), (0.02, 0.5)],
            &cfg(),
        )
        .unwrap();
        assert_eq!(mu.atoms().len(), 1);
        assert_eq!(mu.total_variation(), 0.5);
    }

    #[test]
    fn index_formula_membership() {
        let r = 0.1;
        // Level 1 splits (0, r] at r/2: the midpoint itself belongs left.
        assert_eq!(interval_index(0.05, 1, r), 0);
        assert_eq!(interval_index(0.050000001, 1, r), 1);
        assert_eq!(interval_index(0.1, 1, r), 1);
        assert_eq!(interval_index(1e-12, 4, r), 0);
        // Right endpoint of the whole interval is the last index at any level.
        assert_eq!(interval_index(0.1, 5, r), 31);
    }

    #[test]
    fn interval_masses_partition_the_total() {
        let mu = IntervalMeasure::from_atoms(
            vec![(0.01, 0.3), (0.04, -0.2), (0.05, 0.1), (0.099, 0.4)],
            &cfg(),
        )
        .unwrap();
        for level in 0..6 {
            let total_mass: f64 = (0..(1u64 << level))
                .map(|i| mu.mass_on(level, i, 0.1))
                .sum();
            let total_var: f64 = (0..(1u64 << level))
                .map(|i| mu.variation_on(level, i, 0.1))
                .sum();
            assert!((total_mass - 0.6).abs() < 1e-15, "level {level}");
            assert!((total_var - 1.0).abs() < 1e-15, "level {level}");
        }
    }

    #[test]
    fn density_variation_is_height_times_length() {
        let mu = IntervalMeasure::zero()
            .with_density(
                DensityPiece {
                    lo: 0.0,
                    hi: 0.1,
                    height: -2.0,
                },
                &cfg(),
            )
            .unwrap();
        assert!((mu.total_variation() - 0.2).abs() < 1e-15);
        // Half the interval carries half the variation.
        assert!((mu.variation_on(1, 0, 0.1) - 0.1).abs() < 1e-15);
        assert!((mu.mass_on(1, 1, 0.1) + 0.1).abs() < 1e-15);
        assert!(!mu.is_atomic());
    }

    #[test]
    fn json_round_trip() {
        let mu = IntervalMeasure::from_atoms(vec![(0.03, 0.5), (0.07, -0.5)], &cfg()).unwrap();
        let back = IntervalMeasure::from_json(&mu.to_json(), &cfg()).unwrap();
        assert_eq!(mu, back);
    }
}
