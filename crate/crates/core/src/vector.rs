//! Finitely supported functions on the tree under the weighted inner
//! product sum_t (1+|t|)^(-beta) f(t) g(t).
//!
//! Entries are kept sorted by node and free of exact zeros, so equality of
//! the entry lists is equality of the functions and merges are linear scans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;
use crate::tree::{NodeId, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    beta: f64,
    entries: Vec<(NodeId, f64)>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    level: u32,
    index: u64,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct VectorRecord {
    beta: f64,
    entries: Vec<EntryRecord>,
}

impl WeightedVector {
    pub fn zero(beta: f64) -> Result<Self, TreeError> {
        Weight::new(beta)?;
        Ok(WeightedVector {
            beta,
            entries: Vec::new(),
        })
    }

    /// Collects entries, summing duplicates and dropping exact zeros.
    pub fn from_entries(
        beta: f64,
        entries: impl IntoIterator<Item = (NodeId, f64)>,
    ) -> Result<Self, TreeError> {
        Weight::new(beta)?;
        let mut map: BTreeMap<NodeId, f64> = BTreeMap::new();
        for (node, value) in entries {
            *map.entry(node).or_insert(0.0) += value;
        }
        map.retain(|_, v| *v != 0.0);
        Ok(WeightedVector {
            beta,
            entries: map.into_iter().collect(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn value_at(&self, node: NodeId) -> f64 {
        match self.entries.binary_search_by(|(u, _)| u.cmp(&node)) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    fn check_beta(&self, other: &WeightedVector) -> Result<(), TreeError> {
        if self.beta != other.beta {
            return Err(TreeError::BetaMismatch {
                left: self.beta,
                right: other.beta,
            });
        }
        Ok(())
    }

    /// Merge with coefficients: self + c * other.
    pub fn add_scaled(&self, other: &WeightedVector, c: f64) -> Result<Self, TreeError> {
        self.check_beta(other)?;
        let mut merged: Vec<(NodeId, f64)> = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let take_left = match (self.entries.get(i), other.entries.get(j)) {
                (Some((a, _)), Some((b, _))) => {
                    if a == b {
                        let v = self.entries[i].1 + c * other.entries[j].1;
                        if v != 0.0 {
                            merged.push((*a, v));
                        }
                        i += 1;
                        j += 1;
                        continue;
                    }
                    a < b
                }
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => unreachable!(),
            };
            if take_left {
                merged.push(self.entries[i]);
                i += 1;
            } else {
                let (node, v) = other.entries[j];
                let v = c * v;
                if v != 0.0 {
                    merged.push((node, v));
                }
                j += 1;
            }
        }
        Ok(WeightedVector {
            beta: self.beta,
            entries: merged,
        })
    }

    pub fn add(&self, other: &WeightedVector) -> Result<Self, TreeError> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &WeightedVector) -> Result<Self, TreeError> {
        self.add_scaled(other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return WeightedVector {
                beta: self.beta,
                entries: Vec::new(),
            };
        }
        WeightedVector {
            beta: self.beta,
            entries: self.entries.iter().map(|&(t, v)| (t, c * v)).collect(),
        }
    }

    /// Weighted inner product; entries are matched with a linear merge scan.
    pub fn inner(&self, other: &WeightedVector) -> Result<f64, TreeError> {
        self.check_beta(other)?;
        let weight = Weight::new(self.beta)?;
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, va) = self.entries[i];
            let (b, vb) = other.entries[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += weight.at(a) * va * vb;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        let weight = Weight::new(self.beta).expect("beta validated at construction");
        self.entries
            .iter()
            .map(|&(t, v)| weight.at(t) * v * v)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &WeightedVector) -> Result<f64, TreeError> {
        Ok(self.sub(other)?.norm_sq())
    }

    pub fn dist(&self, other: &WeightedVector) -> Result<f64, TreeError> {
        Ok(self.dist_sq(other)?.sqrt())
    }

    pub fn to_json(&self) -> String {
        let record = VectorRecord {
            beta: self.beta,
            entries: self
                .entries
                .iter()
                .map(|&(t, v)| EntryRecord {
                    level: t.level,
                    index: t.index,
                    value: v,
                })
                .collect(),
        };
        serde_json::to_string(&record).expect("vector serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let record: VectorRecord = serde_json::from_str(text).map_err(|e| TreeError::Serde {
            detail: e.to_string(),
        })?;
        let mut entries = Vec::with_capacity(record.entries.len());
        for e in record.entries {
            entries.push((NodeId::new(e.level, e.index)?, e.value));
        }
        WeightedVector::from_entries(record.beta, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ROOT;

    fn node(level: u32, index: u64) -> NodeId {
        NodeId::new(level, index).unwrap()
    }

    #[test]
    fn inner_product_weights_by_level() {
        // Root carries weight 1, a level-1 node carries 2^-2 for beta = 2.
        let f = WeightedVector::from_entries(2.0, vec![(ROOT, 1.0), (node(1, 0), 2.0)]).unwrap();
        let g = WeightedVector::from_entries(2.0, vec![(ROOT, 3.0), (node(1, 0), 5.0)]).unwrap();
        let got = f.inner(&g).unwrap();
        assert!((got - (3.0 + 0.25 * 10.0)).abs() < 1e-15);
    }

    #[test]
    fn norm_matches_inner_with_self() {
        let f =
            WeightedVector::from_entries(1.5, vec![(node(2, 3), -1.0), (node(5, 17), 0.5)]).unwrap();
        assert!((f.norm_sq() - f.inner(&f).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn add_cancels_to_zero() {
        let f = WeightedVector::from_entries(2.0, vec![(node(3, 1), 4.0)]).unwrap();
        let g = f.scale(-1.0);
        let sum = f.add(&g).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn duplicates_combine_and_zeros_drop() {
        let f = WeightedVector::from_entries(
            2.0,
            vec![(node(1, 1), 1.0), (node(1, 1), -1.0), (node(2, 0), 2.0)],
        )
        .unwrap();
        assert_eq!(f.support_size(), 1);
        assert_eq!(f.value_at(node(2, 0)), 2.0);
    }

    #[test]
    fn beta_mismatch_rejected() {
        let f = WeightedVector::zero(2.0).unwrap();
        let g = WeightedVector::zero(3.0).unwrap();
        assert!(matches!(
            f.inner(&g),
            Err(TreeError::BetaMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let f = WeightedVector::from_entries(
            2.5,
            vec![(node(4, 9), 0.125), (ROOT, -3.0), (node(10, 1000), 7.0)],
        )
        .unwrap();
        let back = WeightedVector::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn dist_is_symmetric() {
        let f = WeightedVector::from_entries(2.0, vec![(node(2, 1), 1.0)]).unwrap();
        let g = WeightedVector::from_entries(2.0, vec![(node(2, 2), 1.0)]).unwrap();
        let d1 = f.dist(&g).unwrap();
        let d2 = g.dist(&f).unwrap();
        assert_eq!(d1, d2);
        // Disjoint supports at level 2, beta 2: dist^2 = 2 * 3^-2.
        assert!((d1 * d1 - 2.0 / 9.0).abs() < 1e-15);
    }
}
