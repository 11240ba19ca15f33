//! Implicit binary tree addressing, level weights, and finitely supported
//! signed measures.
//!
//! Nodes are never materialized: a node is the pair (level, index) with
//! `index < 2^level`, children of `(l, i)` are `(l+1, 2i)` and `(l+1, 2i+1)`,
//! and all structure is arithmetic on those pairs. A measure is a sparse map
//! from nodes to nonzero masses; its mass and variation functionals over
//! offspring cones are computed by one bottom-up pass over the ancestor
//! closure of the support, never by enumerating offspring.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;

/// Deepest representable level. Indices fit in u64 with margin; exceeding
/// this is an error, not wraparound.
pub const MAX_LEVEL: u32 = 62;

/// A binary-tree node addressed as (level, index within level).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub level: u32,
    pub index: u64,
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.index)
    }
}

pub const ROOT: NodeId = NodeId { level: 0, index: 0 };

impl NodeId {
    pub fn new(level: u32, index: u64) -> Result<Self, TreeError> {
        if level > MAX_LEVEL {
            return Err(TreeError::DepthLimit { level });
        }
        if index >> level != 0 {
            return Err(TreeError::InvalidIndex { level, index });
        }
        Ok(NodeId { level, index })
    }

    pub fn is_root(self) -> bool {
        self.level == 0
    }

    /// Both children, or an error at the depth cap.
    pub fn children(self) -> Result<(NodeId, NodeId), TreeError> {
        if self.level >= MAX_LEVEL {
            return Err(TreeError::DepthLimit { level: self.level + 1 });
        }
        let l = self.level + 1;
        let i = self.index << 1;
        Ok((NodeId { level: l, index: i }, NodeId { level: l, index: i | 1 }))
    }

    pub fn parent(self) -> Option<NodeId> {
        if self.level == 0 {
            None
        } else {
            Some(NodeId { level: self.level - 1, index: self.index >> 1 })
        }
    }

    /// The ancestor at `level`, or None when `level` exceeds this node's.
    pub fn ancestor_at(self, level: u32) -> Option<NodeId> {
        if level > self.level {
            return None;
        }
        Some(NodeId { level, index: self.index >> (self.level - level) })
    }

    /// Whether `self` lies on the branch from the root to `other` (inclusive).
    pub fn is_ancestor_of(self, other: NodeId) -> bool {
        other.ancestor_at(self.level) == Some(self)
    }

    /// Level of the deepest common ancestor.
    pub fn lca_level(self, other: NodeId) -> u32 {
        let m = self.level.min(other.level);
        let a = self.index >> (self.level - m);
        let b = other.index >> (other.level - m);
        // Common prefix length of the two m-bit paths.
        m - (64 - (a ^ b).leading_zeros())
    }
}

/// Level weight w(t) = (1+|t|)^(-beta) with beta > 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    beta: f64,
}

impl Weight {
    pub fn new(beta: f64) -> Result<Self, TreeError> {
        if !(beta > 1.0) {
            return Err(TreeError::InvalidBeta { beta });
        }
        Ok(Weight { beta })
    }

    pub fn beta(self) -> f64 {
        self.beta
    }

    pub fn at_level(self, level: u32) -> f64 {
        (1.0 + level as f64).powf(-self.beta)
    }

    pub fn at(self, node: NodeId) -> f64 {
        self.at_level(node.level)
    }
}

/// A finitely supported signed measure on the tree. Entries are nonzero;
/// iteration order is (level, index), which fixes every summation order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TreeMeasure {
    support: BTreeMap<NodeId, f64>,
}

impl TreeMeasure {
    pub fn zero() -> Self {
        TreeMeasure { support: BTreeMap::new() }
    }

    pub fn delta(node: NodeId) -> Self {
        let mut support = BTreeMap::new();
        support.insert(node, 1.0);
        TreeMeasure { support }
    }

    /// Builds from atoms, combining duplicates and dropping exact zeros.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (NodeId, f64)>) -> Self {
        let mut support: BTreeMap<NodeId, f64> = BTreeMap::new();
        for (node, mass) in atoms {
            *support.entry(node).or_insert(0.0) += mass;
        }
        support.retain(|_, m| *m != 0.0);
        TreeMeasure { support }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.support.iter().map(|(&n, &m)| (n, m))
    }

    pub fn atom_count(&self) -> usize {
        self.support.len()
    }

    pub fn mass_at(&self, node: NodeId) -> f64 {
        self.support.get(&node).copied().unwrap_or(0.0)
    }

    pub fn max_level(&self) -> u32 {
        self.support.keys().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn total_variation(&self) -> f64 {
        self.support.values().map(|m| m.abs()).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        TreeMeasure::from_atoms(self.atoms().map(|(n, m)| (n, m * factor)))
    }

    pub fn add(&self, other: &TreeMeasure) -> Self {
        TreeMeasure::from_atoms(self.atoms().chain(other.atoms()))
    }

    /// s_mu(t): the signed mass of the offspring cone of t (t included).
    pub fn mass(&self, t: NodeId) -> f64 {
        self.atoms()
            .filter(|(u, _)| t.is_ancestor_of(*u))
            .map(|(_, m)| m)
            .sum()
    }

    /// ||mu||(t): the variation of the offspring cone of t.
    pub fn variation(&self, t: NodeId) -> f64 {
        self.atoms()
            .filter(|(u, _)| t.is_ancestor_of(*u))
            .map(|(_, m)| m.abs())
            .sum()
    }

    /// Atom-wise sign split (mu_plus, mu_minus): mu = mu_plus - mu_minus,
    /// both nonnegative with disjoint supports.
    pub fn hahn_split(&self) -> (TreeMeasure, TreeMeasure) {
        let mut plus = BTreeMap::new();
        let mut minus = BTreeMap::new();
        for (node, mass) in self.atoms() {
            if mass > 0.0 {
                plus.insert(node, mass);
            } else {
                minus.insert(node, -mass);
            }
        }
        (TreeMeasure { support: plus }, TreeMeasure { support: minus })
    }

    /// Mass and variation on every node of the support's ancestor closure.
    /// One pass of O(|support| * depth); nodes absent from the result have
    /// zero mass and variation.
    pub fn closure_profile(&self) -> BTreeMap<NodeId, ConeSums> {
        let mut out: BTreeMap<NodeId, ConeSums> = BTreeMap::new();
        for (node, mass) in self.atoms() {
            for level in 0..=node.level {
                let anc = node.ancestor_at(level).expect("level <= node.level");
                let entry = out.entry(anc).or_default();
                entry.mass += mass;
                entry.variation += mass.abs();
            }
        }
        out
    }

    /// Serializes to the JSON array form [{"level", "index", "mass"}].
    pub fn to_json(&self) -> String {
        let records: Vec<AtomRecord> = self
            .atoms()
            .map(|(n, m)| AtomRecord { level: n.level, index: n.index, mass: m })
            .collect();
        serde_json::to_string(&records).expect("atom records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let records: Vec<AtomRecord> =
            serde_json::from_str(text).map_err(|e| TreeError::Serde { detail: e.to_string() })?;
        let mut atoms = Vec::with_capacity(records.len());
        for r in records {
            atoms.push((NodeId::new(r.level, r.index)?, r.mass));
        }
        Ok(TreeMeasure::from_atoms(atoms))
    }
}

/// Cone sums accumulated on one closure node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConeSums {
    pub mass: f64,
    pub variation: f64,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    level: u32,
    index: u64,
    mass: f64,
}
