//! Finite ancestor-closed node sets. A non-empty subtree always contains the
//! root; it is determined by its terminal antichain (nodes without children
//! in the set), and we round-trip through that antichain for serialization.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;
use crate::tree::{NodeId, ROOT};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Subtree {
    nodes: BTreeSet<NodeId>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    level: u32,
    index: u64,
}

impl Subtree {
    pub fn empty() -> Self {
        Subtree {
            nodes: BTreeSet::new(),
        }
    }

    pub fn root_only() -> Self {
        let mut nodes = BTreeSet::new();
        nodes.insert(ROOT);
        Subtree { nodes }
    }

    /// Validates ancestor closure: every non-root member's parent is present.
    pub fn from_nodes(nodes: impl IntoIterator<Item = NodeId>) -> Result<Self, TreeError> {
        let set: BTreeSet<NodeId> = nodes.into_iter().collect();
        for node in &set {
            if let Some(parent) = node.parent() {
                if !set.contains(&parent) {
                    return Err(TreeError::NotAncestorClosed {
                        level: node.level,
                        index: node.index,
                    });
                }
            }
        }
        Ok(Subtree { nodes: set })
    }

    /// Ancestor closure of an antichain. Rejects inputs where one candidate
    /// is an ancestor of another, so the terminal set of the result is
    /// exactly the input.
    pub fn from_terminals(terminals: impl IntoIterator<Item = NodeId>) -> Result<Self, TreeError> {
        let frontier: BTreeSet<NodeId> = terminals.into_iter().collect();
        for a in &frontier {
            for b in &frontier {
                if a != b && a.is_ancestor_of(*b) {
                    return Err(TreeError::NotAntichain);
                }
            }
        }
        let mut nodes = BTreeSet::new();
        for t in &frontier {
            let mut cursor = *t;
            while nodes.insert(cursor) {
                match cursor.parent() {
                    Some(p) => cursor = p,
                    None => break,
                }
            }
        }
        Ok(Subtree { nodes })
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn max_level(&self) -> Option<u32> {
        self.nodes.iter().map(|t| t.level).max()
    }

    /// Sum of levels over all members.
    pub fn level_sum(&self) -> u64 {
        self.nodes.iter().map(|t| t.level as u64).sum()
    }

    /// Members with no child inside the set. Empty subtree: empty antichain.
    pub fn terminals(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .copied()
            .filter(|t| match t.children() {
                Ok((l, r)) => !self.nodes.contains(&l) && !self.nodes.contains(&r),
                Err(_) => true,
            })
            .collect()
    }

    /// Sum of levels over the terminal antichain only.
    pub fn terminal_level_sum(&self) -> u64 {
        self.terminals().iter().map(|t| t.level as u64).sum()
    }

    /// Nodes one step outside: children of members that are not members,
    /// or the root itself when the subtree is empty.
    pub fn boundary(&self) -> Vec<NodeId> {
        if self.nodes.is_empty() {
            return vec![ROOT];
        }
        let mut out = Vec::new();
        for t in &self.nodes {
            if let Ok((l, r)) = t.children() {
                if !self.nodes.contains(&l) {
                    out.push(l);
                }
                if !self.nodes.contains(&r) {
                    out.push(r);
                }
            }
        }
        out.sort();
        out
    }

    /// Per-level member counts, indexed by level.
    pub fn level_counts(&self) -> Vec<u64> {
        let Some(max) = self.max_level() else {
            return Vec::new();
        };
        let mut counts = vec![0u64; max as usize + 1];
        for t in &self.nodes {
            counts[t.level as usize] += 1;
        }
        counts
    }

    pub fn to_json(&self) -> String {
        let records: Vec<NodeRecord> = self
            .terminals()
            .into_iter()
            .map(|t| NodeRecord {
                level: t.level,
                index: t.index,
            })
            .collect();
        serde_json::to_string(&records).expect("subtree serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let records: Vec<NodeRecord> = serde_json::from_str(text).map_err(|e| TreeError::Serde {
            detail: e.to_string(),
        })?;
        let mut terminals = Vec::with_capacity(records.len());
        for r in records {
            terminals.push(NodeId::new(r.level, r.index)?);
        }
        Subtree::from_terminals(terminals)
    }
}
