//! Essential subtrees and the family of admissible subtrees.
//!
//! For a measure of variation at most 1 and a scale n, the essential
//! subtree collects, walking down from the root, every node whose cone
//! variation strictly exceeds level/n. Walks stop at the first failure;
//! the stopped nodes form the outer boundary. Two size bounds make the
//! family small: the terminal antichain has level sum at most n, and the
//! whole subtree has at most n+1 nodes. Enumerating all subtrees obeying
//! the antichain bound (the admissible family) is what turns the
//! approximators into a countable net; the enumerator is cross-checked
//! against an independent counting recursion.

use crate::error::TreeError;
use crate::subtree::Subtree;
use crate::tree::{NodeId, TreeMeasure, ROOT};

/// Result of the essential-subtree walk.
#[derive(Debug, Clone, PartialEq)]
pub struct EssentialResult {
    pub upsilon: Subtree,
    /// Nodes where a walk stopped: children of members outside the set,
    /// or the root itself when the set is empty.
    pub boundary: Vec<NodeId>,
    pub n: u32,
}

const VARIATION_SLACK: f64 = 1e-9;

/// Builds the essential subtree at scale n for a measure with total
/// variation at most 1 (a hair of slack absorbs rounding in normalized
/// random inputs).
pub fn essential_subtree(mu: &TreeMeasure, n: u32) -> Result<EssentialResult, TreeError> {
    if n == 0 {
        return Err(TreeError::InvalidParameter {
            detail: "scale n must be at least 1".into(),
        });
    }
    let total = mu.total_variation();
    if total > 1.0 + VARIATION_SLACK {
        return Err(TreeError::MassExceedsUnit { norm: total });
    }

    let profile = mu.closure_profile();
    let variation = |t: NodeId| profile.get(&t).map(|s| s.variation).unwrap_or(0.0);

    let mut members: Vec<NodeId> = Vec::new();
    let mut boundary: Vec<NodeId> = Vec::new();
    let mut frontier: Vec<NodeId> = vec![ROOT];
    while let Some(t) = frontier.pop() {
        // Strict inequality: ties stop the walk.
        if variation(t) > t.level as f64 / n as f64 {
            members.push(t);
            let (l, r) = t.children()?;
            frontier.push(l);
            frontier.push(r);
        } else {
            boundary.push(t);
        }
    }
    boundary.sort();
    let upsilon = Subtree::from_nodes(members)?;
    Ok(EssentialResult {
        upsilon,
        boundary,
        n,
    })
}

/// Checks the two size bounds and returns (terminal level sum, node count).
pub fn verify_size_bounds(result: &EssentialResult) -> Result<(u64, u64), TreeError> {
    let q_sum = result.upsilon.terminal_level_sum();
    let size = result.upsilon.len() as u64;
    let n = result.n as u64;
    if q_sum > n {
        return Err(TreeError::SizeBoundViolated {
            detail: format!("terminal level sum {q_sum} exceeds n = {n}"),
        });
    }
    if size > n + 1 {
        return Err(TreeError::SizeBoundViolated {
            detail: format!("{size} nodes exceed n + 1 = {}", n + 1),
        });
    }
    Ok((q_sum, size))
}

const ENUMERATION_MAX: u32 = 12;

/// All non-empty subtrees whose terminal antichain has level sum at most n,
/// in a deterministic order. Every essential subtree of a unit-variation
/// measure at scale n belongs to this family.
pub fn enumerate_admissible_subtrees(n: u32) -> Result<Vec<Subtree>, TreeError> {
    if n > ENUMERATION_MAX {
        return Err(TreeError::EnumerationBudget {
            n,
            max: ENUMERATION_MAX,
        });
    }
    // Antichains in the cone of `node` with absolute-level cost <= budget,
    // returned with their exact cost. Includes the empty antichain. Each
    // antichain in the cone of the root arises from exactly one sequence of
    // per-cone choices, so the output has no duplicates.
    fn cone_antichains(node: NodeId, budget: u64) -> Vec<(Vec<NodeId>, u64)> {
        let mut out = vec![(Vec::new(), 0)];
        let cost = node.level as u64;
        if cost > budget {
            return out;
        }
        out.push((vec![node], cost));
        // Splitting across the two child cones: any pair except both-empty
        // duplicates nothing because members determine their cone.
        let (left, right) = match node.children() {
            Ok(pair) => pair,
            Err(_) => return out,
        };
        let left_sets = cone_antichains(left, budget);
        for (ls, lc) in &left_sets {
            if ls.is_empty() {
                continue;
            }
            let right_sets = cone_antichains(right, budget - lc);
            for (rs, rc) in right_sets {
                let mut merged = ls.clone();
                let had_right = !rs.is_empty();
                merged.extend(rs);
                if had_right || !merged.is_empty() {
                    out.push((merged, lc + rc));
                }
            }
        }
        // Right-only antichains.
        for (rs, rc) in cone_antichains(right, budget) {
            if !rs.is_empty() {
                out.push((rs, rc));
            }
        }
        out
    }

    let mut subtrees = Vec::new();
    for (antichain, _) in cone_antichains(ROOT, n as u64) {
        if !antichain.is_empty() {
            subtrees.push(Subtree::from_terminals(antichain)?);
        }
    }
    subtrees.sort();
    subtrees.dedup();
    Ok(subtrees)
}

/// Number of admissible subtrees at scale n, by a cost-resolved counting
/// recursion over cones (independent of the enumerator): per level l, the
/// vector over exact costs c of the number of cone antichains, combined by
/// convolution of the two child cones.
pub fn count_admissible(n: u32) -> Result<u64, TreeError> {
    if n > 48 {
        return Err(TreeError::EnumerationBudget { n, max: 48 });
    }
    let n = n as usize;
    // by_cost[c] = antichains in a level-l cone of exact cost c, empty one
    // included. Start below the budget horizon where only empty survives.
    let mut by_cost = vec![0u128; n + 1];
    by_cost[0] = 1;
    for level in (0..=n).rev() {
        let mut next = vec![0u128; n + 1];
        // Child-cone combinations (both-empty lands at cost 0 and stands in
        // for the empty antichain of this cone).
        for a in 0..=n {
            if by_cost[a] == 0 {
                continue;
            }
            for b in 0..=(n - a) {
                next[a + b] += by_cost[a] * by_cost[b];
            }
        }
        // The singleton {cone root} at cost `level`.
        next[level] += 1;
        by_cost = next;
    }
    let total: u128 = by_cost.iter().sum();
    // Subtract the empty antichain.
    u64::try_from(total - 1).map_err(|_| TreeError::SizeBoundViolated {
        detail: "admissible count exceeds u64".into(),
    })
}

/// Squared approximation error of the essential approximator at scale n,
/// for the critical weight exponent 2.
pub fn essential_residual_sq(mu: &TreeMeasure, n: u32) -> Result<f64, TreeError> {
    let result = essential_subtree(mu, n)?;
    crate::operators::residual_norm_sq(mu, &result.upsilon, 2.0)
}
