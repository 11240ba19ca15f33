//! The summation operator pair on the tree.
//!
//! Forward direction: (Vf)(t) sums w(u) f(u) over the branch from the root
//! to t. Adjoint direction: (V* mu)(t) is the mass of the cone above t, a
//! finitely supported function whenever mu is. The adjoint of a point mass
//! is the indicator of its branch, which is the building block for every
//! net construction downstream.

use crate::error::TreeError;
use crate::subtree::Subtree;
use crate::tree::{NodeId, TreeMeasure, Weight};
use crate::vector::WeightedVector;

/// Squared operator norm at finite depth: sum of (1+l)^-beta over levels
/// 0..=depth. Summed from the deepest level up so the small terms are
/// accumulated before the large ones.
pub fn operator_norm_sq(beta: f64, depth: u32) -> Result<f64, TreeError> {
    let weight = Weight::new(beta)?;
    let mut acc = 0.0;
    for level in (0..=depth).rev() {
        acc += weight.at_level(level);
    }
    Ok(acc)
}

/// Branch sum (Vf)(t) = sum over ancestors u of t (inclusive) of w(u) f(u).
pub fn apply_v(f: &WeightedVector, t: NodeId) -> f64 {
    let weight = Weight::new(f.beta()).expect("beta validated at construction");
    let mut acc = 0.0;
    for level in 0..=t.level {
        let u = t.ancestor_at(level).expect("level <= t.level");
        let v = f.value_at(u);
        if v != 0.0 {
            acc += weight.at(u) * v;
        }
    }
    acc
}

/// Adjoint image V* mu as a weighted vector: value at t is the cone mass
/// above t. `depth` is a contract check only; it must dominate the support.
pub fn apply_vstar(mu: &TreeMeasure, beta: f64, depth: u32) -> Result<WeightedVector, TreeError> {
    let support_depth = mu.max_level();
    if depth < support_depth {
        return Err(TreeError::DepthTooSmall {
            depth,
            support: support_depth,
        });
    }
    let entries = mu
        .closure_profile()
        .into_iter()
        .map(|(t, sums)| (t, sums.mass));
    WeightedVector::from_entries(beta, entries)
}

/// V* of a unit point mass at t: the 0/1 indicator of the branch to t.
pub fn branch_vector(t: NodeId, beta: f64) -> Result<WeightedVector, TreeError> {
    let entries = (0..=t.level).map(|level| (t.ancestor_at(level).expect("on branch"), 1.0));
    WeightedVector::from_entries(beta, entries)
}

/// Pairing sum_t (Vf)(t) mu(t), evaluated directly on the support of mu.
/// Equals the weighted inner product of f with V* mu.
pub fn measure_pairing(f: &WeightedVector, mu: &TreeMeasure) -> f64 {
    mu.atoms().map(|(t, mass)| apply_v(f, t) * mass).sum()
}

/// Pushes every atom up to its deepest ancestor inside `upsilon`. Atoms
/// with no ancestor in the set (only possible when the set is empty) are
/// dropped.
pub fn flush_projection(mu: &TreeMeasure, upsilon: &Subtree) -> TreeMeasure {
    if upsilon.is_empty() {
        return TreeMeasure::zero();
    }
    let cap = upsilon.max_level().expect("non-empty");
    let mut moved: Vec<(NodeId, f64)> = Vec::new();
    for (t, mass) in mu.atoms() {
        let mut level = t.level.min(cap);
        loop {
            let anchor = t.ancestor_at(level).expect("level <= t.level");
            if upsilon.contains(anchor) {
                moved.push((anchor, mass));
                break;
            }
            // Root belongs to every non-empty ancestor-closed set, so the
            // walk always lands.
            debug_assert!(level > 0);
            level -= 1;
        }
    }
    TreeMeasure::from_atoms(moved)
}

/// Finite-rank approximation of V* mu attached to a subtree: flush the
/// measure into the subtree, then apply the adjoint. The image is supported
/// inside the subtree by construction.
pub fn approximator_apply(
    mu: &TreeMeasure,
    upsilon: &Subtree,
    beta: f64,
    depth: u32,
) -> Result<WeightedVector, TreeError> {
    let support_depth = mu.max_level();
    if depth < support_depth {
        return Err(TreeError::DepthTooSmall {
            depth,
            support: support_depth,
        });
    }
    let flushed = flush_projection(mu, upsilon);
    apply_vstar(&flushed, beta, depth)
}

/// Squared error of the subtree approximation, computed without forming the
/// difference: outside the subtree the approximator vanishes while the cone
/// masses of mu and of its flush agree inside it, so the error is the
/// weighted square sum of cone masses over closure nodes outside the set.
pub fn residual_norm_sq(mu: &TreeMeasure, upsilon: &Subtree, beta: f64) -> Result<f64, TreeError> {
    let weight = Weight::new(beta)?;
    let mut acc = 0.0;
    for (t, sums) in mu.closure_profile() {
        if !upsilon.contains(t) {
            acc += weight.at(t) * sums.mass * sums.mass;
        }
    }
    Ok(acc)
}
