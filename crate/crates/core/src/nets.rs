//! Finite nets and packings in the weighted image space.
//!
//! Three constructions:
//! - the truncated branch family (all branch indicators down to a level),
//!   whose covering radius over deep branches has a closed-form tail bound;
//! - a packing of pairwise-orthogonal branch differences that witnesses
//!   lower bounds;
//! - coefficient grids: per-subtree lattice nets for images of measures
//!   flushed into a subtree, with a rounding certificate for the radius,
//!   plus the odd-valued head grid used to discretize bounded functions on
//!   the top of the tree.

use std::collections::BTreeSet;

use crate::error::{CoverError, TreeError};
use crate::operators::branch_vector;
use crate::subtree::Subtree;
use crate::tree::{NodeId, TreeMeasure, Weight};
use crate::vector::WeightedVector;

fn weight_prefix(beta: f64, depth: u32) -> Result<Vec<f64>, TreeError> {
    let weight = Weight::new(beta)?;
    let mut prefix = Vec::with_capacity(depth as usize + 1);
    let mut acc = 0.0;
    for level in 0..=depth {
        acc += weight.at_level(level);
        prefix.push(acc);
    }
    Ok(prefix)
}

const NET_DEPTH_MAX: u32 = 16;

/// Branch indicators of every node at level <= n: the canonical net for
/// the image of the unit ball of point masses.
pub fn dn_net(n: u32, beta: f64) -> Result<Vec<WeightedVector>, CoverError> {
    if n > NET_DEPTH_MAX {
        return Err(CoverError::NetBudget {
            size: 1u128 << (n.min(127) + 1),
        });
    }
    let mut points = Vec::new();
    for level in 0..=n {
        for index in 0..(1u64 << level) {
            let node = NodeId { level, index };
            points.push(branch_vector(node, beta).map_err(|_| CoverError::MixedBeta {
                left: beta,
                right: beta,
            })?);
        }
    }
    Ok(points)
}

/// Covering radius bound for the truncated branch family against branches
/// down to `depth`: the square root of the weight tail over levels
/// n+1 ..= depth, summed smallest-first.
pub fn dn_net_bound(n: u32, beta: f64, depth: u32) -> Result<f64, TreeError> {
    let weight = Weight::new(beta)?;
    if depth <= n {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for level in (n + 1..=depth).rev() {
        acc += weight.at_level(level);
    }
    Ok(acc.sqrt())
}

/// Exact squared distance from the branch of t to the truncated family:
/// the nearest member is the branch of the level-n ancestor (or of t
/// itself when t is shallow), leaving the weight mass strictly below n.
pub fn dn_distance_sq(t: NodeId, n: u32, beta: f64) -> Result<f64, TreeError> {
    let prefix = weight_prefix(beta, t.level)?;
    let cut = t.level.min(n) as usize;
    Ok(prefix[t.level as usize] - prefix[cut])
}

const PACKING_MAX: u32 = 16;

/// 2^n measures whose adjoint images are pairwise orthogonal: for each
/// level-n node, the difference between the point mass at its leftmost
/// level-2n descendant and the point mass at the node itself. The images
/// live on disjoint path segments below distinct level-n nodes.
pub fn packing_family(n: u32, beta: f64) -> Result<Vec<TreeMeasure>, CoverError> {
    Weight::new(beta).map_err(|_| CoverError::MixedBeta {
        left: beta,
        right: beta,
    })?;
    if n == 0 || n > PACKING_MAX {
        return Err(CoverError::PackingBudget {
            n,
            max: PACKING_MAX,
        });
    }
    let mut family = Vec::with_capacity(1usize << n);
    for j in 0..(1u64 << n) {
        let shallow = NodeId { level: n, index: j };
        let deep = NodeId {
            level: 2 * n,
            index: j << n,
        };
        family.push(TreeMeasure::from_atoms(vec![(deep, 1.0), (shallow, -1.0)]));
    }
    Ok(family)
}

/// Pairwise distance of the packing images: sqrt of twice the weight mass
/// over levels n+1 ..= 2n.
pub fn packing_separation(n: u32, beta: f64) -> Result<f64, TreeError> {
    let weight = Weight::new(beta)?;
    let mut acc = 0.0;
    for level in ((n + 1)..=(2 * n)).rev() {
        acc += weight.at_level(level);
    }
    Ok((2.0 * acc).sqrt())
}

/// Largest odd integer at most n (n >= 1).
fn max_odd(n: u32) -> i64 {
    if n % 2 == 0 {
        n as i64 - 1
    } else {
        n as i64
    }
}

/// Nearest point of the odd grid {j/n : j odd, |j| <= n} to x, ties and
/// the origin resolved upward. Error is at most 1/n for |x| <= 1.
pub fn odd_grid_round(x: f64, n: u32) -> f64 {
    debug_assert!(n >= 1);
    // Odd integers are 2m+1; the nearest one to y = x*n has
    // m = floor((y - 1)/2 + 1/2), which sends exact midpoints up.
    let y = x * n as f64;
    let m = ((y - 1.0) / 2.0 + 0.5).floor();
    let j = (2.0 * m + 1.0) as i64;
    let j = j.clamp(-max_odd(n), max_odd(n));
    j as f64 / n as f64
}

/// Number of grid values per node: all odd j with |j| <= n.
pub fn odd_grid_choices(n: u32) -> u64 {
    2 * ((n as u64 + 1) / 2)
}

/// All nodes at levels 0 ..= split_depth (the head block).
pub fn head_nodes(split_depth: u32) -> Vec<NodeId> {
    let mut nodes = Vec::new();
    for level in 0..=split_depth {
        for index in 0..(1u64 << level) {
            nodes.push(NodeId { level, index });
        }
    }
    nodes
}

/// Default head depth for scale n: grows like (ln n)/4, never below 1.
pub fn default_split_depth(n: u32) -> u32 {
    debug_assert!(n >= 1);
    ((n as f64).ln() / 4.0).floor().max(1.0) as u32
}

/// Cardinality of the head grid: choices to the power of the block size.
pub fn head_grid_size(n: u32, split_depth: u32) -> u128 {
    let block = (1u128 << (split_depth + 1)) - 1;
    let choices = odd_grid_choices(n) as u128;
    let mut acc: u128 = 1;
    for _ in 0..block {
        acc = acc.saturating_mul(choices);
    }
    acc
}

/// Rounds f node-wise on the head block to the odd grid, discarding
/// everything below it. For |f| <= 1 on the block the squared error on the
/// block is at most (block size)/n^2.
pub fn head_grid_nearest(
    f: &WeightedVector,
    n: u32,
    split_depth: u32,
) -> Result<WeightedVector, TreeError> {
    if n == 0 {
        return Err(TreeError::InvalidParameter {
            detail: "grid scale n must be at least 1".into(),
        });
    }
    let entries = head_nodes(split_depth)
        .into_iter()
        .map(|t| (t, odd_grid_round(f.value_at(t), n)));
    WeightedVector::from_entries(f.beta(), entries)
}

/// One member net: finitely many points plus a radius certified for every
/// admissible input attached to the member.
#[derive(Debug, Clone)]
pub struct MemberNet {
    pub points: Vec<WeightedVector>,
    pub radius: f64,
}

/// Coefficient-grid net for images of measures flushed into `upsilon`:
/// all combinations sum_u (j_u/m) b_u over integer j with sum |j_u| <= m,
/// where b_u is the branch indicator of u.
///
/// Radius certificate: a measure supported in the subtree with variation
/// at most 1 has coefficients c_u with sum |c_u| <= 1; truncating c_u * m
/// toward zero keeps the integer budget and moves each coordinate by at
/// most 1/m, so the image lies within sum_u ||b_u|| / m of a grid point.
pub fn subtree_grid_net(
    upsilon: &Subtree,
    m: u32,
    beta: f64,
    max_points: u128,
) -> Result<MemberNet, CoverError> {
    if m == 0 {
        return Err(CoverError::ZeroBalls);
    }
    let nodes: Vec<NodeId> = upsilon.iter().collect();
    let branches: Vec<WeightedVector> = nodes
        .iter()
        .map(|&u| {
            branch_vector(u, beta).map_err(|_| CoverError::MixedBeta {
                left: beta,
                right: beta,
            })
        })
        .collect::<Result<_, _>>()?;
    let count = cross_polytope_points(nodes.len() as u64, m as u64);
    if count > max_points {
        return Err(CoverError::NetBudget { size: count });
    }

    let radius = branches.iter().map(|b| b.norm()).sum::<f64>() / m as f64;

    let zero = WeightedVector::zero(beta).map_err(|_| CoverError::MixedBeta {
        left: beta,
        right: beta,
    })?;
    let mut points = Vec::with_capacity(count as usize);
    // Depth-first over coordinates with the remaining integer budget.
    let mut coeffs = vec![0i64; nodes.len()];
    fn descend(
        branches: &[WeightedVector],
        coeffs: &mut Vec<i64>,
        pos: usize,
        budget: i64,
        m: f64,
        acc: &WeightedVector,
        points: &mut Vec<WeightedVector>,
    ) {
        if pos == branches.len() {
            points.push(acc.clone());
            return;
        }
        for j in -budget..=budget {
            coeffs[pos] = j;
            let next = acc
                .add_scaled(&branches[pos], j as f64 / m)
                .expect("uniform beta");
            descend(
                branches,
                coeffs,
                pos + 1,
                budget - j.abs(),
                m,
                &next,
                points,
            );
        }
    }
    if nodes.is_empty() {
        points.push(zero);
    } else {
        descend(
            &branches,
            &mut coeffs,
            0,
            m as i64,
            m as f64,
            &zero,
            &mut points,
        );
    }
    Ok(MemberNet { points, radius })
}

/// Number of integer vectors of dimension d with |j|_1 <= m.
pub fn cross_polytope_points(d: u64, m: u64) -> u128 {
    // Sum over k of C(d,k) * 2^k * C(m,k): choose the nonzero support, the
    // signs, and a composition of the budget.
    let mut total: u128 = 0;
    for k in 0..=d.min(m) {
        let mut term: u128 = 1u128 << k;
        for i in 0..k {
            term = term.saturating_mul((d - i) as u128);
        }
        for i in 1..=k {
            term /= i as u128;
        }
        let mut choose: u128 = 1;
        for i in 0..k {
            choose = choose.saturating_mul((m - i) as u128);
        }
        for i in 1..=k {
            choose /= i as u128;
        }
        total = total.saturating_add(term.saturating_mul(choose));
    }
    total
}

/// Union of member nets with bit-exact deduplication.
#[derive(Debug, Clone)]
pub struct CombinedNet {
    pub points: Vec<WeightedVector>,
    /// Largest member radius: the certified radius of the union against
    /// inputs attached to any member.
    pub sup_member_radius: f64,
    pub total_before_dedup: usize,
}

pub fn combined_net(members: &[MemberNet]) -> CombinedNet {
    let mut seen: BTreeSet<Vec<(u32, u64, u64)>> = BTreeSet::new();
    let mut points = Vec::new();
    let mut total = 0usize;
    let mut radius = 0.0f64;
    for member in members {
        radius = radius.max(member.radius);
        total += member.points.len();
        for p in &member.points {
            let key: Vec<(u32, u64, u64)> = p
                .entries()
                .iter()
                .map(|&(t, v)| (t.level, t.index, v.to_bits()))
                .collect();
            if seen.insert(key) {
                points.push(p.clone());
            }
        }
    }
    CombinedNet {
        points,
        sup_member_radius: radius,
        total_before_dedup: total,
    }
}

/// Distance from x to the nearest net point.
pub fn distance_to_net(x: &WeightedVector, net: &[WeightedVector]) -> Result<f64, TreeError> {
    let mut best = f64::INFINITY;
    for p in net {
        let d = x.dist_sq(p)?;
        if d < best {
            best = d;
        }
    }
    Ok(best.sqrt())
}
