//! Covering-number experiments: greedy farthest-point covers, exhaustive
//! optimal covers for tiny inputs, and a closed-form metric for clouds of
//! branch indicators.
//!
//! The greedy traversal picks the point farthest from the chosen centers
//! (2-approximation to the optimal covering radius); ties go to the lowest
//! index, and the first center is always index 0, so runs are fully
//! deterministic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CoverError;
use crate::tree::{NodeId, Weight};
use crate::vector::WeightedVector;

/// Finite point set with pairwise squared distances.
pub trait CoverSpace: Sync {
    fn len(&self) -> usize;
    fn dist_sq(&self, i: usize, j: usize) -> f64;
}

/// Cloud of general weighted vectors (all with the same weight exponent),
/// each carrying an opaque label for reports.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<WeightedVector>,
    labels: Vec<String>,
}

impl PointCloud {
    pub fn new(points: Vec<WeightedVector>) -> Result<Self, CoverError> {
        let labels = (0..points.len()).map(|i| i.to_string()).collect();
        PointCloud::with_labels(points, labels)
    }

    pub fn with_labels(points: Vec<WeightedVector>, labels: Vec<String>) -> Result<Self, CoverError> {
        if points.is_empty() {
            return Err(CoverError::EmptyCloud);
        }
        if labels.len() != points.len() {
            return Err(CoverError::EmptyCloud);
        }
        let beta = points[0].beta();
        for p in &points[1..] {
            if p.beta() != beta {
                return Err(CoverError::MixedBeta {
                    left: beta,
                    right: p.beta(),
                });
            }
        }
        Ok(PointCloud { points, labels })
    }

    pub fn points(&self) -> &[WeightedVector] {
        &self.points
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

impl CoverSpace for PointCloud {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist_sq(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .dist_sq(&self.points[j])
            .expect("uniform beta checked at construction")
    }
}

/// Cloud of branch indicators for all nodes down to a depth, in
/// (level, index) order. Distances come from weight prefix sums and the
/// deepest common ancestor: two branches share the weight mass up to their
/// meeting level and are disjoint below it.
#[derive(Debug, Clone)]
pub struct BranchCloud {
    nodes: Vec<NodeId>,
    /// prefix[l] = sum of weights over levels 0..=l.
    prefix: Vec<f64>,
}

impl BranchCloud {
    pub fn full_depth(depth: u32, beta: f64) -> Result<Self, CoverError> {
        let weight = Weight::new(beta).map_err(|_| CoverError::MixedBeta {
            left: beta,
            right: beta,
        })?;
        if depth > 24 {
            // 2^25 - 1 nodes is already beyond any experiment here.
            return Err(CoverError::PackingBudget { n: depth, max: 24 });
        }
        let mut nodes = Vec::new();
        for level in 0..=depth {
            for index in 0..(1u64 << level) {
                nodes.push(NodeId { level, index });
            }
        }
        let mut prefix = Vec::with_capacity(depth as usize + 1);
        let mut acc = 0.0;
        for level in 0..=depth {
            acc += weight.at_level(level);
            prefix.push(acc);
        }
        Ok(BranchCloud { nodes, prefix })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }
}

impl CoverSpace for BranchCloud {
    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn dist_sq(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.nodes[i], self.nodes[j]);
        let meet = a.lca_level(b) as usize;
        let da = self.prefix[a.level as usize] - self.prefix[meet];
        let db = self.prefix[b.level as usize] - self.prefix[meet];
        da + db
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub k: usize,
    pub radius: f64,
    pub centers: Vec<usize>,
    pub method: String,
}

/// Farthest-point greedy cover with k centers. Returns the achieved radius
/// (max over points of the distance to the nearest center).
pub fn greedy_cover(space: &impl CoverSpace, k: usize) -> Result<CoverReport, CoverError> {
    if space.len() == 0 {
        return Err(CoverError::EmptyCloud);
    }
    if k == 0 {
        return Err(CoverError::ZeroBalls);
    }
    let n = space.len();
    let k = k.min(n);
    let mut centers = vec![0usize];
    let mut dmin: Vec<f64> = (0..n).into_par_iter().map(|i| space.dist_sq(i, 0)).collect();
    while centers.len() < k {
        // Sequential argmax keeps the lowest-index tie rule exact.
        let (mut best, mut arg) = (-1.0, 0);
        for (i, &d) in dmin.iter().enumerate() {
            if d > best {
                best = d;
                arg = i;
            }
        }
        if best == 0.0 {
            // Every point already coincides with a center.
            break;
        }
        centers.push(arg);
        dmin.par_iter_mut().enumerate().for_each(|(i, d)| {
            let v = space.dist_sq(i, arg);
            if v < *d {
                *d = v;
            }
        });
    }
    let radius_sq = dmin.iter().cloned().fold(0.0, f64::max);
    Ok(CoverReport {
        k,
        radius: radius_sq.sqrt(),
        centers,
        method: "greedy".into(),
    })
}

/// Exact best cover with centers chosen among the points, by scanning all
/// k-subsets. Guarded by a budget on the number of subsets.
pub fn exhaustive_cover(
    space: &impl CoverSpace,
    k: usize,
    max_combinations: u128,
) -> Result<CoverReport, CoverError> {
    if space.len() == 0 {
        return Err(CoverError::EmptyCloud);
    }
    if k == 0 {
        return Err(CoverError::ZeroBalls);
    }
    let n = space.len();
    let k = k.min(n);
    let combos = binomial(n as u128, k as u128);
    if combos > max_combinations {
        return Err(CoverError::SearchBudget {
            combinations: combos,
        });
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best_radius_sq = f64::INFINITY;
    let mut best_subset = subset.clone();
    loop {
        let radius_sq = coverage_radius_sq(space, &subset);
        if radius_sq < best_radius_sq {
            best_radius_sq = radius_sq;
            best_subset = subset.clone();
        }
        // Next k-subset in lexicographic order.
        let mut idx = k;
        loop {
            if idx == 0 {
                return Ok(CoverReport {
                    k,
                    radius: best_radius_sq.sqrt(),
                    centers: best_subset,
                    method: "exhaustive".into(),
                });
            }
            idx -= 1;
            if subset[idx] != idx + n - k {
                break;
            }
        }
        subset[idx] += 1;
        for j in idx + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn coverage_radius_sq(space: &impl CoverSpace, centers: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..space.len() {
        let mut nearest = f64::INFINITY;
        for &c in centers {
            let d = space.dist_sq(i, c);
            if d < nearest {
                nearest = d;
            }
        }
        if nearest > worst {
            worst = nearest;
        }
    }
    worst
}

/// Max over points of the distance to the nearest listed center.
pub fn achieved_radius(space: &impl CoverSpace, centers: &[usize]) -> f64 {
    coverage_radius_sq(space, centers).sqrt()
}

/// Checks that the report's centers cover the cloud within its radius.
pub fn verify_cover(space: &impl CoverSpace, report: &CoverReport) -> bool {
    !report.centers.is_empty() && achieved_radius(space, &report.centers) <= report.radius + 1e-12
}
