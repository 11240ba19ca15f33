//! Algorithms for summation operators on dyadic trees and a critically
//! singular Volterra integral operator: essential subtrees, finite-rank
//! approximators, epsilon-nets, covering experiments, and the quadrature
//! machinery backing the kernel computations.

pub mod cover;
pub mod error;
pub mod essential;
pub mod nets;
pub mod operators;
pub mod scaling;
pub mod subtree;
pub mod tree;
pub mod vector;
pub mod volterra;

pub use error::TreeError;
pub use subtree::Subtree;
pub use tree::{ConeSums, NodeId, TreeMeasure, Weight, MAX_LEVEL, ROOT};
pub use vector::WeightedVector;
