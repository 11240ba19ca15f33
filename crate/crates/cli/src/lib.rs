//! Library side of the experiment harness: deterministic random inputs and
//! the experiment runner used by both the binary and the test suites.

pub mod experiment;
pub mod rng;
