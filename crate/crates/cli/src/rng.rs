//! Counter-based deterministic generator. Each trial gets its own stream so
//! trials can run in parallel and still reproduce byte for byte.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

// Finalizer with full avalanche; one call per output keeps streams
// statistically independent even for adjacent seeds.
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Splittable counter generator (splitmix64 construction).
#[derive(Debug, Clone)]
pub struct Stream {
    counter: u64,
}

impl Stream {
    /// Stream `index` derived from a master seed. Different indices give
    /// decorrelated sequences; the same pair always gives the same sequence.
    pub fn new(seed: u64, index: u64) -> Self {
        Stream {
            counter: mix64(seed.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1)))),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(GOLDEN);
        mix64(self.counter)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in {0, 1, ..., bound - 1} via rejection; bound must be > 0.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let raw = self.next_u64();
            if raw < zone {
                return raw % bound;
            }
        }
    }

    /// Uniform sign.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

use entropy_lab_core::tree::{NodeId, TreeMeasure, MAX_LEVEL};
use entropy_lab_core::volterra::measure::IntervalMeasure;
use entropy_lab_core::volterra::KernelConfig;

/// Signed atomic tree measure with unit total variation: `atoms` draws of
/// (uniform level up to max_depth, uniform index at that level, signed
/// mass), combined and normalized. Colliding atoms can cancel; the rare
/// fully cancelled draw falls back to a root point mass so callers always
/// get a unit measure.
pub fn random_tree_measure(stream: &mut Stream, max_depth: u32, atoms: usize) -> TreeMeasure {
    assert!(atoms >= 1, "need at least one atom");
    let depth = max_depth.min(MAX_LEVEL);
    for _ in 0..4 {
        let mut raw = Vec::with_capacity(atoms);
        for _ in 0..atoms {
            let level = stream.next_below(depth as u64 + 1) as u32;
            let index = if level == 0 {
                0
            } else {
                stream.next_below(1u64 << level)
            };
            let mass = stream.next_sign() * (1.0 - stream.next_f64());
            raw.push((NodeId::new(level, index).expect("index below 2^level"), mass));
        }
        let mu = TreeMeasure::from_atoms(raw);
        let total = mu.total_variation();
        if total > 0.0 {
            return mu.scale(1.0 / total);
        }
    }
    TreeMeasure::delta(entropy_lab_core::tree::ROOT)
}

/// Atomic measure on (0, r] with unit total variation; locations are
/// uniform in the half-open interval (the 1 - u flip keeps 0 out).
pub fn random_interval_measure(
    stream: &mut Stream,
    atoms: usize,
    cfg: &KernelConfig,
) -> IntervalMeasure {
    assert!(atoms >= 1, "need at least one atom");
    for _ in 0..4 {
        let raw: Vec<(f64, f64)> = (0..atoms)
            .map(|_| {
                let x = cfg.r * (1.0 - stream.next_f64());
                let mass = stream.next_sign() * (1.0 - stream.next_f64());
                (x, mass)
            })
            .collect();
        let mu = IntervalMeasure::from_atoms(raw, cfg).expect("locations inside (0, r]");
        let total = mu.total_variation();
        if total > 0.0 {
            return mu.scale(1.0 / total);
        }
    }
    IntervalMeasure::from_atoms([(cfg.r, 1.0)], cfg).expect("right endpoint is valid")
}

/// Four points of (0, r] in nondecreasing order.
pub fn random_quadruple(stream: &mut Stream, r: f64) -> [f64; 4] {
    let mut pts = [0.0f64; 4];
    for p in &mut pts {
        *p = r * (1.0 - stream.next_f64());
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = Stream::new(42, 7);
        let mut b = Stream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ_between_indices() {
        let mut a = Stream::new(42, 0);
        let mut b = Stream::new(42, 1);
        let first: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let second: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(first, second);
    }

    #[test]
    fn unit_interval_range() {
        let mut s = Stream::new(1, 0);
        for _ in 0..1000 {
            let x = s.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn bounded_draws_cover_range() {
        let mut s = Stream::new(9, 3);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[s.next_below(5) as usize] = true;
        }
        assert!(seen.iter().all(|&v| v));
    }

    #[test]
    fn tree_measures_are_unit_and_deterministic() {
        let mut a = Stream::new(42, 3);
        let mut b = Stream::new(42, 3);
        let mu = random_tree_measure(&mut a, 62, 50);
        assert_eq!(mu, random_tree_measure(&mut b, 62, 50));
        assert!((mu.total_variation() - 1.0).abs() < 1e-12);
        assert!(mu.max_level() <= 62);
        let single = random_tree_measure(&mut a, 10, 1);
        assert_eq!(single.atom_count(), 1);
        assert!((single.total_variation() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interval_measures_stay_inside_range() {
        let cfg = KernelConfig::default();
        let mut s = Stream::new(7, 0);
        for _ in 0..20 {
            let mu = random_interval_measure(&mut s, 8, &cfg);
            assert!((mu.total_variation() - 1.0).abs() < 1e-12);
            for &(x, _) in mu.atoms() {
                assert!(x > 0.0 && x <= cfg.r);
            }
        }
    }

    #[test]
    fn quadruples_are_ordered() {
        let mut s = Stream::new(3, 1);
        for _ in 0..50 {
            let q = random_quadruple(&mut s, 0.1);
            assert!(q[0] <= q[1] && q[1] <= q[2] && q[2] <= q[3]);
            assert!(q[0] > 0.0 && q[3] <= 0.1);
        }
    }
}
