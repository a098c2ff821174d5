//! Finite-window computations for coarse hyperbolic geometry: four-point
//! hyperbolicity, quasi-convexity, partial actions on graphs and Bass-Serre
//! trees, group invariants, cones and cone-offs, and the small cancellation
//! certifier with its induction ledger.

pub mod action;
pub mod coneoff;
pub mod error;
pub mod geodesy;
pub mod grouptheory;
pub mod invariants;
pub mod magnitude;
pub mod metric;
pub mod par;
pub mod smallcancel;

pub use error::{Error, Result};
pub use metric::{FiniteMetricSpace, GraphSpec, HyperbolicityReport};

use std::sync::atomic::{AtomicU64, Ordering};

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Absolute comparison tolerance used by every module.
pub fn tol() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

/// Replace the global tolerance. Panics on non-positive values.
pub fn set_tolerance(eps: f64) {
    assert!(eps > 0.0 && eps.is_finite(), "tolerance must be positive");
    TOLERANCE_BITS.store(eps.to_bits(), Ordering::Relaxed);
}

/// Deterministic generator for a named purpose derived from one seed.
pub fn rng_for(seed: u64, purpose: &str) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    // FNV-1a keeps stream ids stable across platforms and releases
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in purpose.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

#[cfg(test)]
mod tests {
    #[test]
    fn default_tolerance() {
        assert_eq!(super::tol(), 1e-9);
    }
}
