//! Deterministic sample points.
//!
//! Quasi-random points come from a Halton sequence with a Cranley-Patterson
//! rotation drawn from a seeded ChaCha stream, so a given seed always yields
//! the same low-discrepancy set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default sampling box for production inputs.
pub const DEFAULT_LO: f64 = 0.5;
pub const DEFAULT_HI: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 64;

/// Seed for the fixed probe set used by intercept checks.
pub const PROBE_SEED: u64 = 0x005e_ed0f_ba5e;
pub const PROBE_COUNT: usize = 8;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % b) as f64 * f;
        k /= b;
        f *= inv;
    }
    out
}

/// `count` points in `[lo, hi]^n`.
pub fn quasi_random(n: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    assert!(
        n <= PRIMES.len(),
        "quasi-random sampling supports up to {} dimensions",
        PRIMES.len()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|k| {
            (0..n)
                .map(|d| {
                    let u = (radical_inverse(k, PRIMES[d]) + shift[d]).fract();
                    lo + (hi - lo) * u
                })
                .collect()
        })
        .collect()
}

/// Default sample set: 64 points in `[0.5, 2]^n`.
pub fn default_samples(n: usize, seed: u64) -> Vec<Vec<f64>> {
    quasi_random(n, DEFAULT_SAMPLES, seed, DEFAULT_LO, DEFAULT_HI)
}

/// The fixed probe set: 8 points in `[0.5, 2]^n`.
pub fn probe_points(n: usize) -> Vec<Vec<f64>> {
    quasi_random(n, PROBE_COUNT, PROBE_SEED, DEFAULT_LO, DEFAULT_HI)
}

/// `count` independent uniform points in `[lo, hi]^n`.
pub fn uniform(rng: &mut impl Rng, n: usize, count: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let a = quasi_random(3, 64, 7, 0.5, 2.0);
        let b = quasi_random(3, 64, 7, 0.5, 2.0);
        assert_eq!(a, b);
        assert_ne!(a, quasi_random(3, 64, 8, 0.5, 2.0));
        assert!(a.iter().flatten().all(|&v| (0.5..=2.0).contains(&v)));
        assert_eq!(probe_points(2).len(), 8);
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn spreads_over_the_box() {
        // every half of every axis gets points
        let pts = default_samples(4, DEFAULT_SEED);
        for d in 0..4 {
            let low = pts.iter().filter(|p| p[d] < 1.25).count();
            assert!(low > 20 && low < 44, "axis {d}: {low}");
        }
    }
}
