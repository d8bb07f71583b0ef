use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed-stable random source for dataset generation.
///
/// The stream is ChaCha8 keyed by rand_core's `seed_from_u64` expansion of
/// the seed. Derived draws are defined here, not by a sampling library, so
/// any implementation following the same rules reproduces datasets exactly:
///
/// * `below(n)`: Lemire's multiply-shift on one `u64`, rejecting low words
///   under `2^64 mod n`.
/// * `unit()`: top 53 bits of one `u64`, scaled by `2^-53`.
/// * `poisson(mean)`: Knuth's product-of-uniforms method.
/// * `sample_sorted(n, k)`: Floyd's sampling without replacement, sorted.
/// * `fill(buf)`: ChaCha8 `fill_bytes`.
pub struct DatasetRng {
    inner: ChaCha8Rng,
}

impl DatasetRng {
    pub fn new(seed: u64) -> Self {
        DatasetRng { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let mut m = self.next_u64() as u128 * n as u128;
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = self.next_u64() as u128 * n as u128;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn between(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        if hi - lo == u64::MAX {
            return self.next_u64();
        }
        lo + self.below(hi - lo + 1)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let limit = (-mean).exp();
        let mut k = 0u64;
        let mut p = self.unit();
        while p > limit {
            k += 1;
            p *= self.unit();
        }
        k
    }

    /// `k` distinct integers from `[0, n)`, ascending.
    pub fn sample_sorted(&mut self, n: u64, k: u64) -> Vec<u64> {
        assert!(k <= n);
        let mut chosen = std::collections::BTreeSet::new();
        for j in n - k..n {
            let t = self.below(j + 1);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        chosen.into_iter().collect()
    }

    pub fn fill(&mut self, buf: &mut [u8]) {
        self.inner.fill_bytes(buf);
    }
}
