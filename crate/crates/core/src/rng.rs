//! Portable, splittable, counter-based random number generation.
//!
//! Every random draw in the toolkit goes through [`Stream`], whose output is a
//! fixed function of `(key, counter)` and therefore identical on every
//! platform and across releases of third-party crates.
//!
//! Algorithm:
//!
//! * `mix(z)` is the SplitMix64 finalizer:
//!   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31`.
//! * A stream seeded with `s` has key `mix(s ^ 0x6A09E667F3BCC909)`.
//! * The `c`-th output (counter starting at 0) is `mix(key + (c + 1) * 0x9E3779B97F4A7C15)`.
//! * `fork(label)` derives a child key `mix(key ^ mix(fnv1a64(label)))`;
//!   `fork_index(i)` derives `mix(key ^ mix(i + 0xD1B54A32D192ED03))`.
//!   Children start at counter 0 and never share state with their parent.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_SALT: u64 = 0x6A09_E667_F3BC_C909;
const INDEX_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A counter-based random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            key: mix(seed ^ SEED_SALT),
            counter: 0,
        }
    }

    /// Child stream for a named purpose.
    pub fn fork(&self, label: &str) -> Stream {
        Stream {
            key: mix(self.key ^ mix(fnv1a64(label.as_bytes()))),
            counter: 0,
        }
    }

    /// Child stream for an integer index (feature, repeat, tree, ...).
    pub fn fork_index(&self, index: u64) -> Stream {
        Stream {
            key: mix(self.key ^ mix(index.wrapping_add(INDEX_SALT))),
            counter: 0,
        }
    }

    /// Derives a plain 64-bit seed, for handing to components that take one.
    pub fn derive_seed(&self, label: &str) -> u64 {
        self.fork(label).next_u64()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, bound)`, unbiased (Lemire's multiply-and-reject).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below() needs a positive bound");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal draw via the Box-Muller cosine branch (two uniforms per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// In-place Fisher-Yates shuffle; every ordering is equally likely.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// A uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }

    /// `k` distinct indices from `0..n`, returned in ascending order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut p: Vec<usize> = (0..n).collect();
        // partial Fisher-Yates over the first k slots
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            p.swap(i, j);
        }
        p.truncate(k);
        p.sort_unstable();
        p
    }
}
