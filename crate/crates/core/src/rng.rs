//! Counter-based deterministic random numbers.
//!
//! All randomness in the crate flows through [`CounterRng`], a SplitMix64
//! finalizer applied to `seed + index * GOLDEN`. Each cell of a sampled window
//! is an independent function of `(seed, cell index)`, so sampling is
//! bit-identical across platforms and trivially parallel: any block of cells
//! can be generated without touching the others.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer from the SplitMix64 generator.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A counter-based generator: `value(i) = splitmix64(seed ^ mix(stream) + i*GOLDEN)`.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    base: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { base: splitmix64(seed) }
    }

    /// Derive an independent stream, e.g. one per replica or per query.
    pub fn stream(&self, stream: u64) -> Self {
        CounterRng {
            base: splitmix64(self.base ^ stream.wrapping_mul(GOLDEN)),
        }
    }

    /// The `i`-th 64-bit value of this stream.
    #[inline]
    pub fn at(&self, i: u64) -> u64 {
        splitmix64(self.base.wrapping_add(i.wrapping_mul(GOLDEN)))
    }

    /// Uniform value in `[0, n)` by widening multiply; `n` must be nonzero.
    #[inline]
    pub fn index(&self, i: u64, n: u64) -> u64 {
        (((self.at(i) as u128) * (n as u128)) >> 64) as u64
    }
}
