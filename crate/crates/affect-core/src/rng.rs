//! Deterministic, portable pseudo-random generator.
//!
//! Everything random in this crate — weight initialisation, batch shuffling,
//! synthetic-corpus generation — draws from [`SplitMix64`] (Steele, Lea &
//! Flood, 2014; the reference generator of `java.util.SplittableRandom`).
//! The generator is a 64-bit counter stepped by the golden-gamma constant and
//! finalised with a variant of the MurmurHash3 mixer, so the stream is a pure
//! function of the seed on every platform. Independent sub-streams are carved
//! out with [`SplitMix64::split`], consumed in a fixed, documented order by
//! each call site.

use crate::math;
use core::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Child generator; advances this stream by one draw.
    pub fn split(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box–Muller; consumes exactly two draws.
    pub fn normal(&mut self) -> f64 {
        // First uniform shifted into (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(TAU * u2)
    }

    /// Uniform index in `[0, n)` via Lemire's multiply-shift reduction
    /// (bias is unobservable at 64 bits and the mapping is portable).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}
