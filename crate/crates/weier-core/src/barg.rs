//! Exact fixed-point iteration of `x -> b*x mod 1`.
//!
//! Evaluating `W(x) = sum lambda^n phi(b^n x)` requires `b^n x mod 1` for n
//! far beyond the point where repeated f64 multiplication has shed all
//! mantissa bits (the map is uniformly expanding, so f64 round-off grows like
//! `b^n`). We instead keep the fractional value as an integer `r / 2^FRAC_BITS`
//! and multiply by `b` with a mask: exact for every starting value with at
//! most `FRAC_BITS` fractional bits, which covers all f64 inputs of practical
//! magnitude. Converting back to f64 rounds once per read and never feeds
//! the error forward.

const FRAC_BITS: u32 = 100;
const MASK: u128 = (1u128 << FRAC_BITS) - 1;

/// Largest base for which `r * b` cannot overflow `u128`.
pub(crate) const MAX_BASE: u32 = 1 << 20;

#[derive(Clone, Copy, Debug)]
pub(crate) struct BaryArg {
    r: u128,
}

impl BaryArg {
    /// Encode `x` in `[0, 1)`. Exact whenever `x` has at most `FRAC_BITS`
    /// fractional bits; otherwise truncated with error below `2^-FRAC_BITS`.
    pub(crate) fn from_f64(x: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&x), "BaryArg input must lie in [0,1)");
        // Scaling by a power of two is exact in IEEE f64.
        let scaled = x * (FRAC_BITS as f64).exp2();
        BaryArg {
            r: (scaled as u128) & MASK,
        }
    }

    pub(crate) fn to_f64(self) -> f64 {
        (self.r as f64) * (-(FRAC_BITS as f64)).exp2()
    }

    /// Advance to `b * x mod 1`. Exact integer arithmetic.
    pub(crate) fn mul_b_mod1(&mut self, b: u32) {
        debug_assert!(b <= MAX_BASE);
        self.r = (self.r * b as u128) & MASK;
    }
}
