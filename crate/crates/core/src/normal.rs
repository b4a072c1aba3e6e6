//! Standard normal distribution helpers.
//!
//! The CDF is evaluated through the complementary error function from the
//! `libm` crate, a port of the FreeBSD msun `erfc` (rational approximations on
//! four sub-intervals, error below one ulp). Both tails are computed from
//! `erfc` directly so that tiny masses keep their relative precision instead
//! of cancelling against 1.

use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / √(2π)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel `K(u) = exp(-u²/2) / √(2π)`.
#[inline]
pub fn kernel(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

/// `Φ(x)`.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `1 - Φ(x)`, accurate for large `x`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Φ(hi) - Φ(lo)` for `lo <= hi`.
#[inline]
pub fn interval(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    let p = if lo >= 0.0 {
        sf(lo) - sf(hi)
    } else if hi <= 0.0 {
        cdf(hi) - cdf(lo)
    } else {
        1.0 - cdf(lo) - sf(hi)
    };
    p.clamp(0.0, 1.0)
}

/// Mass of a Gaussian kernel centred at `m` with bandwidth `h` that falls in `[-delta, delta]`.
#[inline]
pub fn kernel_interval_mass(m: f64, h: f64, delta: f64) -> f64 {
    interval((-delta - m) / h, (delta - m) / h)
}
