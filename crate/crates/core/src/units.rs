//! Unit conventions.
//!
//! Configuration values are linear frequencies in MHz (a value of `40.0`
//! means 2π × 40 MHz). Hamiltonians are assembled in angular frequency with
//! time in ns, so a coefficient `f` in MHz enters as `2π f / 1000` rad/ns.
//!
//! The resonator decay rate κ is an energy-decay *rate* in μs⁻¹ ("4 MHz"
//! means 4 × 10⁶ s⁻¹) and is not scaled by 2π.

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Linear frequency in MHz to angular frequency in rad/ns.
#[inline]
pub fn angular(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e-3
}

/// Angular frequency in rad/ns back to linear MHz.
#[inline]
pub fn linear_mhz(rad_per_ns: f64) -> f64 {
    rad_per_ns * 1e3 / (2.0 * PI)
}

/// Decay rate in μs⁻¹ to ns⁻¹.
#[inline]
pub fn rate_per_ns(per_us: f64) -> f64 {
    per_us * 1e-3
}

/// Angular frequency in rad/s to linear MHz.
#[inline]
pub fn rad_per_s_to_mhz(w: f64) -> f64 {
    w / (2.0 * PI) * 1e-6
}
