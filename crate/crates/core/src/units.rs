//! Conversions at the file boundary. Internally every frequency is an angular
//! frequency in rad/µs and every time is in µs.

use std::f64::consts::TAU;

/// Ordinary frequency in MHz to angular frequency in rad/µs.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency in rad/µs to ordinary frequency in MHz.
#[inline]
pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU
}

/// Pure-dephasing time from T1 and a Ramsey T2: 1/T2R = 1/(2 T1) + 1/Tφ.
pub fn tphi_from_t2r(t1: f64, t2r: f64) -> f64 {
    1.0 / (1.0 / t2r - 0.5 / t1)
}
