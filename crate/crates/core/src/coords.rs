//! The -45° rotation between original `(t, x)` and characteristic `(τ, λ)` coordinates.

use std::f64::consts::FRAC_1_SQRT_2;

/// `(t, x) ↦ ((t - x)/√2, (t + x)/√2)`.
#[inline]
pub fn to_rotated(t: f64, x: f64) -> (f64, f64) {
    ((t - x) * FRAC_1_SQRT_2, (t + x) * FRAC_1_SQRT_2)
}

/// `(τ, λ) ↦ ((τ + λ)/√2, (λ - τ)/√2)`, the inverse of [`to_rotated`].
#[inline]
pub fn to_original(tau: f64, lambda: f64) -> (f64, f64) {
    ((tau + lambda) * FRAC_1_SQRT_2, (lambda - tau) * FRAC_1_SQRT_2)
}
