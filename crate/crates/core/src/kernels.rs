//! Covariance functionals of the noise.
//!
//! The noise is white in time and, per unit time, has the spatial increments of a
//! standard fractional Brownian motion. Every quantity here is normalized by the
//! rectangle covariance
//!
//! ```text
//! E[W([0,t]×[0,x]) W([0,s]×[0,y])] = ½ (t∧s) (|x|^{2H} + |y|^{2H} - |x-y|^{2H})
//! ```
//!
//! which corresponds to the spatial kernel `H(2H-1)|y-y'|^{2H-2}` for H > 1/2.
//! Masses of regions whose horizontal cross-sections are intervals with piecewise
//! linear endpoints ([`Region`]) have covariances given by a one-dimensional time
//! integral of [`interval_cross_covariance`]; that integral is evaluated in closed
//! form, so no quadrature tolerance enters the samplers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::coords::to_original;
use crate::error::{Error, Result};

/// Hurst index `H ∈ [1/2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParam(f64);

impl HurstParam {
    pub const WHITE: HurstParam = HurstParam(0.5);

    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && (0.5..1.0).contains(&h) {
            Ok(HurstParam(h))
        } else {
            Err(Error::Domain(format!("Hurst index must lie in [1/2, 1), got {h}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Exponent `2H` of the spatial variogram.
    #[inline]
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    /// Space-time white noise.
    #[inline]
    pub fn is_white(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for HurstParam {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        HurstParam::new(h)
    }
}

impl From<HurstParam> for f64 {
    fn from(h: HurstParam) -> f64 {
        h.0
    }
}

impl std::fmt::Display for HurstParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which normalization of the quadratic-variation limit to use.
///
/// `PaperLemma` is the rectangle-increment constant `2^{H-5/2}` as published;
/// `DerivedNormalization` is `κ(H)/4` computed from the rectangle covariance.
/// They coincide at H = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    PaperLemma,
    #[default]
    DerivedNormalization,
}

impl std::fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstantMode::PaperLemma => "paper_lemma",
            ConstantMode::DerivedNormalization => "derived_normalization",
        })
    }
}

fn require_colored(h: HurstParam) -> Result<()> {
    if h.is_white() {
        Err(Error::KernelUndefined)
    } else {
        Ok(())
    }
}

fn require_ordered(a: f64, b: f64) -> Result<()> {
    if b >= a {
        Ok(())
    } else {
        Err(Error::Domain(format!("interval end {b} precedes start {a}")))
    }
}

/// `∫_a^b ∫_a^b |x-y|^{2H-2} dx dy = (b-a)^{2H} / (H(2H-1))`.
pub fn riesz_square_integral(a: f64, b: f64, h: HurstParam) -> Result<f64> {
    require_colored(h)?;
    require_ordered(a, b)?;
    let hv = h.value();
    Ok((b - a).powf(h.two_h()) / (hv * (2.0 * hv - 1.0)))
}

/// `∫_a^m ∫_m^b |x-y|^{2H-2} dy dx` with `m` the midpoint of `[a, b]`.
pub fn riesz_split_integral(a: f64, b: f64, h: HurstParam) -> Result<f64> {
    require_colored(h)?;
    require_ordered(a, b)?;
    let hv = h.value();
    let c = (2f64.powf(2.0 * hv - 1.0) - 1.0) / (hv * (2.0 * hv - 1.0));
    Ok(c * (0.5 * (b - a)).powf(h.two_h()))
}

/// Covariance, per unit time, of the noise masses of `[a, b]` and `[c, d]`.
///
/// This is the fBm increment covariance
/// `½(|d-a|^{2H} + |c-b|^{2H} - |c-a|^{2H} - |d-b|^{2H})`.
pub fn interval_cross_covariance(a: f64, b: f64, c: f64, d: f64, h: HurstParam) -> f64 {
    debug_assert!(a <= b && c <= d, "intervals must be ordered");
    let p = h.two_h();
    0.5 * ((d - a).abs().powf(p) + (c - b).abs().powf(p) - (c - a).abs().powf(p) - (d - b).abs().powf(p))
}

/// Autocovariance of fractional Gaussian noise on cells of width `dx`.
pub fn fgn_covariance(lag: u64, dx: f64, h: HurstParam) -> f64 {
    let p = h.two_h();
    let k = lag as f64;
    let unit = if lag == 0 {
        1.0
    } else {
        0.5 * ((k + 1.0).powf(p) + (k - 1.0).powf(p) - 2.0 * k.powf(p))
    };
    unit * dx.powf(p)
}

/// `κ(H) = 2^{H+1/2}/(2H+1)`, the variance of the mass of a unit-side diamond.
pub fn diamond_scale(h: HurstParam) -> f64 {
    let hv = h.value();
    2f64.powf(hv + 0.5) / (2.0 * hv + 1.0)
}

/// Variance of the noise mass of a diamond with rotated side `eps`: `κ(H) eps^{2H+1}`.
pub fn diamond_variance(eps: f64, h: HurstParam) -> f64 {
    diamond_scale(h) * eps.powf(h.two_h() + 1.0)
}

/// Limit constant `c` in `Q_N(V) → c`.
pub fn qv_limit_constant(h: HurstParam, mode: ConstantMode) -> f64 {
    match mode {
        ConstantMode::PaperLemma => 2f64.powf(h.value() - 2.5),
        ConstantMode::DerivedNormalization => diamond_scale(h) / 4.0,
    }
}

/// `c_H = Γ(2H+1) sin(πH) / (2π)`, the spectral-density prefactor.
///
/// Diagnostic only: no sampler or statistic uses it.
pub fn spectral_constant(h: HurstParam) -> f64 {
    let hv = h.value();
    statrs::function::gamma::gamma(2.0 * hv + 1.0) * (PI * hv).sin() / (2.0 * PI)
}

/// A region between times `t0 < t1` whose cross-section at time `t` is the
/// interval `[left0 + left_slope (t - t0), right0 + right_slope (t - t0)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trapezoid {
    pub t0: f64,
    pub t1: f64,
    pub left0: f64,
    pub left_slope: f64,
    pub right0: f64,
    pub right_slope: f64,
}

impl Trapezoid {
    #[inline]
    fn left_at(&self, t: f64) -> f64 {
        self.left0 + self.left_slope * (t - self.t0)
    }

    #[inline]
    fn right_at(&self, t: f64) -> f64 {
        self.right0 + self.right_slope * (t - self.t0)
    }

    /// Restrict to `t ≥ t_min`; `None` if nothing is left.
    pub fn clip_below(&self, t_min: f64) -> Option<Trapezoid> {
        if self.t1 <= t_min {
            return None;
        }
        if self.t0 >= t_min {
            return Some(*self);
        }
        Some(Trapezoid {
            t0: t_min,
            t1: self.t1,
            left0: self.left_at(t_min),
            left_slope: self.left_slope,
            right0: self.right_at(t_min),
            right_slope: self.right_slope,
        })
    }

    pub fn area(&self) -> f64 {
        let w0 = self.right0 - self.left0;
        let w1 = self.right_at(self.t1) - self.left_at(self.t1);
        0.5 * (w0 + w1) * (self.t1 - self.t0)
    }
}

/// `∫_0^len |alpha + beta u|^p du`, exact.
fn abs_pow_integral(alpha: f64, beta: f64, len: f64, p: f64) -> f64 {
    if beta == 0.0 {
        return alpha.abs().powf(p) * len;
    }
    let anti = |y: f64| y.signum() * y.abs().powf(p + 1.0) / (p + 1.0);
    (anti(alpha + beta * len) - anti(alpha)) / beta
}

/// Covariance of the noise masses of two trapezoids.
pub fn trapezoid_covariance(a: &Trapezoid, b: &Trapezoid, h: HurstParam) -> f64 {
    let lo = a.t0.max(b.t0);
    let hi = a.t1.min(b.t1);
    if hi <= lo {
        return 0.0;
    }
    let len = hi - lo;
    let p = h.two_h();
    let (al, ar) = (a.left_at(lo), a.right_at(lo));
    let (bl, br) = (b.left_at(lo), b.right_at(lo));
    let term = |x: f64, y: f64, sx: f64, sy: f64| abs_pow_integral(x - y, sx - sy, len, p);
    0.5 * (term(br, al, b.right_slope, a.left_slope) + term(bl, ar, b.left_slope, a.right_slope)
        - term(bl, al, b.left_slope, a.left_slope)
        - term(br, ar, b.right_slope, a.right_slope))
}

/// A union of time-disjoint trapezoids.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pieces: Vec<Trapezoid>,
}

impl Region {
    pub fn new(pieces: Vec<Trapezoid>) -> Self {
        Region { pieces }
    }

    pub fn pieces(&self) -> &[Trapezoid] {
        &self.pieces
    }

    /// Half-diamond with base on `t = 0` and apex at rotated node `(tau, lambda)`.
    pub fn initial_triangle(tau: f64, lambda: f64) -> Result<Region> {
        let (t_apex, x_apex) = to_original(tau, lambda);
        if t_apex <= 0.0 {
            return Err(Error::Domain(format!(
                "initial triangle apex ({tau}, {lambda}) is not above t = 0"
            )));
        }
        Ok(Region::new(vec![Trapezoid {
            t0: 0.0,
            t1: t_apex,
            left0: x_apex - t_apex,
            left_slope: 1.0,
            right0: x_apex + t_apex,
            right_slope: -1.0,
        }]))
    }

    pub fn time_span(&self) -> (f64, f64) {
        let lo = self.pieces.iter().map(|p| p.t0).fold(f64::INFINITY, f64::min);
        let hi = self.pieces.iter().map(|p| p.t1).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn area(&self) -> f64 {
        self.pieces.iter().map(Trapezoid::area).sum()
    }
}

/// Covariance of the noise masses of two regions.
pub fn region_covariance(a: &Region, b: &Region, h: HurstParam) -> f64 {
    let (a0, a1) = a.time_span();
    let (b0, b1) = b.time_span();
    if a1 <= b0 || b1 <= a0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for pa in &a.pieces {
        for pb in &b.pieces {
            acc += trapezoid_covariance(pa, pb, h);
        }
    }
    acc
}

/// Image of the rotated square `[tau, tau+eps] × [lambda, lambda+eps]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diamond {
    pub tau: f64,
    pub lambda: f64,
    pub eps: f64,
}

impl Diamond {
    pub fn new(tau: f64, lambda: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("diamond side must be positive, got {eps}")));
        }
        if tau + lambda < 0.0 {
            return Err(Error::Domain(format!(
                "diamond at ({tau}, {lambda}) extends below t = 0"
            )));
        }
        Ok(Diamond { tau, lambda, eps })
    }

    /// Vertices `[bottom, left, right, top]` in `(t, x)`.
    pub fn vertices(&self) -> [(f64, f64); 4] {
        let e = self.eps;
        [
            to_original(self.tau, self.lambda),
            to_original(self.tau + e, self.lambda),
            to_original(self.tau, self.lambda + e),
            to_original(self.tau + e, self.lambda + e),
        ]
    }

    pub fn lower_half(&self) -> Trapezoid {
        let (tb, xb) = to_original(self.tau, self.lambda);
        Trapezoid {
            t0: tb,
            t1: tb + self.eps * FRAC_1_SQRT_2,
            left0: xb,
            left_slope: -1.0,
            right0: xb,
            right_slope: 1.0,
        }
    }

    pub fn upper_half(&self) -> Trapezoid {
        let (tb, xb) = to_original(self.tau, self.lambda);
        let half = self.eps * FRAC_1_SQRT_2;
        Trapezoid {
            t0: tb + half,
            t1: tb + 2.0 * half,
            left0: xb - half,
            left_slope: 1.0,
            right0: xb + half,
            right_slope: -1.0,
        }
    }

    pub fn region(&self) -> Region {
        Region::new(vec![self.lower_half(), self.upper_half()])
    }
}

/// Covariance of the noise masses of two diamonds.
pub fn diamond_covariance(a: &Diamond, b: &Diamond, h: HurstParam) -> f64 {
    region_covariance(&a.region(), &b.region(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn hurst_validation() {
        assert!(HurstParam::new(0.5).unwrap().is_white());
        assert!(!HurstParam::new(0.75).unwrap().is_white());
        for bad in [0.4, 1.0, 1.2, f64::NAN, -0.5] {
            assert!(HurstParam::new(bad).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn riesz_integrals_reference_values() {
        assert!(close(
            riesz_square_integral(0.0, 1.0, hp(0.75)).unwrap(),
            2.666_666_666_666_667,
            1e-14
        ));
        assert_eq!(riesz_square_integral(1.0, 1.0, hp(0.75)).unwrap(), 0.0);
        assert!(close(
            riesz_square_integral(0.0, 2.0, hp(0.6)).unwrap(),
            19.144_972_583_283_917,
            1e-12
        ));
        assert!(close(
            riesz_split_integral(0.0, 2.0, hp(0.75)).unwrap(),
            1.104_569_499_661_587,
            1e-12
        ));
        assert_eq!(riesz_split_integral(0.0, 0.0, hp(0.9)).unwrap(), 0.0);
        assert!(close(
            riesz_split_integral(0.0, 2.0, hp(0.9)).unwrap(),
            1.029_307_120_267_011_5,
            1e-12
        ));
    }

    #[test]
    fn riesz_integrals_errors() {
        assert!(matches!(
            riesz_square_integral(0.0, 1.0, HurstParam::WHITE),
            Err(Error::KernelUndefined)
        ));
        assert!(matches!(
            riesz_split_integral(0.0, 1.0, HurstParam::WHITE),
            Err(Error::KernelUndefined)
        ));
        assert!(matches!(
            riesz_square_integral(1.0, 0.0, hp(0.7)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(riesz_split_integral(1.0, 0.0, hp(0.7)), Err(Error::Domain(_))));
    }

    #[test]
    fn interval_covariance_reference_values() {
        assert!(close(
            interval_cross_covariance(0.0, 1.0, 0.0, 1.0, hp(0.75)),
            1.0,
            1e-15
        ));
        assert_eq!(interval_cross_covariance(0.0, 1.0, 1.0, 2.0, HurstParam::WHITE), 0.0);
        assert!(close(
            interval_cross_covariance(0.0, 1.0, 1.0, 2.0, hp(0.75)),
            0.414_213_562_373_095,
            1e-14
        ));
    }

    #[test]
    fn fgn_covariance_reference_values() {
        for h in [0.5, 0.6, 0.75, 0.95] {
            assert_eq!(fgn_covariance(0, 1.0, hp(h)), 1.0);
        }
        assert_eq!(fgn_covariance(1, 1.0, HurstParam::WHITE), 0.0);
        assert!(close(fgn_covariance(1, 1.0, hp(0.75)), 0.414_213_562_373_095, 1e-14));
        let dx = 0.37;
        for lag in 0..10u64 {
            let k = lag as f64;
            let via_intervals = interval_cross_covariance(0.0, dx, k * dx, (k + 1.0) * dx, hp(0.7));
            assert!(close(fgn_covariance(lag, dx, hp(0.7)), via_intervals, 1e-13));
        }
    }

    #[test]
    fn diamond_variance_reference_values() {
        assert_eq!(diamond_variance(1.0, HurstParam::WHITE), 1.0);
        assert!(close(diamond_variance(0.5, hp(0.75)), 0.168_179_283_050_742_9, 1e-13));
        assert!(close(diamond_variance(1.0, hp(0.9)), 0.942_505_650_552_067_3, 1e-13));
    }

    #[test]
    fn limit_constants() {
        for mode in [ConstantMode::PaperLemma, ConstantMode::DerivedNormalization] {
            assert!(close(qv_limit_constant(HurstParam::WHITE, mode), 0.25, 1e-15));
        }
        assert!(close(
            qv_limit_constant(hp(0.75), ConstantMode::PaperLemma),
            0.297_301_778_750_680_3,
            1e-14
        ));
        assert!(close(
            qv_limit_constant(hp(0.75), ConstantMode::DerivedNormalization),
            0.237_841_423_000_544_2,
            1e-14
        ));
    }

    #[test]
    fn spectral_constant_values() {
        assert!(close(
            spectral_constant(HurstParam::WHITE),
            0.159_154_943_091_895_3,
            1e-12
        ));
        assert!(close(spectral_constant(hp(0.75)), 0.149_603_355_150_537_3, 1e-10));
        assert!(spectral_constant(hp(0.999_999)) < 1e-5);
    }

    #[test]
    fn diamond_self_covariance_is_variance() {
        for h in [0.5, 0.6, 0.75, 0.9] {
            let d = Diamond::new(0.3, 0.1, 0.7).unwrap();
            let c = diamond_covariance(&d, &d, hp(h));
            assert!(close(c, diamond_variance(0.7, hp(h)), 1e-12), "H={h}: {c}");
        }
    }

    #[test]
    fn adjacent_diamonds() {
        // Same anti-diagonal, spatially adjacent: cells (1,0) and (0,1) with unit side.
        let a = Diamond::new(1.0, 0.0, 1.0).unwrap();
        let b = Diamond::new(0.0, 1.0, 1.0).unwrap();
        assert!(diamond_covariance(&a, &b, HurstParam::WHITE).abs() < 1e-15);
        let c = diamond_covariance(&a, &b, hp(0.75));
        assert!(close(c, 0.312_454_298_806_444_4, 1e-12), "{c}");
        assert!(close(c, diamond_covariance(&b, &a, hp(0.75)), 1e-15));
    }

    #[test]
    fn disjoint_time_supports_are_uncorrelated() {
        let a = Diamond::new(0.0, 0.0, 1.0).unwrap();
        let b = Diamond::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(diamond_covariance(&a, &b, hp(0.8)), 0.0);
    }

    #[test]
    fn diamond_geometry() {
        let d = Diamond::new(0.0, 0.0, 1.0).unwrap();
        let [bottom, left, right, top] = d.vertices();
        assert_eq!(bottom, (0.0, 0.0));
        assert!(close(left.0, FRAC_1_SQRT_2, 1e-15) && close(left.1, -FRAC_1_SQRT_2, 1e-15));
        assert!(close(right.0, FRAC_1_SQRT_2, 1e-15) && close(right.1, FRAC_1_SQRT_2, 1e-15));
        assert!(close(top.0, SQRT_2, 1e-15) && top.1.abs() < 1e-15);
        assert!(close(d.region().area(), 1.0, 1e-15));
        assert!(Diamond::new(-1.0, 0.5, 1.0).is_err());
        assert!(Diamond::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn initial_triangle_is_upper_half_of_straddling_diamond() {
        let h = hp(0.7);
        let tri = Region::initial_triangle(0.5, 0.5).unwrap();
        let upper = Diamond {
            tau: -0.5,
            lambda: -0.5,
            eps: 1.0,
        }
        .upper_half();
        let via_half = trapezoid_covariance(&upper, &upper, h);
        assert!(close(region_covariance(&tri, &tri, h), via_half, 1e-14));
        assert!(close(tri.area(), 0.5, 1e-15));
        assert!(Region::initial_triangle(0.5, -0.5).is_err());
    }

    #[test]
    fn clip_below_truncates() {
        let d = Diamond {
            tau: -0.5,
            lambda: -0.5,
            eps: 1.0,
        };
        let lower = d.lower_half();
        assert!(lower.clip_below(0.0).is_none());
        let upper = d.upper_half();
        assert_eq!(upper.clip_below(0.0), Some(upper));
    }
}
