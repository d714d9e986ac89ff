//! Small-`v` expansions of `sum_k k^delta e^{-k v}` and its tails.

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::zeta::zeta;
use crate::error::{Error, Result};
use crate::numeric::power_exp_sum;

/// Leading Euler-Maclaurin boundary constant for `sum_{k >= x} f(k)`,
/// i.e. `B_1`-term `f(x) / 2`.
pub const BOUNDARY_CONSTANT: f64 = 0.5;

/// `x v` below which the tail expansion is outside its regime.
pub const PARTIAL_SUM_REGIME: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolylogAsymp {
    pub delta: f64,
    pub v: f64,
    /// `Gamma(delta + 1) v^{-delta-1} + zeta(-delta)`.
    pub approx: f64,
    /// `sum_{k >= 1} k^delta e^{-k v}`.
    pub direct: f64,
    pub abs_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartialSumAsymp {
    pub delta: f64,
    pub v: f64,
    pub x: f64,
    /// `(x^delta e^{-x v} / v) sum_{j=0}^{N} (delta)_j / (x v)^j`.
    pub integral_part: f64,
    /// `BOUNDARY_CONSTANT * x^delta e^{-x v}`.
    pub correction: f64,
    /// `sum_{k >= ceil(x)} k^delta e^{-k v}`.
    pub direct: f64,
    /// `x v >= 5`.
    pub in_regime: bool,
}

impl PartialSumAsymp {
    /// `|direct - integral_part - correction|`.
    pub fn remainder(&self) -> f64 {
        (self.direct - self.integral_part - self.correction).abs()
    }
}

fn is_negative_integer(delta: f64) -> bool {
    delta < 0.0 && delta.fract() == 0.0
}

/// Compares `sum_{k >= 1} k^delta e^{-k v}` with `Gamma(delta+1) v^{-delta-1} + zeta(-delta)`.
pub fn polylog_asymp(delta: f64, v: f64) -> Result<PolylogAsymp> {
    if is_negative_integer(delta) || !delta.is_finite() {
        return Err(Error::domain(format!("delta = {delta} is a pole of Gamma(delta + 1)")));
    }
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::domain(format!("v must lie in (0, 1), got {v}")));
    }
    let approx = gamma(delta + 1.0) * v.powf(-delta - 1.0) + zeta(-delta);
    let direct = power_exp_sum(delta, v, 1).value;
    Ok(PolylogAsymp {
        delta,
        v,
        approx,
        direct,
        abs_error: (direct - approx).abs(),
    })
}

/// Falling factorial `delta (delta - 1) ... (delta - j + 1)`, `(delta)_0 = 1`.
pub fn falling_factorial(delta: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (delta - i as f64))
}

/// Integration-by-parts expansion of `int_x^inf t^delta e^{-t v} dt` plus the
/// Euler-Maclaurin boundary term, against the directly summed tail.
pub fn partial_sum_asymp(delta: f64, v: f64, x: f64, n_terms: usize) -> Result<PartialSumAsymp> {
    if !(v > 0.0 && v.is_finite()) || !(x > 0.0 && x.is_finite()) || !delta.is_finite() {
        return Err(Error::domain(format!("need v > 0 and x > 0, got v = {v}, x = {x}")));
    }
    let xv = x * v;
    let in_regime = xv >= PARTIAL_SUM_REGIME;
    if !in_regime {
        log::warn!("tail expansion outside its regime: x v = {xv} < {PARTIAL_SUM_REGIME}");
    }
    let boundary = (delta * x.ln() - xv).exp();
    let series: f64 = (0..=n_terms)
        .map(|j| falling_factorial(delta, j) / xv.powi(j as i32))
        .sum();
    let direct = power_exp_sum(delta, v, x.ceil() as usize).value;
    Ok(PartialSumAsymp {
        delta,
        v,
        x,
        integral_part: boundary / v * series,
        correction: BOUNDARY_CONSTANT * boundary,
        direct,
        in_regime,
    })
}
