use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::numeric::theta_exp_sum;
use crate::scaled::ScaledReal;
use crate::weights::WeightSequence;

const MAX_ITERATIONS: usize = 200;

/// Relative residual required of the saddle point.
pub const SADDLE_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Solution of `sum_k theta_k e^{-k v} = n` and the quantities derived from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleData {
    pub n: usize,
    /// Growth exponent of the weights used for `ell_n`.
    pub alpha: f64,
    pub v_n: f64,
    /// `1 / v_n`.
    pub n_star: f64,
    /// `alpha log n* + (alpha - 1) log(alpha log n*)`, when `alpha log n* > 0`.
    pub ell_n: Option<f64>,
    /// `e^{-v_n}`.
    pub r_n: f64,
    /// `r g'(r) = sum theta_k r^k` at `r_n`.
    pub a_n: f64,
    /// `r g'(r) + r^2 g''(r) = sum k theta_k r^k` at `r_n`.
    pub b_n: f64,
    /// `g(r_n)`.
    pub g_r: f64,
    pub truncation_k: usize,
    /// `|a_n - n|` from the truncated sum.
    pub residual: f64,
    /// Certified bound on the omitted tail of `a_n`.
    pub tail_bound: f64,
    pub iterations: usize,
}

impl SaddleData {
    pub fn ell(&self) -> Result<f64> {
        self.ell_n
            .ok_or_else(|| Error::domain(format!("ell_n undefined: alpha log n* <= 0 at n = {}", self.n)))
    }

    /// `x_n(y) = n* (ell_n + min(-log y, ell_n))`; `y = 0` gives `2 n* ell_n`.
    pub fn threshold(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::domain(format!("threshold needs y >= 0, got {y}")));
        }
        let ell = self.ell()?;
        Ok(self.n_star * (ell + (-y.ln()).min(ell)))
    }

    /// `b_n / (Gamma(alpha + 2) n*^{alpha + 2})`.
    pub fn bn_ratio(&self) -> f64 {
        self.b_n / (gamma(self.alpha + 2.0) * self.n_star.powf(self.alpha + 2.0))
    }
}

/// `alpha log n* + (alpha - 1) log(alpha log n*)`.
pub fn ell_n(n_star: f64, alpha: f64) -> Result<f64> {
    let base = alpha * n_star.ln();
    if !(base > 0.0) {
        return Err(Error::domain(format!(
            "ell_n needs alpha log n* > 0, got alpha = {alpha}, n* = {n_star}"
        )));
    }
    Ok(base + (alpha - 1.0) * base.ln())
}

/// The leading-order saddle `(n / Gamma(alpha + 1))^{-1/(1+alpha)}`,
/// using the weights' power-law envelope `theta_k ~ c k^alpha`.
pub fn initial_guess(w: &WeightSequence, n: usize) -> f64 {
    let env = w.envelope();
    let p = env.exponent;
    (n as f64 / (env.coefficient * gamma(p + 1.0))).powf(-1.0 / (1.0 + p))
}

/// Newton's method on the decreasing map `v -> sum theta_k e^{-k v}`,
/// safeguarded by bisection on a bracket around the leading-order guess.
pub fn solve_saddle(w: &WeightSequence, n: usize) -> Result<SaddleData> {
    if n == 0 {
        return Err(Error::domain("saddle equation needs n >= 1"));
    }
    let target = n as f64;
    let v0 = initial_guess(w, n);
    let mass = |v: f64| theta_exp_sum(w, 0.0, v, 1).value;

    let (mut lo, mut hi) = (v0 / 10.0, v0 * 10.0);
    let mut widen = 0;
    while mass(lo) < target || mass(hi) > target {
        if mass(lo) < target {
            lo /= 10.0;
        }
        if mass(hi) > target {
            hi *= 10.0;
        }
        widen += 1;
        if widen > 30 {
            return Err(Error::Numeric {
                message: format!("could not bracket the saddle point for n = {n}"),
                trace: vec![lo, hi],
            });
        }
    }

    let mut v = v0.clamp(lo, hi);
    let mut trace = Vec::new();
    for it in 1..=MAX_ITERATIONS {
        let a = theta_exp_sum(w, 0.0, v, 1);
        let f = a.value - target;
        trace.push(v);
        if f > 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let slope = -theta_exp_sum(w, 1.0, v, 1).value;
        let mut next = v - f / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let converged = (next - v).abs() <= 4.0 * f64::EPSILON * v;
        v = next;
        if converged {
            return finish(w, n, v, it);
        }
    }
    Err(Error::Numeric {
        message: format!("saddle iteration did not converge in {MAX_ITERATIONS} steps for n = {n}"),
        trace,
    })
}

fn finish(w: &WeightSequence, n: usize, v: f64, iterations: usize) -> Result<SaddleData> {
    let a = theta_exp_sum(w, 0.0, v, 1);
    let b = theta_exp_sum(w, 1.0, v, 1);
    let g = theta_exp_sum(w, -1.0, v, 1);
    let residual = (a.value - n as f64).abs();
    let tol = SADDLE_RESIDUAL_TOLERANCE * n as f64;
    if residual > tol || a.tail_bound > tol {
        return Err(Error::Numeric {
            message: format!("saddle residual {residual:e} (tail {:e}) exceeds {tol:e}", a.tail_bound),
            trace: vec![v],
        });
    }
    let alpha = w.growth_exponent();
    let n_star = 1.0 / v;
    Ok(SaddleData {
        n,
        alpha,
        v_n: v,
        n_star,
        ell_n: ell_n(n_star, alpha).ok(),
        r_n: (-v).exp(),
        a_n: a.value,
        b_n: b.value,
        g_r: g.value,
        truncation_k: a.truncation_k,
        residual,
        tail_bound: a.tail_bound,
        iterations,
    })
}

/// `(2 pi)^{-1/2} r_n^{-n} b_n^{-1/2} exp(g(r_n))`, the saddle-point
/// approximation of `h_n = [t^n] exp(g(t))`.
pub fn saddle_h_estimate(w: &WeightSequence, n: usize) -> Result<(ScaledReal, SaddleData)> {
    if n < 10 {
        return Err(Error::domain(format!("saddle estimate needs n >= 10, got {n}")));
    }
    let sd = solve_saddle(w, n)?;
    let ln_est = -0.5 * (2.0 * std::f64::consts::PI).ln() + n as f64 * sd.v_n - 0.5 * sd.b_n.ln() + sd.g_r;
    Ok((ScaledReal::from_ln(ln_est), sd))
}

/// `sum_{k >= max(x, 1)} (theta_k / k) r_n^k`, the mean of `sum_{k >= x} C_k`
/// under the independent-Poisson approximation.
pub fn expected_tail_count(w: &WeightSequence, sd: &SaddleData, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("tail threshold must be >= 0, got {x}")));
    }
    if x > 1e15 {
        return Ok(0.0);
    }
    let lo = (x.ceil() as usize).max(1);
    Ok(theta_exp_sum(w, -1.0, sd.v_n, lo).value)
}
