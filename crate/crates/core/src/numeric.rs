//! Small numeric helpers shared across modules.

use crate::weights::WeightSequence;

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Truncation rule for exponentially damped sums: `K * v >= 60`.
pub const DAMPING_CUTOFF: f64 = 60.0;

/// Upper bound on `sum_{k > K} k^p e^{-k v}` by integral comparison.
///
/// Requires `x^p e^{-x v}` to be nonincreasing on `[K, inf)`, i.e. `K >= p / v`.
pub fn power_exp_tail(p: f64, v: f64, k: usize) -> f64 {
    let kf = k as f64;
    debug_assert!(kf * v >= p, "integral comparison needs a decreasing summand");
    let denom = v - p.max(0.0) / kf;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    (p * kf.ln() - kf * v).exp() / denom
}

/// A truncated infinite sum with a certified remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedSum {
    pub value: f64,
    pub truncation_k: usize,
    pub tail_bound: f64,
}

/// `sum_{k >= lo} theta_k k^shift e^{-k v}` for `v > 0`.
pub fn theta_exp_sum(w: &WeightSequence, shift: f64, v: f64, lo: usize) -> TruncatedSum {
    let env = w.envelope();
    damped_sum(
        |k| w.ln_theta(k) + shift * (k as f64).ln(),
        env.coefficient,
        env.exponent + shift,
        env.start,
        v,
        lo,
    )
}

/// `sum_{k >= lo} k^p e^{-k v}` for `v > 0`.
pub fn power_exp_sum(p: f64, v: f64, lo: usize) -> TruncatedSum {
    damped_sum(|k| p * (k as f64).ln(), 1.0, p, 1, v, lo)
}

/// `sum_{k >= lo} exp(ln_coeff(k) - k v)` where `exp(ln_coeff(k)) = c k^p` for `k >= start`.
///
/// Summation runs to the smallest `K >= lo` with `K v >= 60` inside the
/// power-law region, then further while the integral tail bound exceeds
/// `1e-15` of the partial sum.
fn damped_sum(ln_coeff: impl Fn(usize) -> f64, c: f64, p: f64, start: usize, v: f64, lo: usize) -> TruncatedSum {
    assert!(v > 0.0 && v.is_finite(), "damping must be positive, got {v}");
    let lo = lo.max(1);
    let k_rule = ((DAMPING_CUTOFF / v).ceil() as usize)
        .max((2.0 * p.max(0.0) / v).ceil() as usize)
        .max(start)
        .max(lo);
    let mut sum = NeumaierSum::default();
    let mut k = lo;
    loop {
        sum.add((ln_coeff(k) - k as f64 * v).exp());
        if k >= k_rule {
            let tail = c * power_exp_tail(p, v, k);
            let value = sum.value();
            if tail <= 1e-15 * value || tail < 1e-300 {
                return TruncatedSum {
                    value,
                    truncation_k: k,
                    tail_bound: tail,
                };
            }
        }
        k += 1;
    }
}
