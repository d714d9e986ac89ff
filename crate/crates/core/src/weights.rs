//! Cycle weight sequences and the weight generating function
//! `g(t) = sum_k (theta_k / k) t^k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Above this index `theta_k` is evaluated as `exp(p * ln k)`.
const LOG_SPACE_THRESHOLD: usize = 1_000_000;

/// Hard stop for the truncated generating-function sum.
const MAX_TERMS: usize = 2_000_000_000;

/// A weight family `Theta = (theta_k)_{k >= 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightSequence {
    /// `theta_k = k^alpha`.
    Polynomial { alpha: f64 },
    /// `theta_k = vartheta` for every k.
    Ewens { vartheta: f64 },
    /// Explicit `theta_1..theta_K0`, extended by a power law fitted to the
    /// last two entries.
    Table(WeightTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    values: Vec<f64>,
    alpha_fit: f64,
}

impl WeightTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exponent of the power-law extension beyond the last entry.
    pub fn alpha_fit(&self) -> f64 {
        self.alpha_fit
    }
}

/// `theta_k` together with its logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: f64,
    pub log_value: f64,
}

/// Power-law description `theta_k = coefficient * k^exponent`, exact for `k >= start`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub start: usize,
    pub coefficient: f64,
    pub exponent: f64,
}

/// A truncated evaluation of `g(t)` with its certified remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GPartial {
    pub value: f64,
    pub truncation_k: usize,
    pub tail_bound: f64,
}

impl WeightSequence {
    pub fn polynomial(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("polynomial weights need alpha > 0, got {alpha}")));
        }
        Ok(WeightSequence::Polynomial { alpha })
    }

    pub fn ewens(vartheta: f64) -> Result<Self> {
        if !(vartheta.is_finite() && vartheta > 0.0) {
            return Err(Error::domain(format!("Ewens weights need vartheta > 0, got {vartheta}")));
        }
        Ok(WeightSequence::Ewens { vartheta })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("weight table is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!("weight table entries must be positive, got {bad}")));
        }
        let k0 = values.len();
        let alpha_fit = if k0 == 1 {
            0.0
        } else {
            (values[k0 - 1] / values[k0 - 2]).ln() / (k0 as f64 / (k0 - 1) as f64).ln()
        };
        Ok(WeightSequence::Table(WeightTable { values, alpha_fit }))
    }

    /// Polynomial growth exponent (`alpha`, `0` for Ewens, the fitted exponent for tables).
    pub fn growth_exponent(&self) -> f64 {
        self.envelope().exponent
    }

    pub fn envelope(&self) -> Envelope {
        match self {
            WeightSequence::Polynomial { alpha } => Envelope {
                start: 1,
                coefficient: 1.0,
                exponent: *alpha,
            },
            WeightSequence::Ewens { vartheta } => Envelope {
                start: 1,
                coefficient: *vartheta,
                exponent: 0.0,
            },
            WeightSequence::Table(t) => {
                let k0 = t.values.len();
                Envelope {
                    start: k0,
                    coefficient: t.values[k0 - 1] / (k0 as f64).powf(t.alpha_fit),
                    exponent: t.alpha_fit,
                }
            }
        }
    }

    /// `theta_k` and `ln theta_k`; fails for `k = 0`.
    pub fn theta_eval(&self, k: usize) -> Result<ThetaValue> {
        if k == 0 {
            return Err(Error::domain("cycle weights are indexed from k = 1"));
        }
        let log_value = self.ln_theta(k);
        let value = if k > LOG_SPACE_THRESHOLD {
            log_value.exp()
        } else {
            self.theta(k)
        };
        Ok(ThetaValue { value, log_value })
    }

    /// `theta_k` for `k >= 1` without validation.
    #[inline]
    pub fn theta(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            WeightSequence::Polynomial { alpha } => {
                if k > LOG_SPACE_THRESHOLD {
                    (alpha * (k as f64).ln()).exp()
                } else {
                    (k as f64).powf(*alpha)
                }
            }
            WeightSequence::Ewens { vartheta } => *vartheta,
            WeightSequence::Table(t) => match t.values.get(k - 1) {
                Some(v) => *v,
                None => self.ln_theta(k).exp(),
            },
        }
    }

    #[inline]
    pub fn ln_theta(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            WeightSequence::Polynomial { alpha } => alpha * (k as f64).ln(),
            WeightSequence::Ewens { vartheta } => vartheta.ln(),
            WeightSequence::Table(t) => match t.values.get(k - 1) {
                Some(v) => v.ln(),
                None => {
                    let k0 = t.values.len();
                    t.values[k0 - 1].ln() + t.alpha_fit * (k as f64 / k0 as f64).ln()
                }
            },
        }
    }

    /// Truncated `g(t) = sum_{k=1}^{K} (theta_k / k) t^k` for `0 <= t < 1`.
    ///
    /// `K` is the first index in the power-law region where the
    /// consecutive-term ratio bound `rho = t * ((K+1)/K)^max(p-1, 0)` is
    /// below one and the geometric remainder `term_K * rho / (1 - rho)` is
    /// at most `eps`.
    pub fn g_theta_partial(&self, t: f64, eps: f64) -> Result<GPartial> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::domain(format!("g is evaluated on [0, 1), got t = {t}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        if t == 0.0 {
            return Ok(GPartial {
                value: 0.0,
                truncation_k: 0,
                tail_bound: 0.0,
            });
        }
        let env = self.envelope();
        let growth = (env.exponent - 1.0).max(0.0);
        let ln_t = t.ln();
        let mut sum = NeumaierSum::default();
        for k in 1..=MAX_TERMS {
            let term = (self.ln_theta(k) - (k as f64).ln() + k as f64 * ln_t).exp();
            sum.add(term);
            if k >= env.start {
                let rho = t * ((k + 1) as f64 / k as f64).powf(growth);
                if rho < 1.0 {
                    let tail = term * rho / (1.0 - rho);
                    if tail <= eps {
                        return Ok(GPartial {
                            value: sum.value(),
                            truncation_k: k,
                            tail_bound: tail,
                        });
                    }
                }
            }
        }
        Err(Error::Numeric {
            message: format!("g(t) did not reach tolerance {eps} within {MAX_TERMS} terms at t = {t}"),
            trace: vec![],
        })
    }
}
