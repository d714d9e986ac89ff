//! Truncated power series with nonnegative [`ScaledReal`] coefficients.

use crate::scaled::ScaledReal;

/// `sum_{k=0}^{degree} c_k t^k`, all `c_k >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<ScaledReal>,
}

impl PowerSeries {
    pub fn zero(degree: usize) -> Self {
        PowerSeries {
            coeffs: vec![ScaledReal::ZERO; degree + 1],
        }
    }

    pub fn one(degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = ScaledReal::ONE;
        s
    }

    pub fn from_coeffs(coeffs: Vec<ScaledReal>) -> Self {
        assert!(!coeffs.is_empty());
        PowerSeries { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> ScaledReal {
        self.coeffs.get(k).copied().unwrap_or(ScaledReal::ZERO)
    }

    pub fn coeffs(&self) -> &[ScaledReal] {
        &self.coeffs
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        let d = self.degree().min(other.degree());
        PowerSeries {
            coeffs: (0..=d).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        }
    }

    /// Product truncated to the smaller degree.
    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let d = self.degree().min(other.degree());
        let mut out = vec![ScaledReal::ZERO; d + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(d + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(d + 1 - i) {
                out[i + j] += a * b;
            }
        }
        PowerSeries { coeffs: out }
    }

    /// `exp(F)` for `F(0) = 0`, computed as the Euler product
    /// `prod_k sum_j (c_k t^k)^j / j!` truncated to the series degree.
    pub fn exp(&self) -> PowerSeries {
        assert!(self.coeffs[0].is_zero(), "exp needs a series with zero constant term");
        let d = self.degree();
        let mut acc = PowerSeries::one(d);
        for k in 1..=d {
            let c = self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            // factor = sum_j c^j / j! t^{jk}
            let mut factor = vec![ScaledReal::ZERO; d / k + 1];
            factor[0] = ScaledReal::ONE;
            for j in 1..factor.len() {
                factor[j] = factor[j - 1] * c.scale(1.0 / j as f64);
            }
            let mut next = vec![ScaledReal::ZERO; d + 1];
            for (m, &a) in acc.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, &f) in factor.iter().enumerate() {
                    let idx = m + j * k;
                    if idx > d {
                        break;
                    }
                    next[idx] += a * f;
                }
            }
            acc.coeffs = next;
        }
        acc
    }

    /// Evaluates at `0 <= t` as a `ScaledReal`.
    pub fn eval(&self, t: f64) -> ScaledReal {
        let t = ScaledReal::from_f64(t);
        let mut acc = ScaledReal::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }
}
