//! Overflow-safe nonnegative reals.
//!
//! A [`ScaledReal`] stores `mantissa * 2^exponent` with the mantissa
//! normalized to `[1, 2)` (or exactly zero). Normalization constants for
//! cycle-weighted permutations grow super-geometrically, so a plain `f64`
//! overflows long before the table sizes used for sampling.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul};

const FRAC_MASK: u64 = (1u64 << 52) - 1;
const ONE_BITS: u64 = 1023u64 << 52;

/// `2^k` as an `f64`, flushing to zero below the subnormal range and to
/// infinity above `f64::MAX`.
#[inline]
pub fn pow2(k: i64) -> f64 {
    if k >= -1022 {
        if k > 1023 {
            f64::INFINITY
        } else {
            f64::from_bits(((k + 1023) as u64) << 52)
        }
    } else if k >= -1074 {
        f64::from_bits(1u64 << (k + 1074))
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledReal {
    mantissa: f64,
    exponent: i64,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: ScaledReal = ScaledReal {
        mantissa: 1.0,
        exponent: 0,
    };

    /// Builds `m * 2^e` from any nonnegative finite `m`.
    ///
    /// Panics if `m` is negative or not finite.
    pub fn new(m: f64, e: i64) -> Self {
        assert!(
            m.is_finite() && m >= 0.0,
            "ScaledReal requires a nonnegative finite mantissa, got {m}"
        );
        if m == 0.0 {
            return Self::ZERO;
        }
        let (mut m, mut e) = (m, e);
        let mut bits = m.to_bits();
        if (bits >> 52) & 0x7ff == 0 {
            // subnormal
            m *= pow2(64);
            e -= 64;
            bits = m.to_bits();
        }
        let biased = ((bits >> 52) & 0x7ff) as i64;
        ScaledReal {
            mantissa: f64::from_bits((bits & FRAC_MASK) | ONE_BITS),
            exponent: e + biased - 1023,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x, 0)
    }

    /// Builds `exp(l)`; `l = -inf` gives zero.
    pub fn from_ln(l: f64) -> Self {
        if l == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        assert!(l.is_finite(), "ScaledReal::from_ln requires finite input, got {l}");
        let e = (l / std::f64::consts::LN_2).floor();
        let rem = l - e * std::f64::consts::LN_2;
        Self::new(rem.exp(), e as i64)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// Natural logarithm (`-inf` for zero).
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
        }
    }

    /// Converts to `f64`, saturating to infinity or zero out of range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.exponent > 1023 {
            return f64::INFINITY;
        }
        if self.exponent < -1022 {
            // two steps keep subnormal results accurate
            return self.mantissa * pow2(self.exponent + 64) * pow2(-64);
        }
        self.mantissa * pow2(self.exponent)
    }

    /// `self / other` as a plain `f64`.
    pub fn ratio(&self, other: &ScaledReal) -> f64 {
        assert!(!other.is_zero(), "ScaledReal::ratio by zero");
        if self.is_zero() {
            return 0.0;
        }
        let q = *self / *other;
        q.to_f64()
    }

    /// Multiplies by a nonnegative `f64`.
    pub fn scale(&self, x: f64) -> Self {
        Self::new(self.mantissa * x, self.exponent)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = *self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Default for ScaledReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;

    #[inline]
    fn mul(self, rhs: ScaledReal) -> ScaledReal {
        if self.is_zero() || rhs.is_zero() {
            return ScaledReal::ZERO;
        }
        let m = self.mantissa * rhs.mantissa;
        let e = self.exponent + rhs.exponent;
        if m >= 2.0 {
            ScaledReal {
                mantissa: m * 0.5,
                exponent: e + 1,
            }
        } else {
            ScaledReal {
                mantissa: m,
                exponent: e,
            }
        }
    }
}

impl Div for ScaledReal {
    type Output = ScaledReal;

    fn div(self, rhs: ScaledReal) -> ScaledReal {
        assert!(!rhs.is_zero(), "ScaledReal division by zero");
        if self.is_zero() {
            return ScaledReal::ZERO;
        }
        let m = self.mantissa / rhs.mantissa;
        let e = self.exponent - rhs.exponent;
        if m < 1.0 {
            ScaledReal {
                mantissa: m * 2.0,
                exponent: e - 1,
            }
        } else {
            ScaledReal {
                mantissa: m,
                exponent: e,
            }
        }
    }
}

impl Add for ScaledReal {
    type Output = ScaledReal;

    #[inline]
    fn add(self, rhs: ScaledReal) -> ScaledReal {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = small.exponent - big.exponent;
        if shift < -60 {
            return big;
        }
        ScaledReal::new(big.mantissa + small.mantissa * pow2(shift), big.exponent)
    }
}

impl AddAssign for ScaledReal {
    fn add_assign(&mut self, rhs: ScaledReal) {
        *self = *self + rhs;
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => match self.exponent.cmp(&other.exponent) {
                Ordering::Equal => self.mantissa.partial_cmp(&other.mantissa),
                ord => Some(ord),
            },
        }
    }
}

impl std::iter::Sum for ScaledReal {
    fn sum<I: Iterator<Item = ScaledReal>>(iter: I) -> ScaledReal {
        iter.fold(ScaledReal::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let log10 = self.ln() / std::f64::consts::LN_10;
        let e10 = log10.floor();
        write!(f, "{:.12}e{}", 10f64.powf(log10 - e10), e10 as i64)
    }
}
