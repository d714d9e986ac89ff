//! Exact ground truth at small and moderate `n`.
//!
//! Partition enumeration gives the law of the cycle type directly; the
//! `h_n` recurrence and truncated power series cover sizes where
//! enumeration is infeasible.

mod htable;
mod series;

use std::collections::BTreeMap;

pub use htable::{HTable, RESIDUAL_TOLERANCE};
pub use series::PowerSeries;

use crate::asymptotics::{solve_saddle, SaddleData};
use crate::cycle_type::CycleType;
use crate::error::{Error, Result};
use crate::scaled::ScaledReal;
use crate::weights::WeightSequence;

/// Default cap on `n` for partition enumeration (p(60) = 966467).
pub const DEFAULT_ENUMERATION_CAP: usize = 60;
/// Default cap on the degree of truncated power series.
pub const DEFAULT_SERIES_CAP: usize = 200;

/// Integer-valued statistics of a cycle type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Statistic {
    /// Length of the longest cycle, `L_1`.
    LongestCycle,
    /// `sum_{k >= x} C_k`.
    TailCount(f64),
    /// Total number of cycles.
    TotalCycles,
}

impl Statistic {
    pub fn evaluate(&self, ct: &CycleType) -> usize {
        match *self {
            Statistic::LongestCycle => ct.longest(),
            Statistic::TailCount(x) => ct.tail_count(x),
            Statistic::TotalCycles => ct.num_cycles(),
        }
    }
}

/// Both sides of the coefficient bound `[t^n] f e^g <= 2 f(r_n) [t^n] e^g`.
#[derive(Clone, Copy, Debug)]
pub struct PairBoundCheck {
    pub lhs: ScaledReal,
    pub rhs: ScaledReal,
    pub holds: bool,
}

/// Enumeration and series routines with their size caps.
#[derive(Clone, Copy, Debug)]
pub struct ExactOracle {
    pub enumeration_cap: usize,
    pub series_cap: usize,
}

impl Default for ExactOracle {
    fn default() -> Self {
        ExactOracle {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            series_cap: DEFAULT_SERIES_CAP,
        }
    }
}

/// Calls `visit` with every partition of `n` as a nonincreasing part list,
/// largest first part first (`[n]`, `[n-1, 1]`, ..., `[1, ..., 1]`).
pub fn for_each_partition<F: FnMut(&[usize])>(n: usize, mut visit: F) {
    fn rec<F: FnMut(&[usize])>(remaining: usize, max_part: usize, parts: &mut Vec<usize>, visit: &mut F) {
        if remaining == 0 {
            visit(parts);
            return;
        }
        for p in (1..=remaining.min(max_part)).rev() {
            parts.push(p);
            rec(remaining - p, p, parts, visit);
            parts.pop();
        }
    }
    let mut parts = Vec::with_capacity(n);
    rec(n, n, &mut parts, &mut visit);
}

fn parts_to_counts(parts: &[usize]) -> Vec<(usize, usize)> {
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &p in parts.iter().rev() {
        match counts.last_mut() {
            Some((m, c)) if *m == p => *c += 1,
            _ => counts.push((p, 1)),
        }
    }
    counts
}

/// Per-size factors for `prod_m (theta_m / m)^{C_m} / C_m!`.
struct PartitionWeights {
    theta_over_m: Vec<ScaledReal>,
    inv_factorial: Vec<ScaledReal>,
}

impl PartitionWeights {
    fn new(w: &WeightSequence, n: usize) -> Self {
        let mut theta_over_m = vec![ScaledReal::ZERO; n + 1];
        let mut inv_factorial = vec![ScaledReal::ONE; n + 1];
        for m in 1..=n {
            theta_over_m[m] = ScaledReal::from_f64(w.theta(m) / m as f64);
            inv_factorial[m] = inv_factorial[m - 1].scale(1.0 / m as f64);
        }
        PartitionWeights {
            theta_over_m,
            inv_factorial,
        }
    }

    fn weight(&self, counts: &[(usize, usize)]) -> ScaledReal {
        counts.iter().fold(ScaledReal::ONE, |acc, &(m, c)| {
            acc * self.theta_over_m[m].powi(c as u32) * self.inv_factorial[c]
        })
    }
}

impl ExactOracle {
    fn check_enumeration(&self, n: usize) -> Result<()> {
        if n > self.enumeration_cap {
            return Err(Error::Capacity {
                what: "enumeration size n",
                requested: n as u64,
                limit: self.enumeration_cap as u64,
            });
        }
        Ok(())
    }

    fn check_series(&self, n: usize) -> Result<()> {
        if n > self.series_cap {
            return Err(Error::Capacity {
                what: "series degree n",
                requested: n as u64,
                limit: self.series_cap as u64,
            });
        }
        Ok(())
    }

    /// `h_n` as the partition sum `sum prod_m theta_m^{C_m} / (m^{C_m} C_m!)`.
    pub fn h_exact(&self, w: &WeightSequence, n: usize) -> Result<ScaledReal> {
        self.check_enumeration(n)?;
        let pw = PartitionWeights::new(w, n);
        let mut h = ScaledReal::ZERO;
        for_each_partition(n, |parts| h += pw.weight(&parts_to_counts(parts)));
        Ok(h)
    }

    /// Visits every cycle type of size `n` with its probability.
    pub fn for_each_cycle_type<F: FnMut(CycleType, f64)>(&self, w: &WeightSequence, n: usize, mut visit: F) -> Result<()> {
        let h = self.h_exact(w, n)?;
        let pw = PartitionWeights::new(w, n);
        for_each_partition(n, |parts| {
            let counts = parts_to_counts(parts);
            let p = pw.weight(&counts).ratio(&h);
            visit(CycleType::from_sorted_counts_unchecked(n, counts), p);
        });
        Ok(())
    }

    /// All cycle types of size `n` with their probabilities, in partition order.
    pub fn enumerate_cycle_types(&self, w: &WeightSequence, n: usize) -> Result<Vec<(CycleType, f64)>> {
        if n == 0 {
            return Err(Error::domain("enumeration needs n >= 1"));
        }
        let mut out = Vec::new();
        self.for_each_cycle_type(w, n, |ct, p| out.push((ct, p)))?;
        Ok(out)
    }

    /// Exact probability mass function of an integer statistic.
    pub fn exact_statistic_pmf(&self, w: &WeightSequence, n: usize, statistic: Statistic) -> Result<BTreeMap<usize, f64>> {
        let mut pmf = BTreeMap::new();
        self.for_each_cycle_type(w, n, |ct, p| *pmf.entry(statistic.evaluate(&ct)).or_insert(0.0) += p)?;
        Ok(pmf)
    }

    fn weight_series(w: &WeightSequence, n: usize, tilt: impl Fn(usize) -> f64) -> PowerSeries {
        let mut coeffs = vec![ScaledReal::ZERO; n + 1];
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c = ScaledReal::from_f64(w.theta(k) / k as f64 * tilt(k));
        }
        PowerSeries::from_coeffs(coeffs)
    }

    /// `E[exp(s * sum_{k >= x} C_k)]` as `[t^n] exp(g_s) / [t^n] exp(g)`, where
    /// `g_s` multiplies the coefficients with `k >= x` by `e^s`.
    pub fn mgf_series(&self, w: &WeightSequence, n: usize, x: f64, s: f64) -> Result<f64> {
        self.check_series(n)?;
        if !(x >= 0.0) {
            return Err(Error::domain(format!("tail threshold must be >= 0, got {x}")));
        }
        if n == 0 {
            return Ok(1.0);
        }
        let es = s.exp();
        let tilted = Self::weight_series(w, n, |k| if k as f64 >= x { es } else { 1.0 }).exp();
        let plain = Self::weight_series(w, n, |_| 1.0).exp();
        Ok(tilted.coeff(n).ratio(&plain.coeff(n)))
    }

    /// `[t^n] exp(g(t))` via the truncated-series route.
    pub fn h_series(&self, w: &WeightSequence, n: usize) -> Result<ScaledReal> {
        self.check_series(n)?;
        Ok(Self::weight_series(w, n, |_| 1.0).exp().coeff(n))
    }

    /// Numeric check of `[t^n] f_n e^g <= 2 f_n(r_n) [t^n] e^g` for
    /// `f_n = F^2 (1 + F)^2`, `F = sum_{x_{n,v} <= k < x_{n,u}} (theta_k / k) t^k`.
    ///
    /// The bound is only guaranteed for large `n`; violations are reported,
    /// not raised.
    pub fn pair_bound_check(&self, w: &WeightSequence, n: usize, u: f64, v: f64) -> Result<PairBoundCheck> {
        self.check_series(n)?;
        if !(0.0 <= u && u < v) {
            return Err(Error::domain(format!("need 0 <= u < v, got u = {u}, v = {v}")));
        }
        let sd = solve_saddle(w, n)?;
        self.pair_bound_check_with(w, &sd, u, v)
    }

    pub fn pair_bound_check_with(&self, w: &WeightSequence, sd: &SaddleData, u: f64, v: f64) -> Result<PairBoundCheck> {
        let n = sd.n;
        self.check_series(n)?;
        let lo = sd.threshold(v)?;
        let hi = sd.threshold(u)?;
        let in_range = |k: usize| (k as f64) >= lo && (k as f64) < hi;

        let f = Self::weight_series(w, n, |k| if in_range(k) { 1.0 } else { 0.0 });
        let f_plus_f2 = f.add(&f.mul(&f));
        let fn_series = f_plus_f2.mul(&f_plus_f2);
        let g_exp = Self::weight_series(w, n, |_| 1.0).exp();
        let lhs = fn_series.mul(&g_exp).coeff(n);

        // F(r_n) over the full (finite) range, not just k <= n
        let k_lo = lo.max(1.0).ceil() as usize;
        let mut f_at_r = 0.0;
        let mut k = k_lo;
        while (k as f64) < hi {
            f_at_r += (w.ln_theta(k) - (k as f64).ln() - k as f64 * sd.v_n).exp();
            k += 1;
        }
        let fr = f_at_r * (1.0 + f_at_r);
        let rhs = g_exp.coeff(n).scale(2.0 * fr * fr);
        Ok(PairBoundCheck {
            lhs,
            rhs,
            holds: lhs <= rhs,
        })
    }
}
