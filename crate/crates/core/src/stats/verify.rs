//! Statistical checks of the long-cycle limit laws on a sampled batch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::distance::{correlation, gumbel_cdf, ks_one_sample, ks_two_sample, poisson_pmf, tv_distance};
use super::process::{path_from_lengths, ProcessSample};
use super::report::{Check, VerificationReport};
use crate::asymptotics::{expected_tail_count, SaddleData};
use crate::error::{Error, Result};
use crate::numeric::theta_exp_sum;
use crate::weights::WeightSequence;

/// Seed of the exponential partial-sum reference sample.
pub const REFERENCE_SEED: u64 = 0x0005_EED0_F6B3_E1A5;

/// Pass thresholds, keyed by name for command-line overrides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on increment means.
    pub mean_rel: f64,
    /// Absolute tolerance on variance/mean around 1.
    pub var_ratio: f64,
    /// Absolute bound on pairwise increment correlations.
    pub corr: f64,
    /// TV distance of each increment to its Poisson law.
    pub tv: f64,
    /// KS distance of the rescaled longest cycle to the Gumbel law.
    pub ks_gumbel: f64,
    /// Two-sample KS distance of the rescaled `L_j` to the reference.
    pub ks_joint: f64,
    /// Relative tolerance of the cumulative profile.
    pub profile_rel: f64,
    /// Multiple of the Markov bound allowed for the cap event.
    pub bn_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean_rel: 0.15,
            var_ratio: 0.2,
            corr: 0.1,
            tv: 0.08,
            ks_gumbel: 0.1,
            ks_joint: 0.12,
            profile_rel: 0.10,
            bn_factor: 3.0,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 8] = [
        "mean_rel",
        "var_ratio",
        "corr",
        "tv",
        "ks_gumbel",
        "ks_joint",
        "profile_rel",
        "bn_factor",
    ];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::validation(format!("tolerance {key} must be a finite value >= 0")));
        }
        let slot = match key {
            "mean_rel" => &mut self.mean_rel,
            "var_ratio" => &mut self.var_ratio,
            "corr" => &mut self.corr,
            "tv" => &mut self.tv,
            "ks_gumbel" => &mut self.ks_gumbel,
            "ks_joint" => &mut self.ks_joint,
            "profile_rel" => &mut self.profile_rel,
            "bn_factor" => &mut self.bn_factor,
            _ => {
                return Err(Error::validation(format!(
                    "unknown tolerance {key}; expected one of {}",
                    Self::KEYS.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

fn require_nonempty(batch: &[ProcessSample]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::validation("empty sample batch"));
    }
    Ok(())
}

fn check_sizes(batch: &[ProcessSample], sd: &SaddleData) -> Result<()> {
    require_nonempty(batch)?;
    if let Some(s) = batch.iter().find(|s| s.n != sd.n) {
        return Err(Error::validation(format!(
            "sample of size {} checked against saddle data for n = {}",
            s.n, sd.n
        )));
    }
    Ok(())
}

fn base_report(name: &str, sd: &SaddleData, samples: usize) -> VerificationReport {
    let mut r = VerificationReport::new(name);
    r.set_config("n", sd.n);
    r.set_config("alpha", sd.alpha);
    r.set_config("v_n", sd.v_n);
    r.set_config("n_star", sd.n_star);
    r.set_config("ell_n", sd.ell_n);
    r.counts.insert("samples".into(), samples as u64);
    r
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 {
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

/// Increments `P_{y_j} - P_{y_{j-1}}` (with `y_0 = 0`) against independent
/// Poisson laws with means `y_j - y_{j-1}`.
pub fn verify_poisson_increments(
    batch: &[ProcessSample],
    sd: &SaddleData,
    y_grid: &[f64],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_sizes(batch, sd)?;
    if y_grid.is_empty() {
        return Err(Error::validation("y grid is empty"));
    }
    if y_grid[0] <= 0.0 || y_grid.windows(2).any(|w| w[1] < w[0]) || y_grid.iter().any(|y| !y.is_finite()) {
        return Err(Error::validation("y grid must be positive, finite and increasing"));
    }
    sd.ell()?;
    let grid: Vec<f64> = std::iter::once(0.0).chain(y_grid.iter().copied()).collect();
    let values: Vec<Vec<usize>> = batch
        .par_iter()
        .map(|s| {
            let path = path_from_lengths(s.cycle_lengths_desc.clone(), sd).expect("ell checked above");
            grid.iter().map(|&y| path.evaluate(y)).collect()
        })
        .collect();

    let mut r = base_report("poisson_increments", sd, batch.len());
    r.set_config("y_grid", y_grid);
    r.set_config("tolerances", tol);
    let m = y_grid.len();
    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 1..=m {
        let inc: Vec<f64> = values.iter().map(|v| (v[j] - v[j - 1]) as f64).collect();
        let target = grid[j] - grid[j - 1];
        let (mean, var) = mean_var(&inc);
        r.push(Check::new(format!("mean_{j}"), mean, target, tol.mean_rel * target));
        if target > 0.0 {
            let ratio = if mean > 0.0 { var / mean } else { f64::NAN };
            r.push(Check::new(format!("var_mean_ratio_{j}"), ratio, 1.0, tol.var_ratio));
        }
        let max = inc.iter().fold(0.0f64, |a, &b| a.max(b)) as usize;
        let mut pmf = vec![0.0; max + 1];
        for &x in &inc {
            pmf[x as usize] += 1.0 / inc.len() as f64;
        }
        let tv = tv_distance(&pmf, &poisson_pmf(target, max + 1));
        r.distances.insert(format!("tv_{j}"), tv);
        r.push(Check::new(format!("tv_{j}"), tv, 0.0, tol.tv));
        increments.push(inc);
    }
    for a in 0..m {
        for b in a + 1..m {
            let c = correlation(&increments[a], &increments[b]);
            r.push(Check::new(format!("corr_{}_{}", a + 1, b + 1), c, 0.0, tol.corr));
        }
    }
    r.counts.insert(
        "samples_with_p0_positive".into(),
        values.iter().filter(|v| v[0] > 0).count() as u64,
    );
    Ok(r)
}

/// Reference draws of `(-log E_1, -log(E_1 + E_2), ..., -log(E_1 + ... + E_k))`,
/// one row per sample, from a fixed seed.
pub fn exponential_reference(size: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let mut s = 0.0;
            (0..k)
                .map(|_| {
                    let e: f64 = Exp1.sample(&mut rng);
                    s += e;
                    -s.ln()
                })
                .collect()
        })
        .collect()
}

/// Rescaled longest cycles `(L_j - n* ell_n) / n*` against the Gumbel law
/// (`j = 1`) and against the exponential partial-sum reference (all `j <= k`).
pub fn verify_gumbel(batch: &[ProcessSample], sd: &SaddleData, k: usize, tol: &Tolerances) -> Result<VerificationReport> {
    check_sizes(batch, sd)?;
    if k == 0 {
        return Err(Error::validation("K must be at least 1"));
    }
    let ell = sd.ell()?;
    let ns = sd.n_star;
    let rescaled: Vec<Vec<f64>> = (1..=k)
        .map(|j| batch.iter().map(|s| (s.longest(j) as f64 - ns * ell) / ns).collect())
        .collect();

    let mut r = base_report("gumbel", sd, batch.len());
    r.set_config("k_longest", k);
    r.set_config("reference_seed", REFERENCE_SEED);
    r.set_config("tolerances", tol);

    let ks1 = ks_one_sample(&rescaled[0], gumbel_cdf);
    r.distances.insert("ks_gumbel_1".into(), ks1);
    r.push(Check::new("ks_gumbel_1", ks1, 0.0, tol.ks_gumbel));

    let reference = exponential_reference(batch.len(), k, REFERENCE_SEED);
    for j in 1..=k {
        let col: Vec<f64> = reference.iter().map(|row| row[j - 1]).collect();
        if j == 2 {
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            log::info!("reference mean of -log(E_1 + E_2): {mean:.6} (exact gamma - 1 = -0.422784)");
        }
        let d = ks_two_sample(&rescaled[j - 1], &col);
        r.distances.insert(format!("ks_joint_{j}"), d);
        r.push(Check::new(format!("ks_joint_{j}"), d, 0.0, tol.ks_joint));
    }

    let cap = 2.0 * ns * ell;
    let violations = batch
        .iter()
        .filter(|s| {
            let times: Vec<f64> = (1..=k)
                .map(|j| {
                    let l = s.longest(j) as f64;
                    if l >= cap {
                        0.0
                    } else {
                        (ell - l / ns).exp()
                    }
                })
                .collect();
            times.windows(2).any(|w| w[1] < w[0])
        })
        .count();
    r.counts.insert("jump_order_violations".into(), violations as u64);
    r.counts.insert(
        "samples_with_fewer_than_k_cycles".into(),
        batch.iter().filter(|s| s.cycle_lengths_desc.len() < k).count() as u64,
    );
    r.push(Check::new("jump_order_violations", violations as f64, 0.0, 0.0));
    Ok(r)
}

/// Empirical mean of `w_n(x) = sum_{k >= x n^{1/(1+alpha)}} C_k` against
/// `sum_{k >= x n^{1/(1+alpha)}} (theta_k / k) r_n^k`.
pub fn cumulative_profile(
    batch: &[ProcessSample],
    w: &WeightSequence,
    sd: &SaddleData,
    alpha: f64,
    x_grid: &[f64],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_sizes(batch, sd)?;
    if x_grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::validation("x grid must be positive and finite"));
    }
    let scale = (sd.n as f64).powf(1.0 / (1.0 + alpha));
    let n = batch.len() as f64;
    let mut r = base_report("cumulative_profile", sd, batch.len());
    r.set_config("x_grid", x_grid);
    r.set_config("scale", scale);
    r.set_config("tolerances", tol);
    for (i, &x) in x_grid.iter().enumerate() {
        let cut = x * scale;
        let observed = batch.iter().map(|s| s.count_at_least(cut) as f64).sum::<f64>() / n;
        let predicted = expected_tail_count(w, sd, cut)?;
        let rel = if predicted > 0.0 { (observed - predicted).abs() / predicted } else { f64::NAN };
        r.distances.insert(format!("rel_dev_{}", i + 1), rel);
        // a mean of integer counts cannot resolve predictions below 1/N
        let t = (tol.profile_rel * predicted).max(1.0 / n);
        r.push(Check::new(format!("profile_{}", i + 1), observed, predicted, t));
    }
    Ok(r)
}

/// `2 sum_{k > 2 n* ell_n} (theta_k / k) e^{-k v_n}`.
pub fn bn_markov_bound(w: &WeightSequence, sd: &SaddleData) -> Result<f64> {
    let cap = 2.0 * sd.n_star * sd.ell()?;
    let lo = cap.floor() as usize + 1;
    Ok(2.0 * theta_exp_sum(w, -1.0, sd.v_n, lo).value)
}

/// Frequency of samples with a cycle longer than `2 n* ell_n`.
pub fn bn_event_frequency(
    batch: &[ProcessSample],
    w: &WeightSequence,
    sd: &SaddleData,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_sizes(batch, sd)?;
    let cap = 2.0 * sd.n_star * sd.ell()?;
    let hits = batch.iter().filter(|s| s.longest(1) as f64 > cap).count();
    let n = batch.len() as f64;
    let freq = hits as f64 / n;
    let bound = bn_markov_bound(w, sd)?;
    let mut r = base_report("bn_event", sd, batch.len());
    r.set_config("cap", cap);
    r.set_config("tolerances", tol);
    r.counts.insert("events".into(), hits as u64);
    r.distances.insert("markov_bound".into(), bound);
    r.push(Check::new("bn_frequency", freq, 0.0, (tol.bn_factor * bound).max(5.0 / n.sqrt())));
    Ok(r)
}
