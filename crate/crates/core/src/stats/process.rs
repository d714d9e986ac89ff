//! Longest cycles and the point process of long cycles.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::SaddleData;
use crate::cycle_type::CycleType;
use crate::error::{Error, Result};

/// Cycle lengths of one sample, largest first, with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcessSample {
    pub cycle_lengths_desc: Vec<usize>,
    pub n: usize,
}

impl ProcessSample {
    pub fn from_cycle_type(ct: &CycleType) -> Self {
        ProcessSample {
            cycle_lengths_desc: ct.lengths_desc(),
            n: ct.n(),
        }
    }

    /// `L_j`, or `0` when there are fewer than `j` cycles. `j` starts at 1.
    pub fn longest(&self, j: usize) -> usize {
        self.cycle_lengths_desc.get(j - 1).copied().unwrap_or(0)
    }

    /// `#{cycles with length >= x}`.
    pub fn count_at_least(&self, x: f64) -> usize {
        self.cycle_lengths_desc.partition_point(|&l| l as f64 >= x)
    }
}

/// Converts a batch in parallel, preserving order.
pub fn process_samples(batch: &[CycleType]) -> Vec<ProcessSample> {
    batch.par_iter().map(ProcessSample::from_cycle_type).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LongestCycles {
    /// `L_1, ..., L_K`; zero past the number of cycles.
    pub values: Vec<usize>,
    /// Set when the sample has fewer than `K` cycles.
    pub padded: bool,
}

/// `L_j = max{m : sum_{k >= m} C_k >= j}` for `j = 1..=k`.
pub fn longest_cycles(ct: &CycleType, k: usize) -> Result<LongestCycles> {
    if k == 0 {
        return Err(Error::validation("K must be at least 1"));
    }
    let mut values = Vec::with_capacity(k);
    // walk lengths downwards; the tail count at m jumps by C_m
    let mut tail = 0;
    for &(m, c) in ct.counts().iter().rev() {
        tail += c;
        while values.len() < k && values.len() < tail {
            values.push(m);
        }
        if values.len() == k {
            break;
        }
    }
    let padded = values.len() < k;
    values.resize(k, 0);
    Ok(LongestCycles { values, padded })
}

/// The step function `y -> P_y = #{cycles with length >= x_n(y)}` of one sample.
#[derive(Clone, Debug)]
pub struct ProcessPath {
    lengths_desc: Vec<usize>,
    n_star: f64,
    ell: f64,
    /// Jump time of each cycle, in the order of `lengths_desc` (nondecreasing).
    jump_times: Vec<f64>,
}

impl ProcessPath {
    /// `exp(ell_n - L / n*)` below the cap `2 n* ell_n`, `0` at or above it.
    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn cap(&self) -> f64 {
        2.0 * self.n_star * self.ell
    }

    /// `x_n(y)`.
    pub fn threshold(&self, y: f64) -> f64 {
        self.n_star * (self.ell + (-y.ln()).min(self.ell))
    }

    /// `P_y` for `y >= 0`.
    pub fn evaluate(&self, y: f64) -> usize {
        assert!(y >= 0.0, "P_y needs y >= 0");
        let x = self.threshold(y);
        self.lengths_desc.partition_point(|&l| l as f64 >= x)
    }

    /// `P_0`, the number of cycles at or above the cap.
    pub fn at_zero(&self) -> usize {
        self.evaluate(0.0)
    }
}

/// Builds the long-cycle process of `ct` at the scales of `sd`.
pub fn process_path(ct: &CycleType, sd: &SaddleData) -> Result<ProcessPath> {
    if ct.n() != sd.n {
        return Err(Error::validation(format!(
            "saddle data for n = {} used with a cycle type of size {}",
            sd.n,
            ct.n()
        )));
    }
    path_from_lengths(ct.lengths_desc(), sd)
}

pub(crate) fn path_from_lengths(lengths_desc: Vec<usize>, sd: &SaddleData) -> Result<ProcessPath> {
    let ell = sd.ell()?;
    let n_star = sd.n_star;
    let cap = 2.0 * n_star * ell;
    let jump_times = lengths_desc
        .iter()
        .map(|&l| if l as f64 >= cap { 0.0 } else { (ell - l as f64 / n_star).exp() })
        .collect();
    Ok(ProcessPath {
        lengths_desc,
        n_star,
        ell,
        jump_times,
    })
}
