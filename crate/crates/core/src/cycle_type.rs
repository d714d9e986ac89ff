use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The cycle type of a permutation: multiplicities `C_m` of each cycle
/// length `m`, with `sum_m m * C_m = n`.
///
/// Stored as `(m, C_m)` pairs sorted by increasing `m`, zero counts omitted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType {
    n: usize,
    counts: Vec<(usize, usize)>,
}

impl CycleType {
    /// Builds a cycle type from `(length, multiplicity)` pairs in any order.
    /// Repeated lengths are merged and zero multiplicities dropped.
    pub fn from_counts<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for (m, c) in pairs {
            if m == 0 {
                return Err(Error::validation("cycle lengths start at 1"));
            }
            if c > 0 {
                counts.push((m, c));
            }
        }
        counts.sort_unstable();
        counts.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let n = counts.iter().map(|&(m, c)| m * c).sum();
        Ok(CycleType { n, counts })
    }

    /// Builds a cycle type from a list of cycle lengths.
    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        Self::from_counts(lengths.iter().map(|&m| (m, 1)))
    }

    pub(crate) fn from_sorted_counts_unchecked(n: usize, counts: Vec<(usize, usize)>) -> Self {
        debug_assert!(counts.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert_eq!(counts.iter().map(|&(m, c)| m * c).sum::<usize>(), n);
        CycleType { n, counts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(m, C_m)` pairs with `C_m >= 1`, increasing in `m`.
    pub fn counts(&self) -> &[(usize, usize)] {
        &self.counts
    }

    pub fn count(&self, m: usize) -> usize {
        match self.counts.binary_search_by_key(&m, |&(len, _)| len) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn num_cycles(&self) -> usize {
        self.counts.iter().map(|&(_, c)| c).sum()
    }

    /// `sum_{k >= x} C_k` for a real threshold `x`.
    pub fn tail_count(&self, x: f64) -> usize {
        self.counts
            .iter()
            .rev()
            .take_while(|&&(m, _)| m as f64 >= x)
            .map(|&(_, c)| c)
            .sum()
    }

    /// Length of the longest cycle (0 for the empty permutation).
    pub fn longest(&self) -> usize {
        self.counts.last().map_or(0, |&(m, _)| m)
    }

    /// All cycle lengths with multiplicity, longest first.
    pub fn lengths_desc(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_cycles());
        for &(m, c) in self.counts.iter().rev() {
            out.extend(std::iter::repeat_n(m, c));
        }
        out
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .counts
            .iter()
            .rev()
            .map(|&(m, c)| if c == 1 { m.to_string() } else { format!("{m}^{c}") })
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}
