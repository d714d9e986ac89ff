//! Exact sampling of cycle types.
//!
//! Starting from `m = n`, the length of the cycle containing a distinguished
//! point is drawn from `P(k | m) = theta_k h_{m-k} / (m h_m)`, the cycle is
//! removed, and the procedure repeats with `m - k` points. The draw is an
//! inverse-CDF scan in increasing `k`, so the scan lengths of one sample add
//! up to exactly `n`.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cycle_type::CycleType;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::oracle::HTable;
use crate::weights::WeightSequence;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Samples generated per parallel chunk before they are handed to the consumer.
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub num_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn validate(&self, n_max: usize) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::validation("num_samples must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::validation("workers must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::validation("n must be at least 1"));
        }
        if self.n > n_max {
            return Err(Error::Capacity {
                what: "sample size n",
                requested: self.n as u64,
                limit: n_max as u64,
            });
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used for sample `index` of a batch seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Log-space view of an [`HTable`] prepared for repeated sampling.
#[derive(Debug)]
pub struct Sampler {
    weight: WeightSequence,
    ln_theta: Vec<f64>,
    ln_h: Vec<f64>,
    scan_steps: AtomicU64,
    samples: AtomicU64,
    incidents: AtomicU64,
}

impl Sampler {
    pub fn new(h: &HTable) -> Self {
        let n_max = h.n_max();
        let w = h.weight().clone();
        let mut ln_theta = Vec::with_capacity(n_max + 1);
        ln_theta.push(f64::NAN);
        ln_theta.extend((1..=n_max).map(|k| w.ln_theta(k)));
        Sampler {
            weight: w,
            ln_theta,
            ln_h: h.ln_values(),
            scan_steps: AtomicU64::new(0),
            samples: AtomicU64::new(0),
            incidents: AtomicU64::new(0),
        }
    }

    pub fn weight(&self) -> &WeightSequence {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.ln_h.len() - 1
    }

    #[inline]
    fn ln_p(&self, k: usize, m: usize, base: f64) -> f64 {
        self.ln_theta[k] + self.ln_h[m - k] - base
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::validation("n must be at least 1"));
        }
        if n > self.n_max() {
            return Err(Error::Capacity {
                what: "sample size n",
                requested: n as u64,
                limit: self.n_max() as u64,
            });
        }
        Ok(())
    }

    /// Draws one cycle type of size `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CycleType> {
        self.check_n(n)?;
        let mut lengths = Vec::new();
        let mut m = n;
        let mut steps = 0u64;
        while m > 0 {
            let u: f64 = rng.random();
            let base = (m as f64).ln() + self.ln_h[m];
            let mut cdf = NeumaierSum::default();
            let mut chosen = None;
            for k in 1..=m {
                steps += 1;
                cdf.add(self.ln_p(k, m, base).exp());
                if cdf.value() > u {
                    chosen = Some(k);
                    break;
                }
            }
            let k = chosen.unwrap_or_else(|| {
                self.incidents.fetch_add(1, Ordering::Relaxed);
                log::warn!(
                    "numeric incident: CDF scan at m = {m} ended at {} below u = {u}; taking k = m",
                    cdf.value()
                );
                m
            });
            lengths.push(k);
            m -= k;
        }
        self.scan_steps.fetch_add(steps, Ordering::Relaxed);
        self.samples.fetch_add(1, Ordering::Relaxed);
        CycleType::from_lengths(&lengths)
    }

    /// `|sum_{k=1}^{m} P(k | m) - 1|`, the defect of a full scan at size `m`.
    pub fn normalization_defect(&self, m: usize) -> f64 {
        assert!(m >= 1 && m <= self.n_max());
        let base = (m as f64).ln() + self.ln_h[m];
        let mut s = NeumaierSum::default();
        for k in 1..=m {
            s.add(self.ln_p(k, m, base).exp());
        }
        (s.value() - 1.0).abs()
    }

    /// Total number of scanned indices over all samples drawn so far.
    pub fn scan_steps(&self) -> u64 {
        self.scan_steps.load(Ordering::Relaxed)
    }

    pub fn samples_drawn(&self) -> u64 {
        self.samples.load(Ordering::Relaxed)
    }

    /// Scans that ran out before reaching `u`.
    pub fn incidents(&self) -> u64 {
        self.incidents.load(Ordering::Relaxed)
    }

    /// Generates the batch described by `cfg` and hands samples to `consume`
    /// in index order. Chunks of samples are produced in parallel on a pool
    /// of `cfg.workers` threads.
    pub fn for_each_sample<F>(&self, cfg: &SamplerConfig, mut consume: F) -> Result<()>
    where
        F: FnMut(usize, CycleType) -> Result<()>,
    {
        cfg.validate(self.n_max())?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::validation(format!("cannot start {} workers: {e}", cfg.workers)))?;
        let mut start = 0;
        while start < cfg.num_samples {
            let end = (start + CHUNK).min(cfg.num_samples);
            let chunk: Vec<CycleType> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| self.sample(cfg.n, &mut substream(cfg.seed, i as u64)))
                    .collect::<Result<_>>()
            })?;
            for (offset, ct) in chunk.into_iter().enumerate() {
                consume(start + offset, ct)?;
            }
            start = end;
        }
        Ok(())
    }

    pub fn sample_batch(&self, cfg: &SamplerConfig) -> Result<Vec<CycleType>> {
        let mut out = Vec::with_capacity(cfg.num_samples);
        self.for_each_sample(cfg, |_, ct| {
            out.push(ct);
            Ok(())
        })?;
        Ok(out)
    }
}

fn check_weight(w: &WeightSequence, h: &HTable) -> Result<()> {
    if w != h.weight() {
        return Err(Error::validation(format!(
            "weight {w:?} does not match the table built for {:?}",
            h.weight()
        )));
    }
    Ok(())
}

/// Draws one cycle type of size `n` from the measure with weights `w`.
///
/// Prepares the log table on every call; use [`Sampler`] for repeated draws.
pub fn sample_cycle_type<R: Rng + ?Sized>(w: &WeightSequence, h: &HTable, n: usize, rng: &mut R) -> Result<CycleType> {
    check_weight(w, h)?;
    if n > h.n_max() {
        return Err(Error::Capacity {
            what: "sample size n",
            requested: n as u64,
            limit: h.n_max() as u64,
        });
    }
    Sampler::new(h).sample(n, rng)
}

pub fn sample_batch(w: &WeightSequence, h: &HTable, cfg: &SamplerConfig) -> Result<Vec<CycleType>> {
    check_weight(w, h)?;
    cfg.validate(h.n_max())?;
    Sampler::new(h).sample_batch(cfg)
}

/// Writes `{"i": index, "cycles": [[m, C_m], ...]}` followed by a newline.
pub fn write_sample_line<W: Write>(out: &mut W, index: usize, ct: &CycleType) -> Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        i: usize,
        cycles: &'a [(usize, usize)],
    }
    serde_json::to_writer(&mut *out, &Line { i: index, cycles: ct.counts() })?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn table(alpha: f64, n: usize) -> HTable {
        HTable::build(&WeightSequence::polynomial(alpha).unwrap(), n)
    }

    #[test]
    fn n_two_long_cycle_probability() {
        let s = Sampler::new(&table(1.0, 2));
        let trials = 200_000;
        let mut long = 0;
        for i in 0..trials {
            let ct = s.sample(2, &mut substream(11, i)).unwrap();
            if ct.count(2) == 1 {
                long += 1;
            }
        }
        let p = long as f64 / trials as f64;
        // standard error about 1.05e-3
        assert!((p - 2.0 / 3.0).abs() < 5e-3, "{p}");
    }

    #[test]
    fn n_one_is_forced() {
        let h = HTable::build(&WeightSequence::ewens(3.0).unwrap(), 5);
        let s = Sampler::new(&h);
        for i in 0..100 {
            let ct = s.sample(1, &mut substream(0, i)).unwrap();
            assert_eq!(ct.counts(), &[(1, 1)]);
        }
    }

    #[test]
    fn every_sample_has_size_n() {
        let s = Sampler::new(&table(2.0, 300));
        for i in 0..200 {
            let n = 1 + (i as usize * 7) % 300;
            let ct = s.sample(n, &mut substream(5, i)).unwrap();
            assert_eq!(ct.n(), n);
            assert_eq!(ct.counts().iter().map(|&(m, c)| m * c).sum::<usize>(), n);
        }
    }

    #[test]
    fn scan_length_telescopes() {
        let s = Sampler::new(&table(1.0, 500));
        for i in 0..50 {
            s.sample(500, &mut substream(1, i)).unwrap();
        }
        assert_eq!(s.samples_drawn(), 50);
        assert_eq!(s.scan_steps(), 50 * 500);
        assert!(s.scan_steps() as f64 / s.samples_drawn() as f64 <= 2.0 * 500.0);
        assert_eq!(s.incidents(), 0);
    }

    #[test]
    fn full_scans_are_normalized() {
        for alpha in [0.5, 1.0, 2.0] {
            let s = Sampler::new(&table(alpha, 400));
            for m in 1..=400 {
                assert!(s.normalization_defect(m) < 1e-9, "alpha = {alpha}, m = {m}");
            }
        }
    }

    #[test]
    fn capacity_and_validation_errors() {
        let h = table(1.0, 10);
        let s = Sampler::new(&h);
        assert!(matches!(s.sample(11, &mut substream(0, 0)), Err(Error::Capacity { .. })));
        let cfg = SamplerConfig { n: 5, num_samples: 0, seed: 1, workers: 1 };
        assert!(matches!(cfg.validate(10), Err(Error::Validation(_))));
        let cfg = SamplerConfig { n: 5, num_samples: 3, seed: 1, workers: 0 };
        assert!(cfg.validate(10).is_err());
        let cfg = SamplerConfig { n: 11, num_samples: 3, seed: 1, workers: 1 };
        assert!(matches!(s.sample_batch(&cfg), Err(Error::Capacity { .. })));
        let other = WeightSequence::polynomial(2.0).unwrap();
        assert!(sample_cycle_type(&other, &h, 5, &mut substream(0, 0)).is_err());
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let h = table(1.0, 200);
        let s = Sampler::new(&h);
        let base = SamplerConfig { n: 200, num_samples: 5000, seed: 42, workers: 1 };
        let one = s.sample_batch(&base).unwrap();
        let eight = s.sample_batch(&SamplerConfig { workers: 8, ..base }).unwrap();
        assert_eq!(one, eight);
        let other_seed = s.sample_batch(&SamplerConfig { seed: 43, ..base }).unwrap();
        assert_ne!(one, other_seed);
    }

    #[test]
    fn sample_i_depends_only_on_seed_and_index() {
        let h = table(1.0, 50);
        let s = Sampler::new(&h);
        let cfg = SamplerConfig { n: 50, num_samples: 10, seed: 9, workers: 3 };
        let batch = s.sample_batch(&cfg).unwrap();
        for (i, ct) in batch.iter().enumerate() {
            assert_eq!(*ct, s.sample(50, &mut substream(9, i as u64)).unwrap());
        }
    }

    #[test]
    fn matches_enumeration_at_n_five() {
        let w = WeightSequence::polynomial(1.0).unwrap();
        let h = HTable::build(&w, 5);
        let exact = crate::oracle::ExactOracle::default().enumerate_cycle_types(&w, 5).unwrap();
        let cfg = SamplerConfig { n: 5, num_samples: 200_000, seed: 3, workers: 4 };
        let mut freq: HashMap<CycleType, f64> = HashMap::new();
        for ct in sample_batch(&w, &h, &cfg).unwrap() {
            *freq.entry(ct).or_default() += 1.0 / cfg.num_samples as f64;
        }
        let tv: f64 = 0.5 * exact.iter().map(|(ct, p)| (freq.get(ct).copied().unwrap_or(0.0) - p).abs()).sum::<f64>();
        assert!(tv < 0.01, "{tv}");
    }

    #[test]
    fn json_line_format() {
        let ct = CycleType::from_counts([(3, 2), (2, 1)]).unwrap();
        let mut buf = Vec::new();
        write_sample_line(&mut buf, 4, &ct).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"i\":4,\"cycles\":[[2,1],[3,2]]}\n");
    }
}
