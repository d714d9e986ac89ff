//! Normalization constants `h_0..h_nmax` via `n h_n = sum_{k=1}^{n} theta_k h_{n-k}`,
//! and their little-endian disk cache.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::scaled::{pow2, ScaledReal};
use crate::weights::WeightSequence;

const MAGIC: &[u8; 4] = b"CWHT";
const VERSION: u32 = 1;
const TAG_POLYNOMIAL: u8 = 0;
const TAG_EWENS: u8 = 1;

/// Relative tolerance on `|n h_n - sum theta_k h_{n-k}|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Table of normalization constants for one weight sequence.
#[derive(Clone, Debug)]
pub struct HTable {
    weight: WeightSequence,
    h: Vec<ScaledReal>,
}

/// Split mantissa/exponent storage for the recurrence inner loop.
struct Columns {
    mant: Vec<f64>,
    exp: Vec<i64>,
}

impl Columns {
    fn with_capacity(n: usize) -> Self {
        Columns {
            mant: Vec::with_capacity(n),
            exp: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, x: ScaledReal) {
        self.mant.push(x.mantissa());
        self.exp.push(x.exponent());
    }
}

/// `sum_{k=1}^{n} theta_k h_{n-k}` with `theta` indexed from 1 (slot 0 unused).
fn convolve_row(theta: &Columns, h: &Columns, n: usize) -> ScaledReal {
    let mut emax = i64::MIN;
    for k in 1..=n {
        if h.mant[n - k] != 0.0 && theta.mant[k] != 0.0 {
            emax = emax.max(theta.exp[k] + h.exp[n - k]);
        }
    }
    if emax == i64::MIN {
        return ScaledReal::ZERO;
    }
    let mut acc = NeumaierSum::default();
    for k in 1..=n {
        let shift = theta.exp[k] + h.exp[n - k] - emax;
        if shift >= -1100 {
            acc.add(theta.mant[k] * h.mant[n - k] * pow2(shift));
        }
    }
    ScaledReal::new(acc.value(), emax)
}

fn theta_columns(w: &WeightSequence, n_max: usize) -> Columns {
    let mut theta = Columns::with_capacity(n_max + 1);
    theta.push(ScaledReal::ZERO);
    for k in 1..=n_max {
        theta.push(ScaledReal::from_ln(w.ln_theta(k)));
    }
    theta
}

impl HTable {
    /// Runs the recurrence up to `n_max`. Quadratic in `n_max`.
    pub fn build(w: &WeightSequence, n_max: usize) -> Self {
        let theta = theta_columns(w, n_max);
        let mut cols = Columns::with_capacity(n_max + 1);
        cols.push(ScaledReal::ONE);
        let mut h = Vec::with_capacity(n_max + 1);
        h.push(ScaledReal::ONE);
        for n in 1..=n_max {
            let hn = convolve_row(&theta, &cols, n).scale(1.0 / n as f64);
            cols.push(hn);
            h.push(hn);
        }
        HTable {
            weight: w.clone(),
            h,
        }
    }

    pub fn weight(&self) -> &WeightSequence {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.h.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<ScaledReal> {
        self.h.get(n).copied()
    }

    pub fn values(&self) -> &[ScaledReal] {
        &self.h
    }

    /// `ln h_0..ln h_nmax`.
    pub fn ln_values(&self) -> Vec<f64> {
        self.h.iter().map(ScaledReal::ln).collect()
    }

    /// `|n h_n - sum_k theta_k h_{n-k}| / (n h_n)` for `1 <= n <= n_max`.
    pub fn recurrence_residual(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.n_max());
        let mut acc = ScaledReal::ZERO;
        for k in 1..=n {
            acc += ScaledReal::from_ln(self.weight.ln_theta(k)) * self.h[n - k];
        }
        let lhs = self.h[n].scale(n as f64);
        (acc.ratio(&lhs) - 1.0).abs()
    }

    pub fn max_residual(&self) -> f64 {
        (1..=self.n_max())
            .map(|n| self.recurrence_residual(n))
            .fold(0.0, f64::max)
    }

    /// Serializes to the `CWHT` v1 layout.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let (tag, param) = match &self.weight {
            WeightSequence::Polynomial { alpha } => (TAG_POLYNOMIAL, *alpha),
            WeightSequence::Ewens { vartheta } => (TAG_EWENS, *vartheta),
            WeightSequence::Table(_) => {
                return Err(Error::validation("tabulated weights have no single-parameter cache encoding"))
            }
        };
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&[tag])?;
        out.write_all(&param.to_le_bytes())?;
        out.write_all(&(self.n_max() as u64).to_le_bytes())?;
        for x in &self.h {
            out.write_all(&x.mantissa().to_le_bytes())?;
            out.write_all(&x.exponent().to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Parses a `CWHT` v1 stream and spot-checks the recurrence on a 1% sample.
    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = u32::from_le_bytes(read_array(&mut input)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let [tag] = read_array::<1, _>(&mut input)?;
        let param = f64::from_le_bytes(read_array(&mut input)?);
        let weight = match tag {
            TAG_POLYNOMIAL => WeightSequence::polynomial(param),
            TAG_EWENS => WeightSequence::ewens(param),
            other => return Err(Error::Format(format!("unknown family tag {other}"))),
        }
        .map_err(|e| Error::Format(e.to_string()))?;
        let n_max = u64::from_le_bytes(read_array(&mut input)?);
        let n_max = usize::try_from(n_max).map_err(|_| Error::Format("n_max too large".into()))?;
        let mut h = Vec::with_capacity(n_max + 1);
        for i in 0..=n_max {
            let m = f64::from_le_bytes(read_array(&mut input)?);
            let e = i64::from_le_bytes(read_array(&mut input)?);
            if !(m == 0.0 || (1.0..2.0).contains(&m)) {
                return Err(Error::Format(format!("entry {i}: mantissa {m} not normalized")));
            }
            h.push(ScaledReal::new(m, e));
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after table".into()));
        }
        if h[0] != ScaledReal::ONE {
            return Err(Error::Format("h_0 must equal 1".into()));
        }
        let table = HTable { weight, h };
        table.spot_check()?;
        Ok(table)
    }

    fn spot_check(&self) -> Result<()> {
        let n_max = self.n_max();
        if n_max == 0 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(n_max as u64);
        let count = (n_max / 100).max(1);
        for _ in 0..count {
            let n = rng.random_range(1..=n_max);
            let r = self.recurrence_residual(n);
            if !(r <= RESIDUAL_TOLERANCE) {
                return Err(Error::Format(format!(
                    "recurrence residual {r:e} at n = {n} exceeds {RESIDUAL_TOLERANCE:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated table file".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_small_values() {
        let t = HTable::build(&WeightSequence::polynomial(1.0).unwrap(), 3);
        let got: Vec<f64> = t.values().iter().map(|x| x.to_f64()).collect();
        let want = [1.0, 1.0, 1.5, 13.0 / 6.0];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15 * w);
        }
    }

    #[test]
    fn ewens_closed_forms() {
        let t = HTable::build(&WeightSequence::ewens(2.0).unwrap(), 20);
        for n in 0..=20 {
            assert!((t.get(n).unwrap().to_f64() / (n as f64 + 1.0) - 1.0).abs() < 1e-13);
        }
        let t = HTable::build(&WeightSequence::ewens(1.0).unwrap(), 50);
        assert!(t.values().iter().all(|x| (x.to_f64() - 1.0).abs() < 1e-13));
    }

    #[test]
    fn residual_invariant() {
        for alpha in [0.5, 1.0, 3.0] {
            let t = HTable::build(&WeightSequence::polynomial(alpha).unwrap(), 400);
            assert!(t.max_residual() <= RESIDUAL_TOLERANCE, "alpha = {alpha}");
        }
    }

    #[test]
    fn handles_values_beyond_f64() {
        let t = HTable::build(&WeightSequence::polynomial(3.0).unwrap(), 3000);
        let last = t.get(3000).unwrap();
        assert_eq!(last.to_f64(), f64::INFINITY);
        assert!(last.ln().is_finite());
        assert!(t.recurrence_residual(3000) <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn cache_round_trip() {
        let t = HTable::build(&WeightSequence::polynomial(1.5).unwrap(), 250);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"CWHT");
        assert_eq!(buf.len(), 4 + 4 + 1 + 8 + 8 + 251 * 16);
        let back = HTable::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.values(), t.values());
        assert_eq!(back.weight(), t.weight());
    }

    #[test]
    fn cache_rejects_corruption() {
        let t = HTable::build(&WeightSequence::polynomial(1.0).unwrap(), 300);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(HTable::read_from(bad.as_slice()), Err(Error::Format(_))));

        let mut bad = buf.clone();
        bad[4] = 2;
        assert!(matches!(HTable::read_from(bad.as_slice()), Err(Error::Format(_))));

        assert!(matches!(HTable::read_from(&buf[..buf.len() - 3]), Err(Error::Format(_))));

        // perturb every mantissa slightly: the residual spot check must notice
        let mut bad = buf.clone();
        let header = 25;
        for i in 1..=300 {
            let off = header + 16 * i;
            let m = f64::from_le_bytes(bad[off..off + 8].try_into().unwrap());
            let m2 = if i % 2 == 0 { (m * 1.001).min(1.999) } else { (m * 0.999).max(1.0) };
            bad[off..off + 8].copy_from_slice(&m2.to_le_bytes());
        }
        assert!(matches!(HTable::read_from(bad.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn table_weights_are_not_cacheable() {
        let t = HTable::build(&WeightSequence::table(vec![1.0, 2.0]).unwrap(), 5);
        assert!(t.write_to(Vec::new()).is_err());
    }
}
