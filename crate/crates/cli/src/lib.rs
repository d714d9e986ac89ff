//! `cwperm`: command-line access to exact tables, sampling, saddle-point
//! data and the long-cycle verification experiments.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cycleweight::asymptotics::{
    admissibility_diagnostics, partial_sum_asymp, polylog_asymp, saddle_h_estimate, solve_saddle,
};
use cycleweight::oracle::{ExactOracle, HTable, Statistic};
use cycleweight::sampler::{write_sample_line, Sampler, SamplerConfig};
use cycleweight::stats::{
    bn_event_frequency, cumulative_profile, process_samples, verify_gumbel, verify_poisson_increments, Check,
    Tolerances, VerificationReport,
};
use cycleweight::{Error, WeightSequence};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cwperm", version, about = "Random permutations with polynomial cycle weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the normalization table and store it in the cache directory.
    Htable(HtableArgs),
    /// Cross-check exact computations at small n.
    Oracle(OracleArgs),
    /// Print the saddle point and admissibility diagnostics.
    Saddle(SaddleArgs),
    /// Dump sampled cycle types as JSON lines.
    Sample(SampleArgs),
    /// Run a statistical verification and write its report.
    Verify(VerifyArgs),
    /// Sweep the small-v expansions and write CSV.
    Expansions(ExpansionArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Family {
    /// Polynomial weights theta_k = k^alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Constant weights theta_k = vartheta.
    #[arg(long)]
    pub vartheta: Option<f64>,
}

impl Family {
    fn weights(&self) -> cycleweight::Result<WeightSequence> {
        match (self.alpha, self.vartheta) {
            (Some(a), None) => WeightSequence::polynomial(a),
            (None, Some(t)) => WeightSequence::ewens(t),
            _ => Err(Error::Validation("give exactly one of --alpha and --vartheta".into())),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CacheArgs {
    /// Directory holding cached normalization tables.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Rebuild the cached table when it is smaller than n.
    #[arg(long)]
    pub build: bool,
}

#[derive(Args, Debug)]
pub struct HtableArgs {
    #[command(flatten)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub cache_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SaddleArgs {
    #[command(flatten)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Tilt s used by the diagnostics.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tilt: f64,
    /// Threshold parameter y used by the diagnostics.
    #[arg(long, default_value_t = 1.0)]
    pub y: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub cache: CacheArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Poisson,
    Gumbel,
    Profile,
    Bn,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub y_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub x_grid: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub k_longest: usize,
    /// Tolerance override, e.g. `--tol tv=0.05`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    /// `sum_{k>=1} k^delta e^{-kv}` against `Gamma(delta+1) v^{-delta-1} + zeta(-delta)`.
    Polylog,
    /// `sum_{k>=x} k^delta e^{-kv}` against its integral expansion plus boundary term.
    Tail,
}

#[derive(Args, Debug)]
pub struct ExpansionArgs {
    #[arg(long, value_enum, default_value = "polylog")]
    pub kind: Sweep,
    #[arg(long, value_delimiter = ',', default_value = "0,1", allow_negative_numbers = true)]
    pub delta_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.02")]
    pub v_grid: Vec<f64>,
    /// Lower summation limit for the tail sweep.
    #[arg(long, default_value_t = 200.0)]
    pub x: f64,
    /// Terms of the falling-factorial series in the tail sweep.
    #[arg(long, default_value_t = 4)]
    pub terms: usize,
    /// `polylog=c` requires error <= c v; `tail=c` requires remainder <= c * boundary term.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("cwperm: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Capacity { .. } | Error::Validation(_) => EXIT_VALIDATION,
        _ => EXIT_NUMERIC,
    }
}

fn dispatch(cmd: Command) -> cycleweight::Result<bool> {
    match cmd {
        Command::Htable(a) => htable(a),
        Command::Oracle(a) => oracle(a),
        Command::Saddle(a) => saddle(a),
        Command::Sample(a) => sample(a),
        Command::Verify(a) => verify(a),
        Command::Expansions(a) => expansions(a),
    }
}

fn positive(name: &str, value: usize) -> cycleweight::Result<()> {
    if value == 0 {
        return Err(Error::Validation(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn parse_overrides(raw: &[String]) -> cycleweight::Result<Vec<(String, f64)>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("--tol expects KEY=VALUE, got {kv}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("--tol {k}: {v} is not a number")))?;
            Ok((k.trim().to_owned(), v))
        })
        .collect()
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> cycleweight::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> cycleweight::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Cache file for a weight family, keyed by the exact bits of its parameter.
pub fn cache_path(dir: &Path, w: &WeightSequence) -> cycleweight::Result<PathBuf> {
    let name = match w {
        WeightSequence::Polynomial { alpha } => format!("h-polynomial-{:016x}.cwht", alpha.to_bits()),
        WeightSequence::Ewens { vartheta } => format!("h-ewens-{:016x}.cwht", vartheta.to_bits()),
        WeightSequence::Table(_) => return Err(Error::Validation("table weights cannot be cached".into())),
    };
    Ok(dir.join(name))
}

fn build_and_store(w: &WeightSequence, n: usize, dir: &Path) -> cycleweight::Result<HTable> {
    std::fs::create_dir_all(dir)?;
    let table = HTable::build(w, n);
    let path = cache_path(dir, w)?;
    table.save(&path)?;
    log::info!("stored table up to n = {n} in {}", path.display());
    Ok(table)
}

/// Loads the cached table for `w` (validating it), building it when absent.
/// A cached table smaller than `n` is only replaced with `--build`.
fn obtain_table(w: &WeightSequence, n: usize, cache: &CacheArgs) -> cycleweight::Result<HTable> {
    let Some(dir) = &cache.cache_dir else {
        return Ok(HTable::build(w, n));
    };
    let path = cache_path(dir, w)?;
    if path.exists() {
        let table = HTable::load(&path)?;
        if table.weight() != w {
            return Err(Error::Format(format!("{} holds a table for other weights", path.display())));
        }
        if table.n_max() >= n {
            return Ok(table);
        }
        if !cache.build {
            return Err(Error::Validation(format!(
                "cached table {} stops at n = {} < {n}; pass --build to extend it",
                path.display(),
                table.n_max()
            )));
        }
    }
    build_and_store(w, n, dir)
}

fn htable(a: HtableArgs) -> cycleweight::Result<bool> {
    positive("n", a.n)?;
    let w = a.family.weights()?;
    let table = build_and_store(&w, a.n, &a.cache_dir)?;
    let path = cache_path(&a.cache_dir, &w)?;
    let last = table.get(a.n).expect("table covers n");
    let residual = table.recurrence_residual(a.n);
    let ok = residual <= cycleweight::oracle::RESIDUAL_TOLERANCE;
    emit(
        None,
        &pretty(&json!({
            "path": path.display().to_string(),
            "weights": w,
            "n_max": table.n_max(),
            "ln_h_n": last.ln(),
            "residual_at_n_max": residual,
            "pass": ok,
        }))?,
    )?;
    Ok(ok)
}

fn oracle(a: OracleArgs) -> cycleweight::Result<bool> {
    positive("n", a.n)?;
    let w = a.family.weights()?;
    let o = ExactOracle::default();
    let n = a.n;
    let table = HTable::build(&w, n);
    let mut report = VerificationReport::new("oracle");
    report.set_config("weights", &w);
    report.set_config("n", n);

    let mut h_dev = 0f64;
    let mut s_dev = 0f64;
    for m in 0..=n {
        let exact = o.h_exact(&w, m)?;
        let rec = table.get(m).expect("table covers n");
        h_dev = h_dev.max((rec.ratio(&exact) - 1.0).abs());
        s_dev = s_dev.max((o.h_series(&w, m)?.ratio(&rec) - 1.0).abs());
    }
    report.push(Check::new("h_recurrence_vs_partitions", h_dev, 0.0, 1e-10));
    report.push(Check::new("h_series_vs_recurrence", s_dev, 0.0, 1e-10));

    let pmf = o.exact_statistic_pmf(&w, n, Statistic::LongestCycle)?;
    let total: f64 = pmf.values().sum();
    report.push(Check::new("longest_cycle_pmf_total", total, 1.0, 1e-12));

    let mut mgf_dev = 0f64;
    for x in [1.0, 2.0, 3.0] {
        for s in [-1.0, 0.5, 1.0] {
            let mut direct = 0.0;
            o.for_each_cycle_type(&w, n, |ct, p| direct += (s * ct.tail_count(x) as f64).exp() * p)?;
            let series = o.mgf_series(&w, n, x, s)?;
            mgf_dev = mgf_dev.max((series - direct).abs() / direct.max(1.0));
        }
    }
    report.push(Check::new("mgf_series_vs_enumeration", mgf_dev, 0.0, 1e-10));

    let pmf_json: serde_json::Map<String, Value> = pmf.iter().map(|(k, p)| (k.to_string(), json!(p))).collect();
    let h_json: Vec<f64> = table.values().iter().map(|h| h.to_f64()).collect();
    let pass = report.all_pass();
    emit(
        a.out.as_deref(),
        &pretty(&json!({
            "h": h_json,
            "longest_cycle_pmf": pmf_json,
            "report": report,
            "pass": pass,
        }))?,
    )?;
    Ok(pass)
}

fn saddle(a: SaddleArgs) -> cycleweight::Result<bool> {
    positive("n", a.n)?;
    let w = a.family.weights()?;
    let sd = solve_saddle(&w, a.n)?;
    let h_estimate = if a.n >= 10 { Some(saddle_h_estimate(&w, a.n)?.0.ln()) } else { None };
    let diagnostics = if a.n >= 100 && sd.ell_n.is_some() {
        Some(admissibility_diagnostics(&w, a.n, a.tilt, a.y)?)
    } else {
        None
    };
    emit(
        a.out.as_deref(),
        &pretty(&json!({
            "saddle": sd,
            "ln_h_estimate": h_estimate,
            "diagnostics": diagnostics,
        }))?,
    )?;
    Ok(true)
}

fn sampler_config(run: &RunArgs) -> cycleweight::Result<SamplerConfig> {
    positive("n", run.n)?;
    positive("samples", run.samples)?;
    positive("workers", run.workers)?;
    Ok(SamplerConfig {
        n: run.n,
        num_samples: run.samples,
        seed: run.seed,
        workers: run.workers,
    })
}

fn sample(a: SampleArgs) -> cycleweight::Result<bool> {
    let run = a.run;
    let cfg = sampler_config(&run)?;
    let w = run.family.weights()?;
    let sampler = Sampler::new(&obtain_table(&w, run.n, &run.cache)?);
    let sink: Box<dyn Write> = match &run.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    sampler.for_each_sample(&cfg, |i, ct| {
        if (i + 1) % 10_000 == 0 {
            log::info!("{} / {} samples", i + 1, cfg.num_samples);
        }
        write_sample_line(&mut out, i, &ct)
    })?;
    out.flush()?;
    if sampler.incidents() > 0 {
        log::warn!("{} numeric incidents while sampling", sampler.incidents());
    }
    Ok(true)
}

fn verify(a: VerifyArgs) -> cycleweight::Result<bool> {
    let run = &a.run;
    let cfg = sampler_config(run)?;
    positive("k-longest", a.k_longest)?;
    let mut tol = Tolerances::default();
    for (k, v) in parse_overrides(&a.tol)? {
        tol.set(&k, v)?;
    }
    let w = run.family.weights()?;
    let sd = solve_saddle(&w, run.n)?;
    sd.ell()?;
    let sampler = Sampler::new(&obtain_table(&w, run.n, &run.cache)?);
    let batch = process_samples(&sampler.sample_batch(&cfg)?);
    let mut report = match a.experiment {
        Experiment::Poisson => verify_poisson_increments(&batch, &sd, &a.y_grid, &tol)?,
        Experiment::Gumbel => verify_gumbel(&batch, &sd, a.k_longest, &tol)?,
        Experiment::Profile => {
            let alpha = w.growth_exponent();
            cumulative_profile(&batch, &w, &sd, alpha, &a.x_grid, &tol)?
        }
        Experiment::Bn => bn_event_frequency(&batch, &w, &sd, &tol)?,
    };
    report.set_config("weights", &w);
    report.set_config("seed", cfg.seed);
    report.set_config("workers", cfg.workers);
    report.counts.insert("numeric_incidents".into(), sampler.incidents());
    emit(run.out.as_deref(), &(report.to_json_pretty()? + "\n"))?;
    for c in report.failures() {
        log::warn!("check {} failed: |{} - {}| > {}", c.name, c.observed, c.target, c.tol);
    }
    Ok(report.all_pass())
}

fn expansions(a: ExpansionArgs) -> cycleweight::Result<bool> {
    let (mut polylog_factor, mut tail_factor) = (1.0, 0.05);
    for (k, v) in parse_overrides(&a.tol)? {
        match k.as_str() {
            "polylog" => polylog_factor = v,
            "tail" => tail_factor = v,
            _ => return Err(Error::Validation(format!("unknown tolerance {k}; expected polylog or tail"))),
        }
    }
    let mut csv = String::from("delta,v,direct,approx,abs_error\n");
    let mut ok = true;
    for &delta in &a.delta_grid {
        for &v in &a.v_grid {
            let (direct, approx, err) = match a.kind {
                Sweep::Polylog => {
                    let p = polylog_asymp(delta, v)?;
                    ok &= p.abs_error <= polylog_factor * v;
                    (p.direct, p.approx, p.abs_error)
                }
                Sweep::Tail => {
                    let p = partial_sum_asymp(delta, v, a.x, a.terms)?;
                    if p.in_regime {
                        ok &= p.remainder() <= tail_factor * p.correction.abs();
                    }
                    (p.direct, p.integral_part + p.correction, p.remainder())
                }
            };
            csv.push_str(&format!("{delta:.16e},{v:.16e},{direct:.16e},{approx:.16e},{err:.16e}\n"));
        }
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let got = parse_overrides(&["tv=0.05".into(), " corr = 0.2".into()]).unwrap();
        assert_eq!(got, vec![("tv".to_owned(), 0.05), ("corr".to_owned(), 0.2)]);
        assert!(parse_overrides(&["tv".into()]).is_err());
        assert!(parse_overrides(&["tv=abc".into()]).is_err());
    }

    #[test]
    fn cache_names_are_exact_per_parameter() {
        let dir = Path::new("/tmp/c");
        let a = cache_path(dir, &WeightSequence::polynomial(1.0).unwrap()).unwrap();
        let b = cache_path(dir, &WeightSequence::polynomial(1.0 + f64::EPSILON).unwrap()).unwrap();
        let c = cache_path(dir, &WeightSequence::ewens(1.0).unwrap()).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert!(cache_path(dir, &WeightSequence::table(vec![1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Validation("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_VALIDATION);
        let cap = Error::Capacity { what: "n", requested: 2, limit: 1 };
        assert_eq!(exit_code(&cap), EXIT_VALIDATION);
        let num = Error::Numeric { message: "x".into(), trace: vec![] };
        assert_eq!(exit_code(&num), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_NUMERIC);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["cwperm", "--help"]), EXIT_OK);
        assert_eq!(run(["cwperm", "frobnicate"]), EXIT_VALIDATION);
    }
}
