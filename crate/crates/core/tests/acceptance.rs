//! Acceptance gate: runs every acceptance criterion at its stated tolerance
//! and prints one PASS/FAIL line per criterion.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cycleweight::asymptotics::{
    admissibility_diagnostics_with, initial_guess, partial_sum_asymp, polylog_asymp, saddle_h_estimate, solve_saddle,
    DiagnosticsConfig, SaddleData,
};
use cycleweight::oracle::{ExactOracle, HTable};
use cycleweight::sampler::{Sampler, SamplerConfig};
use cycleweight::stats::{
    bn_event_frequency, process_samples, verify_gumbel, verify_poisson_increments, ProcessSample, Tolerances,
    VerificationReport,
};
use cycleweight::{CycleType, WeightSequence};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn poly(alpha: f64) -> WeightSequence {
    WeightSequence::polynomial(alpha).unwrap()
}

fn oracle_agreement() -> Outcome {
    let oracle = ExactOracle::default();
    let mut worst = 0f64;
    let families = [poly(0.5), poly(1.0), poly(2.0), WeightSequence::ewens(2.0).unwrap()];
    for w in &families {
        let table = HTable::build(w, 20);
        for n in 0..=20 {
            let exact = oracle.h_exact(w, n).unwrap();
            worst = worst.max((table.get(n).unwrap().ratio(&exact) - 1.0).abs());
        }
    }
    // Ewens(2): h_n = 2 (2 + 1) ... (2 + n - 1) / n! = n + 1
    let ewens = HTable::build(&families[3], 20);
    let mut closed = 0f64;
    for n in 0..=20 {
        closed = closed.max((ewens.get(n).unwrap().to_f64() / (n + 1) as f64 - 1.0).abs());
    }
    let h3 = ewens.get(3).unwrap().to_f64();
    outcome(
        worst <= 1e-10 && closed <= 1e-10 && (h3 - 4.0).abs() <= 1e-10 * 4.0,
        format!("max rel diff recurrence vs partition sum {worst:.2e}; Ewens(2) closed form {closed:.2e}; h_3 = {h3}"),
    )
}

fn sampler_exactness() -> Outcome {
    let start = Instant::now();
    let w = poly(1.0);
    let exact = ExactOracle::default().enumerate_cycle_types(&w, 6).unwrap();
    let sampler = Sampler::new(&HTable::build(&w, 6));
    let cfg = SamplerConfig { n: 6, num_samples: 1_000_000, seed: 2024, workers: 4 };
    let mut counts: HashMap<CycleType, u64> = HashMap::new();
    sampler
        .for_each_sample(&cfg, |_, ct| {
            *counts.entry(ct).or_default() += 1;
            Ok(())
        })
        .unwrap();
    let total = cfg.num_samples as f64;
    let mut tv = 0.0;
    for (ct, p) in &exact {
        tv += (counts.get(ct).copied().unwrap_or(0) as f64 / total - p).abs();
    }
    // sampled types missing from the enumeration would also count
    let known: u64 = exact.iter().map(|(ct, _)| counts.get(ct).copied().unwrap_or(0)).sum();
    tv += (cfg.num_samples as u64 - known) as f64 / total;
    tv *= 0.5;
    let elapsed = start.elapsed();
    outcome(
        tv < 0.005 && elapsed < Duration::from_secs(60),
        format!("TV = {tv:.5} over {} types; {:.2}s", exact.len(), elapsed.as_secs_f64()),
    )
}

fn saddle_solver() -> Outcome {
    let w = poly(1.0);
    let sd = solve_saddle(&w, 100).unwrap();
    let closed = -((201.0 - 401f64.sqrt()) / 200.0).ln();
    let guess = initial_guess(&w, 100);
    let err = (sd.v_n - closed).abs();
    let rel = (guess - sd.v_n).abs() / sd.v_n;
    outcome(
        err <= 1e-8 && rel <= 0.005 && (guess - 0.1).abs() < 1e-15,
        format!("v_n = {:.10}, |v_n - closed form| = {err:.1e}; initial value {guess} off by {:.3}%", sd.v_n, 100.0 * rel),
    )
}

fn polylog_contract() -> Outcome {
    let mut ok = true;
    let mut worst = 0f64;
    for delta in [0.0, 1.0] {
        for v in [0.2, 0.1, 0.05, 0.02] {
            let p = polylog_asymp(delta, v).unwrap();
            let x = (-v).exp();
            let closed = if delta == 0.0 { x / (1.0 - x) } else { x / (1.0 - x).powi(2) };
            ok &= p.abs_error <= v && (p.direct - closed).abs() <= 1e-12 * closed;
            worst = worst.max(p.abs_error / v);
        }
    }
    let e = polylog_asymp(1.0, 0.1).unwrap().abs_error;
    outcome(ok, format!("max |error| / v = {worst:.3e}; error at delta = 1, v = 0.1 is {e:.4e}"))
}

fn tail_regime() -> Outcome {
    let p = partial_sum_asymp(0.0, 0.05, 200.0, 4).unwrap();
    let rem = p.remainder();
    outcome(
        p.in_regime && rem <= 0.05 * p.correction.abs(),
        format!("remainder {rem:.3e} vs 0.05 * boundary term {:.3e}", 0.05 * p.correction.abs()),
    )
}

fn h_extraction() -> Outcome {
    let start = Instant::now();
    let w = poly(1.0);
    let table = HTable::build(&w, 2000);
    let errs: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|&n| (saddle_h_estimate(&w, n).unwrap().0.ratio(&table.get(n).unwrap()) - 1.0).abs())
        .collect();
    let elapsed = start.elapsed();
    outcome(
        errs[2] < 0.10 && errs.windows(2).all(|p| p[1] <= p[0]) && elapsed < Duration::from_secs(60),
        format!(
            "relative errors at n = 500, 1000, 2000: {:.4}, {:.4}, {:.4}; {:.2}s",
            errs[0],
            errs[1],
            errs[2],
            elapsed.as_secs_f64()
        ),
    )
}

struct LargeRun {
    w: WeightSequence,
    sd: SaddleData,
    batch: Vec<ProcessSample>,
    seconds: f64,
}

fn large_run() -> LargeRun {
    let start = Instant::now();
    let w = poly(1.0);
    let n = 20_000;
    let sampler = Sampler::new(&HTable::build(&w, n));
    let cfg = SamplerConfig { n, num_samples: 5000, seed: 7, workers: 8 };
    let batch = process_samples(&sampler.sample_batch(&cfg).unwrap());
    assert_eq!(sampler.incidents(), 0);
    let sd = solve_saddle(&w, n).unwrap();
    LargeRun { w, sd, batch, seconds: start.elapsed().as_secs_f64() }
}

fn failed_names(r: &VerificationReport) -> String {
    let f: Vec<_> = r.failures().map(|c| c.name.as_str()).collect();
    if f.is_empty() {
        "none".into()
    } else {
        f.join(", ")
    }
}

fn poisson_process(run: &LargeRun) -> Outcome {
    let r = verify_poisson_increments(&run.batch, &run.sd, &[0.5, 1.0, 2.0], &Tolerances::default()).unwrap();
    let get = |name: &str| r.check(name).unwrap().observed;
    outcome(
        r.all_pass() && r.is_consistent() && r.checks.len() == 12,
        format!(
            "means {:.3} {:.3} {:.3}; var/mean {:.3} {:.3} {:.3}; TV {:.3} {:.3} {:.3}; corr {:.3} {:.3} {:.3}; failed: {}; sampling {:.1}s",
            get("mean_1"),
            get("mean_2"),
            get("mean_3"),
            get("var_mean_ratio_1"),
            get("var_mean_ratio_2"),
            get("var_mean_ratio_3"),
            get("tv_1"),
            get("tv_2"),
            get("tv_3"),
            get("corr_1_2"),
            get("corr_1_3"),
            get("corr_2_3"),
            failed_names(&r),
            run.seconds
        ),
    )
}

fn gumbel(run: &LargeRun) -> Outcome {
    let r = verify_gumbel(&run.batch, &run.sd, 3, &Tolerances::default()).unwrap();
    let ks1 = r.check("ks_gumbel_1").unwrap().observed;
    let ks2 = r.check("ks_joint_2").unwrap().observed;
    let ks3 = r.check("ks_joint_3").unwrap().observed;
    let violations = r.counts["jump_order_violations"];
    outcome(
        ks1 < 0.1 && ks2 < 0.12 && ks3 < 0.12 && violations == 0,
        format!(
            "KS Gumbel {ks1:.4}; two-sample KS j=2 {ks2:.4}, j=3 {ks3:.4} (j=1 {:.4}); jump order violations {violations}",
            r.check("ks_joint_1").unwrap().observed
        ),
    )
}

fn bn_control(run: &LargeRun) -> Outcome {
    let r = bn_event_frequency(&run.batch, &run.w, &run.sd, &Tolerances::default()).unwrap();
    let freq = r.check("bn_frequency").unwrap().observed;
    let bound = r.distances["markov_bound"];
    outcome(
        freq < 0.05 && freq <= 3.0 * bound,
        format!("frequency {freq:.4}; Markov bound {bound:.4}; 3x bound {:.4}", 3.0 * bound),
    )
}

fn mgf_identity() -> Outcome {
    let oracle = ExactOracle::default();
    let mut worst = 0f64;
    let mut cases = 0;
    for w in [poly(0.5), poly(1.0), poly(2.0)] {
        for n in 1..=12 {
            for x in [1.0, 2.0, 3.0] {
                for s in [-1.0, 0.5, 1.0] {
                    let mut direct = 0.0;
                    oracle
                        .for_each_cycle_type(&w, n, |ct, p| direct += (s * ct.tail_count(x) as f64).exp() * p)
                        .unwrap();
                    let series = oracle.mgf_series(&w, n, x, s).unwrap();
                    worst = worst.max((series - direct).abs() / direct.max(1.0));
                    cases += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("{cases} cases; max |series - enumeration| / max(1, value) = {worst:.2e}"))
}

fn admissibility() -> Outcome {
    let cfg = DiagnosticsConfig { xi: None, grid_points: 1000 };
    let w = poly(1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [0.0, 0.5] {
        let d = admissibility_diagnostics_with(&w, 100_000, s, 1.0, cfg).unwrap();
        ok &= (0.9..=1.1).contains(&d.bn_ratio) && d.monotonicity_violations == 0;
        parts.push(format!(
            "s = {s}: b_n ratio {:.4}, violations {}",
            d.bn_ratio, d.monotonicity_violations
        ));
    }
    outcome(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 oracle agreement", oracle_agreement()),
        ("2 sampler exactness", sampler_exactness()),
        ("3 saddle solver", saddle_solver()),
        ("4 polylog expansion", polylog_contract()),
        ("5 tail expansion regime", tail_regime()),
        ("6 normalization asymptotics", h_extraction()),
    ];
    let run = large_run();
    results.push(("7 Poisson process increments", poisson_process(&run)));
    results.push(("8 Gumbel longest cycles", gumbel(&run)));
    results.push(("9 cap event control", bn_control(&run)));
    results.push(("10 moment generating function", mgf_identity()));
    results.push(("11 admissibility diagnostics", admissibility()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
