//! Numeric checks of the saddle-point framework for the tilted function
//! `g_{n,s}(t) = (e^s - 1) sum_{k >= x_n(y)} (theta_k / k) t^k + g(t)`.

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::saddle::{solve_saddle, SaddleData};
use crate::error::{Error, Result};
use crate::numeric::theta_exp_sum;
use crate::weights::WeightSequence;

pub const DEFAULT_GRID_POINTS: usize = 1000;

/// Default exponent for `delta_n = v_n^xi`. Must lie in
/// `((alpha + 3) / 3, (alpha + 2) / 2)`; `(alpha + 2) / 2 - 0.1` when that
/// is inside, the interval midpoint otherwise.
pub fn default_xi(alpha: f64) -> f64 {
    let (lo, hi) = ((alpha + 3.0) / 3.0, (alpha + 2.0) / 2.0);
    let preferred = hi - 0.1;
    if preferred > lo {
        preferred
    } else {
        0.5 * (lo + hi)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsConfig {
    pub xi: Option<f64>,
    pub grid_points: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            xi: None,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

/// Admissibility report. Serializes to
/// `{"residual", "width", "monotonicity_violations", "bn_ratio"}`.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    /// `|a_n(r_n) - n| / sqrt(b_n(r_n))`.
    pub residual: f64,
    /// `delta_n^2 b_n(r_n) - log b_n(r_n)`.
    pub width: f64,
    /// Grid points in `(delta_n, pi]` where `Re g_{n,s}` exceeds its value at `delta_n`.
    pub monotonicity_violations: usize,
    /// `b_n(r_n) / (Gamma(alpha + 2) n*^{alpha + 2})`.
    pub bn_ratio: f64,
    #[serde(skip)]
    pub a_n: f64,
    #[serde(skip)]
    pub b_n: f64,
    #[serde(skip)]
    pub g_r: f64,
    #[serde(skip)]
    pub delta_n: f64,
    #[serde(skip)]
    pub xi: f64,
    #[serde(skip)]
    pub threshold: f64,
    #[serde(skip)]
    pub saddle: SaddleData,
}

pub fn admissibility_diagnostics(w: &WeightSequence, n: usize, s: f64, y: f64) -> Result<AdmissibilityReport> {
    admissibility_diagnostics_with(w, n, s, y, DiagnosticsConfig::default())
}

pub fn admissibility_diagnostics_with(
    w: &WeightSequence,
    n: usize,
    s: f64,
    y: f64,
    cfg: DiagnosticsConfig,
) -> Result<AdmissibilityReport> {
    if n < 100 {
        return Err(Error::domain(format!("diagnostics need n >= 100, got {n}")));
    }
    if !(y > 0.0) {
        return Err(Error::domain(format!("diagnostics need y > 0, got {y}")));
    }
    if cfg.grid_points < 2 {
        return Err(Error::domain("monotonicity grid needs at least two points"));
    }
    let sd = solve_saddle(w, n)?;
    let alpha = sd.alpha;
    let x = sd.threshold(y)?;
    let lo = x.ceil().max(1.0) as usize;
    let tilt = s.exp_m1();
    let v = sd.v_n;

    let a_n = sd.a_n + tilt * theta_exp_sum(w, 0.0, v, lo).value;
    let b_n = sd.b_n + tilt * theta_exp_sum(w, 1.0, v, lo).value;
    let g_r = sd.g_r + tilt * theta_exp_sum(w, -1.0, v, lo).value;

    let xi = cfg.xi.unwrap_or_else(|| default_xi(alpha));
    let delta_n = v.powf(xi);

    // coefficients of g_{n,s} at radius r_n
    let k_max = theta_exp_sum(w, -1.0, v, 1).truncation_k.max(lo);
    let es = s.exp();
    let coeffs: Vec<f64> = (1..=k_max)
        .map(|k| {
            let c = (w.ln_theta(k) - (k as f64).ln() - k as f64 * v).exp();
            if k >= lo {
                c * es
            } else {
                c
            }
        })
        .collect();
    let re_g = |phi: f64| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * phi).cos())
            .sum()
    };
    let reference = re_g(delta_n);
    let tol = 1e-12 * g_r.abs().max(1.0);
    let m = cfg.grid_points;
    let step = (std::f64::consts::PI - delta_n) / (m - 1) as f64;
    let violations = (1..m)
        .filter(|&i| re_g(delta_n + step * i as f64) > reference + tol)
        .count();

    Ok(AdmissibilityReport {
        residual: (a_n - n as f64).abs() / b_n.sqrt(),
        width: delta_n * delta_n * b_n - b_n.ln(),
        monotonicity_violations: violations,
        bn_ratio: b_n / (gamma(alpha + 2.0) * sd.n_star.powf(alpha + 2.0)),
        a_n,
        b_n,
        g_r,
        delta_n,
        xi,
        threshold: x,
        saddle: sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::saddle_h_estimate;

    fn poly(alpha: f64) -> WeightSequence {
        WeightSequence::polynomial(alpha).unwrap()
    }

    #[test]
    fn xi_lies_in_admissible_interval() {
        for alpha in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let xi = default_xi(alpha);
            assert!(xi > (alpha + 3.0) / 3.0 && xi < (alpha + 2.0) / 2.0, "alpha = {alpha}");
        }
        assert!((default_xi(1.0) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn untilted_matches_saddle_inputs() {
        let w = poly(1.0);
        let d = admissibility_diagnostics(&w, 2000, 0.0, 1.0).unwrap();
        let (_, sd) = saddle_h_estimate(&w, 2000).unwrap();
        assert_eq!(d.a_n, sd.a_n);
        assert_eq!(d.b_n, sd.b_n);
        assert_eq!(d.g_r, sd.g_r);
        assert_eq!(d.bn_ratio, sd.bn_ratio());
    }

    #[test]
    fn alpha_one_large_n() {
        let d = admissibility_diagnostics(&poly(1.0), 10_000, 0.5, 1.0).unwrap();
        assert_eq!(d.monotonicity_violations, 0);
        // the tilt moves a_n by about alpha y (e^s - 1) n* log n*, which is o(sqrt(b_n))
        assert!(d.residual < 1.0, "{}", d.residual);
        let expected_width = d.delta_n.powi(2) * d.b_n - d.b_n.ln();
        assert_eq!(d.width, expected_width);
    }

    #[test]
    fn width_follows_power_law() {
        // delta_n^2 b_n ~ Gamma(alpha+2) n*^{alpha + 2 - 2 xi}
        for n in [1_000, 10_000] {
            let d = admissibility_diagnostics(&poly(1.0), n, 0.0, 1.0).unwrap();
            let lead = 2.0 * d.saddle.n_star.powf(3.0 - 2.0 * d.xi);
            assert!((d.delta_n.powi(2) * d.b_n / lead - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn json_field_names() {
        let d = admissibility_diagnostics(&poly(2.0), 500, 0.0, 1.0).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["bn_ratio", "monotonicity_violations", "residual", "width"]);
    }

    #[test]
    fn preconditions() {
        assert!(admissibility_diagnostics(&poly(1.0), 99, 0.0, 1.0).is_err());
        assert!(admissibility_diagnostics(&poly(1.0), 1000, 0.0, 0.0).is_err());
    }
}
