//! Saddle-point analysis of `h_n = [t^n] exp(g(t))` and the small-`v`
//! expansions it relies on.

mod diagnostics;
mod expansions;
mod saddle;
mod zeta;

pub use diagnostics::{
    admissibility_diagnostics, admissibility_diagnostics_with, default_xi, AdmissibilityReport, DiagnosticsConfig,
    DEFAULT_GRID_POINTS,
};
pub use expansions::{
    falling_factorial, partial_sum_asymp, polylog_asymp, PartialSumAsymp, PolylogAsymp, BOUNDARY_CONSTANT,
    PARTIAL_SUM_REGIME,
};
pub use saddle::{
    ell_n, expected_tail_count, initial_guess, saddle_h_estimate, solve_saddle, SaddleData,
    SADDLE_RESIDUAL_TOLERANCE,
};
pub use zeta::zeta;
