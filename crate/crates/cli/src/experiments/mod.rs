//! Experiment orchestration: convergence sweeps, the validation suite and
//! log-log rate regression.

mod delta_sweep;
mod fem_rate;
mod trunc_sweep;
mod validation;

pub use delta_sweep::run_delta_sweep;
pub use fem_rate::run_fem_rate;
pub use trunc_sweep::run_truncation_sweep;
pub use validation::{run_validation_suite, ValidationItem, ValidationReport};

use crate::CliError;

/// One measured level of a sweep.
#[derive(Debug, Clone)]
pub struct LevelResult {
    /// The swept parameter (h, delta or R).
    pub param: f64,
    /// RMS (or mean, for Cauchy differences) error at this level.
    pub error: f64,
    /// Standard error of `error` over the Monte Carlo ensemble.
    pub stderr: f64,
    pub n_seeds: usize,
}

/// Sweep outcome: per-level errors with confidence information, the fitted
/// log-log slope where applicable, measured constants, and the pass flag.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub experiment: String,
    pub param_name: String,
    pub levels: Vec<LevelResult>,
    pub slope: Option<(f64, f64)>,
    /// Bound proxy `B(R)` per level (truncation sweep only).
    pub bound_proxy: Vec<f64>,
    /// Named empirical constants carried along for the report.
    pub constants: Vec<(String, f64)>,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Weighted least squares of `log(error)` on `log(param)`.
///
/// Levels whose relative standard error exceeds a third of the median
/// log-gap between consecutive levels are dropped before fitting; fewer
/// than three usable levels is an error.
pub fn fit_rate(levels: &[(f64, f64, f64)]) -> Result<(f64, f64), CliError> {
    let usable = usable_levels(levels);
    if usable.len() < 3 {
        return Err(CliError::InsufficientLevels(usable.len()));
    }

    // weights from the log-scale standard errors, floored to keep the
    // deterministic (zero-noise) case finite
    let pts: Vec<(f64, f64, f64)> = usable
        .iter()
        .map(|&(p, e, se)| {
            let sigma_log = (se / e).max(1e-8);
            (p.ln(), e.ln(), 1.0 / (sigma_log * sigma_log))
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xbar = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / sw;
    let ybar = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xbar) * (p.0 - xbar)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;

    // residual-scaled slope uncertainty
    let n = pts.len() as f64;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (ybar + slope * (p.0 - xbar));
            p.2 * r * r
        })
        .sum();
    let variance = if n > 2.0 {
        ss_res / (n - 2.0) / sxx
    } else {
        0.0
    };
    Ok((slope, variance.max(0.0).sqrt()))
}

fn usable_levels(levels: &[(f64, f64, f64)]) -> Vec<(f64, f64, f64)> {
    let finite: Vec<(f64, f64, f64)> = levels
        .iter()
        .copied()
        .filter(|&(p, e, _)| p > 0.0 && e > 0.0)
        .collect();
    if finite.len() < 2 {
        return finite;
    }
    let mut gaps: Vec<f64> = finite
        .windows(2)
        .map(|w| (w[0].1.ln() - w[1].1.ln()).abs())
        .collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_gap = gaps[gaps.len() / 2];
    finite
        .into_iter()
        .filter(|&(_, e, se)| se / e <= median_gap.max(1e-12) / 3.0)
        .collect()
}
