//! Regularization sweep: Cauchy differences between consecutive
//! regularization levels on one fixed fine mesh.
//!
//! The regularization does not touch the noise, so every level shares the
//! same increment stream per seed; the differences isolate the coefficient
//! perturbation. No convergence rate is claimed for this limit, so the pass
//! criterion is monotone decrease within confidence bands plus a
//! factor-four drop across the list.

use rayon::prelude::*;

use gspde_core::noise::{sample_increments, uniform_grid};
use gspde_core::solver::{integrate, weighted_error, ErrorWeight};

use super::{ErrorReport, LevelResult};
use crate::config::Config;
use crate::setup::{seed_list, Setup};
use crate::CliError;

pub fn run_delta_sweep(config: &Config) -> Result<ErrorReport, CliError> {
    let deltas = &config.regularization.delta_list;
    if deltas.len() < 2 {
        return Err(CliError::InsufficientLevels(deltas.len()));
    }
    let setup = Setup::build(config)?;
    let level = setup.truncated(config.truncation.r_list[0])?;
    let h = *config.mesh.h_list.last().unwrap();
    let space = level.space(h)?;
    let noise = level.noise_model()?;
    let dt = config.dt_rule()?.dt_for(h);

    let mut instances = Vec::new();
    for &delta in deltas {
        let pair = level.regularized(delta)?;
        let ops = level.assemble_on(&space, &pair)?;
        instances.push(level.instance(ops, noise.clone(), dt, delta)?);
    }
    // all instances share the mesh; use the first level's error-norm mass
    let norm_ops = instances[0].ops.clone();

    let n_steps = (config.experiment.t_final / dt).round() as usize;
    let grid = uniform_grid(dt, n_steps);
    let seeds = seed_list(config);

    let per_seed: Vec<Result<Vec<f64>, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let run = || -> Result<Vec<f64>, CliError> {
                let stream = sample_increments(noise.n_modes(), seed, &grid)?;
                let finals: Vec<Vec<f64>> = instances
                    .iter()
                    .map(|inst| Ok(integrate(inst, &stream, usize::MAX)?.last().to_vec()))
                    .collect::<Result<_, CliError>>()?;
                let mut diffs = Vec::with_capacity(finals.len() - 1);
                for w in finals.windows(2) {
                    diffs.push(weighted_error(
                        &norm_ops,
                        &w[0],
                        &space,
                        &w[1],
                        ErrorWeight::BetaGamma,
                    )?);
                }
                Ok(diffs)
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let ok: Vec<&Vec<f64>> = per_seed.iter().filter_map(|r| r.as_ref().ok()).collect();
    let n_failed = per_seed.len() - ok.len();
    if ok.is_empty() {
        return Err(CliError::InsufficientSeeds(format!(
            "all {} seeds failed",
            per_seed.len()
        )));
    }

    let mut levels = Vec::new();
    for i in 0..deltas.len() - 1 {
        let vals: Vec<f64> = ok.iter().map(|d| d[i]).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        levels.push(LevelResult {
            param: deltas[i],
            error: mean,
            stderr: (var / n).sqrt(),
            n_seeds: vals.len(),
        });
    }

    // non-increasing within the 95% band, and the last difference at most a
    // quarter of the first
    let mut pass = true;
    let mut notes = Vec::new();
    for w in levels.windows(2) {
        let band = 1.96 * (w[0].stderr + w[1].stderr);
        if w[1].error > w[0].error + band {
            pass = false;
            notes.push(format!(
                "difference increased from {:.3e} to {:.3e} at delta = {:.3e}",
                w[0].error, w[1].error, w[1].param
            ));
        }
    }
    let first = levels.first().unwrap().error;
    let last = levels.last().unwrap().error;
    if !(last <= 0.25 * first) {
        pass = false;
        notes.push(format!("last/first = {:.3}", last / first));
    }
    if n_failed > 0 {
        notes.push(format!("{n_failed} seed(s) failed"));
    }

    Ok(ErrorReport {
        experiment: "delta-sweep".into(),
        param_name: "delta".into(),
        levels,
        slope: None,
        bound_proxy: Vec::new(),
        constants: vec![("h".into(), h), ("last_over_first".into(), last / first)],
        pass,
        notes,
    })
}
