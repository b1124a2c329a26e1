//! Spatial convergence sweep against a fine reference level.
//!
//! All mesh levels share one Brownian path per seed: the increment stream is
//! drawn on the coarsest time grid and bridge-refined down the hierarchy, so
//! level differences are strong (pathwise) errors measurable with few seeds.
//! The reference solution lives four refinements below the finest measured
//! level, on a nested mesh.

use rayon::prelude::*;

use gspde_core::noise::{sample_increments, uniform_grid};
use gspde_core::solver::{integrate, weighted_error, ErrorWeight};

use super::{fit_rate, ErrorReport, LevelResult};
use crate::config::Config;
use crate::setup::{seed_list, Setup};
use crate::CliError;

pub fn run_fem_rate(config: &Config) -> Result<ErrorReport, CliError> {
    if config.mesh.h_list.len() < 2 {
        return Err(CliError::InsufficientLevels(config.mesh.h_list.len()));
    }
    let setup = Setup::build(config)?;
    let level = setup.truncated(config.truncation.r_list[0])?;
    let delta = config.regularization.delta_list[0];
    let pair = level.regularized(delta)?;
    let noise = level.noise_model()?;
    let dt_rule = config.dt_rule()?;

    // nested spaces: coarsest from the target width, the rest by refinement
    let h_list = &config.mesh.h_list;
    let base_space = level.space(h_list[0])?;
    let mut spaces = vec![base_space.clone()];
    for h in &h_list[1..] {
        let factor = (h_list[0] / h).round() as usize;
        spaces.push(std::sync::Arc::new(base_space.refine(factor)));
    }
    let ref_factor = (h_list[0] / h_list.last().unwrap()).round() as usize * 4;
    let ref_space = std::sync::Arc::new(base_space.refine(ref_factor));

    let mut instances = Vec::new();
    for (space, h) in spaces.iter().zip(h_list) {
        let ops = level.assemble_on(space, &pair)?;
        instances.push(level.instance(ops, noise.clone(), dt_rule.dt_for(*h), delta)?);
    }
    let ref_ops = level.assemble_on(&ref_space, &pair)?;
    let h_ref = h_list.last().unwrap() / 4.0;
    let ref_instance =
        level.instance(ref_ops.clone(), noise.clone(), dt_rule.dt_for(h_ref), delta)?;

    // time-grid refinement exponents relative to the coarsest level
    let k = dt_rule.refinements_per_level();
    let level_refine: Vec<u32> = (0..h_list.len() as u32).map(|i| i * k).collect();
    let ref_refine = (h_list.len() as u32 - 1) * k + 2 * k;

    let n_steps0 = (config.experiment.t_final / instances[0].dt).round() as usize;
    if n_steps0 == 0 {
        return Err(CliError::Config(
            "coarsest level has zero time steps".into(),
        ));
    }
    let grid0 = uniform_grid(instances[0].dt, n_steps0);

    let seeds = seed_list(config);
    let per_seed: Vec<Result<Vec<f64>, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let run = || -> Result<Vec<f64>, CliError> {
                let base = sample_increments(noise.n_modes(), seed, &grid0)?;
                let u_ref = {
                    let stream = base.refine(ref_refine);
                    integrate(&ref_instance, &stream, usize::MAX)?
                };
                let mut errs = Vec::with_capacity(instances.len());
                for (i, inst) in instances.iter().enumerate() {
                    let stream = base.refine(level_refine[i]);
                    let traj = integrate(inst, &stream, usize::MAX)?;
                    let e = weighted_error(
                        &ref_ops,
                        u_ref.last(),
                        &spaces[i],
                        traj.last(),
                        ErrorWeight::BetaGamma,
                    )?;
                    errs.push(e);
                }
                Ok(errs)
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let ok: Vec<&Vec<f64>> = per_seed.iter().filter_map(|r| r.as_ref().ok()).collect();
    let n_failed = per_seed.len() - ok.len();
    if ok.len() < 2 {
        return Err(CliError::InsufficientSeeds(format!(
            "{} of {} seeds failed",
            n_failed,
            per_seed.len()
        )));
    }

    // RMS over seeds per level, with the delta-method standard error
    let mut levels = Vec::with_capacity(h_list.len());
    for (i, &h) in h_list.iter().enumerate() {
        let sq: Vec<f64> = ok.iter().map(|errs| errs[i] * errs[i]).collect();
        let n = sq.len() as f64;
        let mean_sq = sq.iter().sum::<f64>() / n;
        let var_sq = sq
            .iter()
            .map(|v| (v - mean_sq) * (v - mean_sq))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        let rms = mean_sq.sqrt();
        let stderr = if rms > 0.0 {
            (var_sq / n).sqrt() / (2.0 * rms)
        } else {
            0.0
        };
        levels.push(LevelResult {
            param: h,
            error: rms,
            stderr,
            n_seeds: sq.len(),
        });
    }

    let fit_input: Vec<(f64, f64, f64)> = levels
        .iter()
        .map(|l| (l.param, l.error, l.stderr))
        .collect();
    let slope = fit_rate(&fit_input).map_err(|e| match e {
        // enough levels were configured, so the shortfall is statistical
        CliError::InsufficientLevels(got) if levels.len() >= 3 => {
            CliError::InsufficientSeeds(format!(
                "only {got} of {} levels have confidence intervals tight enough to fit",
                levels.len()
            ))
        }
        other => other,
    })?;

    let mut notes = Vec::new();
    if n_failed > 0 {
        notes.push(format!("{n_failed} seed(s) failed"));
    }
    Ok(ErrorReport {
        experiment: "fem-rate".into(),
        param_name: "h".into(),
        levels,
        slope: Some(slope),
        bound_proxy: Vec::new(),
        constants: vec![("h_ref".into(), h_ref), ("delta".into(), delta)],
        pass: true,
        notes,
    })
}
