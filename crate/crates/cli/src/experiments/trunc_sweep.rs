//! Truncation sweep: errors of increasingly large compact domains against a
//! reference radius, compared to the theoretical bound proxy
//! `B(R) = sup_{z >= R-1} alpha(z) sqrt(gamma(z))`.
//!
//! Solutions on different radii are compared on the reference mesh: below
//! `R + 1` the smaller domain's solution transfers node-by-node (the mesh
//! widths are chosen so nodes coincide), beyond it the dynamics are frozen
//! at the initial data. The sweep checks that the errors strictly decrease
//! and that `error^2 / B(R)` stays within a factor-ten band over the list
//! tail; the rate behind the bound is not claimed to be sharp.

use rayon::prelude::*;

use gspde_core::noise::{sample_increments, uniform_grid};
use gspde_core::solver::integrate;

use super::{ErrorReport, LevelResult};
use crate::config::{Config, DtRule};
use crate::setup::{seed_list, Setup};
use crate::CliError;

pub fn run_truncation_sweep(config: &Config) -> Result<ErrorReport, CliError> {
    let r_list = &config.truncation.r_list;
    if r_list.len() < 2 {
        return Err(CliError::InsufficientLevels(r_list.len()));
    }
    let r_ref = config.truncation.r_ref;
    if !(r_ref > *r_list.last().unwrap()) {
        return Err(CliError::Config(
            "truncation.r_ref must exceed the largest radius".into(),
        ));
    }
    let setup = Setup::build(config)?;
    if setup.graph.unbounded_edge().is_none() {
        return Err(CliError::Config(
            "truncation sweep needs an unbounded edge".into(),
        ));
    }

    // bound proxy B(R) on a grid, and its decay check
    let bound_proxy: Vec<f64> = r_list
        .iter()
        .map(|&r| bound_proxy_at(&setup, r, r_ref))
        .collect();
    for w in bound_proxy.windows(2) {
        if !(w[1] < w[0]) {
            return Err(CliError::GammaTooFat(format!(
                "B(R) does not decay: {bound_proxy:?}"
            )));
        }
    }

    let h = *config.mesh.h_list.last().unwrap();
    let dt = match config.dt_rule()? {
        DtRule::Fixed(v) => v,
        rule => rule.dt_for(h),
    };
    let delta = config.regularization.delta_list[0];

    // per-radius instances plus the reference
    let mut radii: Vec<f64> = r_list.clone();
    radii.push(r_ref);
    let mut levels_data = Vec::new();
    for &r in &radii {
        let level = setup.truncated(r)?;
        let pair = level.regularized(delta)?;
        let space = level.space(h)?;
        let ops = level.assemble_on(&space, &pair)?;
        let noise = level.noise_model()?;
        let inst = level.instance(ops, noise, dt, delta)?;
        levels_data.push((space, inst));
    }
    let (ref_space, ref_inst) = levels_data.pop().unwrap();
    let ref_ops = ref_inst.ops.clone();
    let clipped = ref_space
        .graph()
        .clipped_edge()
        .expect("unbounded source graph");

    // node alignment between each truncated mesh and the reference mesh
    for (space, _) in &levels_data {
        let h_r = space.h_edge(clipped);
        let h_ref = ref_space.h_edge(clipped);
        if (h_r - h_ref).abs() > 1e-10 * h_ref {
            return Err(CliError::Core(gspde_core::Error::NonNestedMeshes(format!(
                "clipped-edge widths differ: {h_r} vs {h_ref}; choose radii and h so the edge \
                 lengths are integer multiples of h"
            ))));
        }
    }

    let u0 = setup.u0_field()?;
    let n_modes = levels_data[0].1.noise.n_modes();
    let n_steps = (config.experiment.t_final / dt).round() as usize;
    let grid = uniform_grid(dt, n_steps);
    let seeds = seed_list(config);

    let per_seed: Vec<Result<Vec<f64>, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let run = || -> Result<Vec<f64>, CliError> {
                let stream = sample_increments(n_modes, seed, &grid)?;
                let u_ref = integrate(&ref_inst, &stream, usize::MAX)?.last().to_vec();
                let mut errs = Vec::with_capacity(levels_data.len());
                for (space, inst) in &levels_data {
                    let u_r = integrate(inst, &stream, usize::MAX)?.last().to_vec();
                    // extend onto the reference mesh: transfer below R+1,
                    // frozen initial data beyond
                    let mut ext = vec![0.0; ref_space.dim()];
                    for e in ref_space.graph().edges() {
                        let top = space.graph().edge(e.id).b;
                        for j in 0..=ref_space.n_elems(e.id) {
                            let z = ref_space.node_z(e.id, j);
                            let dof = ref_space.dof_of_node(e.id, j);
                            ext[dof] = if z <= top + 1e-12 {
                                space.eval(&u_r, e.id, z)
                            } else {
                                u0.eval(e.id, z)
                            };
                        }
                    }
                    let diff: Vec<f64> = u_ref.iter().zip(&ext).map(|(a, b)| a - b).collect();
                    errs.push(ref_ops.norm_m_err(&diff));
                }
                Ok(errs)
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
    for (i, &r) in r_list.iter().enumerate() {
        let sq: Vec<f64> = ok.iter().map(|e| e[i] * e[i]).collect();
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
            param: r,
            error: rms,
            stderr,
            n_seeds: sq.len(),
        });
    }

    let mut pass = true;
    let mut notes = Vec::new();
    for w in levels.windows(2) {
        if !(w[1].error < w[0].error) {
            pass = false;
            notes.push(format!(
                "errors do not decrease: {:.3e} -> {:.3e} at R = {}",
                w[0].error, w[1].error, w[1].param
            ));
        }
    }
    // boundedness of error^2 / B(R) over the tail (last three levels)
    let ratios: Vec<f64> = levels
        .iter()
        .zip(&bound_proxy)
        .map(|(l, b)| l.error * l.error / b)
        .collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let rmax = tail.iter().fold(0.0_f64, |m, &v| m.max(v));
    let rmin = tail.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(rmax / rmin <= 10.0) {
        pass = false;
        notes.push(format!(
            "error^2/B ratio band {:.3} exceeds 10",
            rmax / rmin
        ));
    }
    if n_failed > 0 {
        notes.push(format!("{n_failed} seed(s) failed"));
    }

    Ok(ErrorReport {
        experiment: "trunc-sweep".into(),
        param_name: "R".into(),
        levels,
        slope: None,
        bound_proxy,
        constants: vec![
            ("r_ref".into(), r_ref),
            ("band_ratio".into(), rmax / rmin),
            ("h".into(), h),
        ],
        pass,
        notes,
    })
}

/// `sup_{z >= R-1} alpha_m(z) sqrt(gamma_m(z))` sampled on a tail grid.
fn bound_proxy_at(setup: &Setup, r: f64, r_ref: f64) -> f64 {
    let edge = setup.graph.unbounded_edge().expect("checked");
    let lo = (r - 1.0).max(edge.a);
    let hi = (r_ref + 10.0).max(lo + 10.0);
    let n = 4000;
    let mut sup = 0.0_f64;
    for i in 0..=n {
        let z = lo + (hi - lo) * i as f64 / n as f64;
        let v = setup.coeff.alpha.eval(edge.id, z) * setup.gamma.eval(edge.id, z).max(0.0).sqrt();
        sup = sup.max(v);
    }
    sup
}
