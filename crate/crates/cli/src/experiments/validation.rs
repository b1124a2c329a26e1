//! Aggregated invariant checks: coercivity of the shifted form, the
//! pointwise trace bound of the noise basis, symmetry of the form matrix for
//! unit weights, stability of the weighted interpolation-inequality
//! constant, the regularization bounds and mass conservation.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use gspde_core::coeff::{
    check_asp_reg, check_gamma_derivative_bound, validate_weight_compatibility,
    validate_weight_compatibility_regularized, KappaOptions, WeightFamily,
};
use gspde_core::noise::{sample_increments, uniform_grid};
use gspde_core::solver::{integrate, ProblemInstance, ReactionFn};

use crate::config::Config;
use crate::setup::Setup;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct ValidationItem {
    pub name: String,
    pub pass: bool,
    pub constants: Vec<(String, f64)>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub items: Vec<ValidationItem>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pass": self.all_pass(),
            "items": self.items.iter().map(|i| serde_json::json!({
                "name": i.name,
                "pass": i.pass,
                "detail": i.detail,
                "constants": i.constants.iter()
                    .map(|(k, v)| (k.clone(), *v))
                    .collect::<std::collections::BTreeMap<String, f64>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn run_validation_suite(config: &Config) -> Result<ValidationReport, CliError> {
    let setup = Setup::build(config)?;
    let level = setup.truncated(config.truncation.r_list[0])?;
    let delta = config.regularization.delta_list[0];
    let pair = level.regularized(delta)?;
    let h = *config.mesh.h_list.last().unwrap();
    let space = level.space(h)?;
    let ops = level.assemble_on(&space, &pair)?;
    let noise = level.noise_model()?;
    let unit_gamma = setup.gamma_family == Some(WeightFamily::Unit);

    let mut items = Vec::new();

    // weight compatibility on the full graph and its regularized analogue
    let kappa = validate_weight_compatibility(
        &setup.coeff.alpha,
        &setup.coeff.beta,
        &setup.gamma,
        setup.graph.edges(),
        &KappaOptions::default(),
    );
    items.push(ValidationItem {
        name: "weight-compatibility".into(),
        pass: kappa.pass,
        constants: vec![
            ("kappa".into(), kappa.kappa),
            ("refinement_ratio".into(), kappa.ratio),
        ],
        detail: format!(
            "grid sup of alpha |gamma'|^2 / (beta gamma^2); domain truncated: {}",
            kappa.truncated_domain
        ),
    });
    let kappa1 = validate_weight_compatibility_regularized(
        &pair,
        &level.gamma,
        &level.graph,
        &KappaOptions::default(),
    );
    items.push(ValidationItem {
        name: "weight-compatibility-regularized".into(),
        pass: kappa1.pass,
        constants: vec![("kappa1".into(), kappa1.kappa)],
        detail: "regularized analogue on the truncated graph".into(),
    });

    let gder =
        check_gamma_derivative_bound(&setup.gamma, setup.graph.edges(), &KappaOptions::default());
    items.push(ValidationItem {
        name: "gamma-derivative-bound".into(),
        pass: gder.finite,
        constants: vec![
            ("c_bounded".into(), gder.c_bounded),
            ("c_unbounded".into(), gder.c_unbounded),
        ],
        detail: "finite sampled constants in the weight growth condition".into(),
    });

    // regularization bounds with unit outer constants
    let reg = check_asp_reg(
        &pair,
        &setup.coeff.alpha,
        &level.alpha_r,
        &setup.coeff.beta,
        &level.graph,
        1000,
    );
    {
        let mut detail = format!(
            "violations: lower {:.3e}, upper {:.3e}",
            reg.lower_violation, reg.upper_violation
        );
        if reg.c5 > 100.0 {
            detail.push_str(&format!(
                "; warning: beta cap ratio c5 = {:.1} is large (steep log constants)",
                reg.c5
            ));
        }
        items.push(ValidationItem {
            name: "regularization-bounds".into(),
            pass: reg.pass,
            constants: vec![
                ("c1_delta".into(), reg.c1_delta),
                ("c3".into(), reg.c3),
                ("c4_delta".into(), reg.c4_delta),
                ("c5".into(), reg.c5),
            ],
            detail,
        });
    }

    // coercivity of the shifted form on random dof vectors
    {
        let eps = 0.05;
        let lambda = kappa1.kappa.max(eps) / 8.0 * (1.0 + eps);
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0E2);
        let mut violations = 0usize;
        let mut min_q = f64::INFINITY;
        for _ in 0..1000 {
            let phi: Vec<f64> = (0..ops.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let q = lambda * ops.m_delta.bilinear(&phi, &phi) - ops.a.bilinear(&phi, &phi);
            min_q = min_q.min(q);
            if q < 0.0 {
                violations += 1;
            }
        }
        items.push(ValidationItem {
            name: "coercivity".into(),
            pass: violations == 0,
            constants: vec![
                ("lambda".into(), lambda),
                ("violations".into(), violations as f64),
                ("min_quadratic_form".into(), min_q),
            ],
            detail: "lambda ||phi||^2 - phi^T A phi >= 0 over 1000 random vectors".into(),
        });
    }

    // pointwise trace bound of the noise basis
    {
        let margin = noise.bound_margin(&level.graph, 512);
        items.push(ValidationItem {
            name: "kl-trace-bound".into(),
            pass: margin <= 1e-6 * noise.bound(),
            constants: vec![
                ("bound".into(), noise.bound()),
                ("worst_margin".into(), margin),
            ],
            detail: "sum_j |e_j|^2 <= mu(R^2) at every grid point".into(),
        });
    }

    // form symmetry for unit weights
    if unit_gamma {
        let gap = ops.a.symmetry_gap();
        let tol = 1e-12 * ops.a.max_abs();
        items.push(ValidationItem {
            name: "form-symmetry-unit-gamma".into(),
            pass: gap <= tol,
            constants: vec![("gap".into(), gap), ("tolerance".into(), tol)],
            detail: "max |A - A^T| against 1e-12 |A|".into(),
        });
    }

    // interpolation inequality constant across one mesh halving
    {
        let space2 = std::sync::Arc::new(space.refine(2));
        let ops2 = level.assemble_on(&space2, &pair)?;
        let c1 = interp_constant(&ops, 0xBEE5);
        let c2 = interp_constant(&ops2, 0xBEE5);
        let ratio = (c1 / c2).max(c2 / c1);
        items.push(ValidationItem {
            name: "interpolation-inequality".into(),
            pass: ratio <= 1.5,
            constants: vec![
                ("c_emp_h".into(), c1),
                ("c_emp_h_half".into(), c2),
                ("ratio".into(), ratio),
            ],
            detail: "||f||^2_M <= C ||f||_{M_delta} ||f||_S, constant stable under halving".into(),
        });
    }

    // conservation over a short frozen-reaction run (unit weights only)
    if unit_gamma {
        let inst = ProblemInstance {
            ops: ops.clone(),
            noise: noise.clone(),
            drift: ReactionFn::Zero,
            diffusion: ReactionFn::Zero,
            cutoff: Some(level.cutoff),
            u0: setup.u0_field()?,
            t_final: 100.0 * 1e-3,
            dt: 1e-3,
            r: level.graph.r(),
            delta,
        };
        let stream = sample_increments(noise.n_modes(), 0, &uniform_grid(1e-3, 100))?;
        let traj = integrate(&inst, &stream, usize::MAX)?;
        let ones = vec![1.0; ops.dim()];
        let mass = |u: &[f64]| -> f64 {
            ones.iter()
                .zip(ops.m_delta.matvec(u))
                .map(|(a, b)| a * b)
                .sum()
        };
        let m0 = mass(&traj.states[0]);
        let drift = ((mass(traj.last()) - m0) / m0).abs();
        items.push(ValidationItem {
            name: "mass-conservation".into(),
            pass: drift <= 1e-10,
            constants: vec![("relative_drift".into(), drift)],
            detail: "total weighted mass over 100 implicit steps without reaction".into(),
        });
    }

    Ok(ValidationReport { items })
}

/// Empirical constant in the weighted interpolation inequality over random
/// trigonometric trial functions (mesh independent by construction).
fn interp_constant(ops: &gspde_core::fem::AssembledOperators, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = &ops.space;
    let mut c = 0.0_f64;
    for _ in 0..100 {
        let coef: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = vec![0.0; space.dim()];
        for e in space.graph().edges() {
            let len = (e.b - e.a).max(1e-12);
            for j in 0..=space.n_elems(e.id) {
                let z = space.node_z(e.id, j);
                let t = (z - e.a) / len;
                let v: f64 = coef
                    .iter()
                    .enumerate()
                    .map(|(m, a)| a * (m as f64 * std::f64::consts::PI * t).cos())
                    .sum();
                f[space.dof_of_node(e.id, j)] = v;
            }
        }
        let m = ops.norm_m_err(&f).powi(2);
        let md = ops.norm_m_delta(&f);
        let s = ops.norm_energy(&f);
        if md > 0.0 && s > 0.0 {
            c = c.max(m / (md * s));
        }
    }
    c
}
