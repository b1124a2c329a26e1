//! End-to-end pipeline through the public API: Hamiltonian reduction,
//! tabulated coefficients, truncation, regularization, assembly, spectral
//! noise and time integration on the double well.

use std::sync::Arc;

use gspde_core::coeff::{
    check_asp_reg, make_cutoff, regularize, truncate_alpha, validate_weight_compatibility,
    CutOffKind, KappaOptions, WeightFamily,
};
use gspde_core::fem::{assemble, build_space, FemFields};
use gspde_core::graph::{truncate, VertexKind};
use gspde_core::hamiltonian::{double_well, reduce, tabulate_coefficients, TabulateOptions};
use gspde_core::noise::{build_spectral_noise, sample_increments, uniform_grid, SpectralAtom};
use gspde_core::solver::{integrate, weighted_error, ErrorWeight, ProblemInstance, ReactionFn};

#[test]
fn double_well_pipeline_end_to_end() {
    // reduction: two wells merging at the saddle, then the unbounded edge
    let spec = double_well();
    spec.validate().unwrap();
    let red = reduce(&spec).unwrap();
    assert_eq!(red.graph.edges().len(), 3);

    // contour-integral coefficients with asymptotic endpoint classes
    let tab = TabulateOptions {
        samples_per_edge: 32,
        z_max: 5.0,
        ..Default::default()
    };
    let coeff = tabulate_coefficients(&spec, &red, &tab).unwrap();
    coeff.validate(&red.graph).unwrap();

    // weight, compatibility constant
    let gamma =
        gspde_core::coeff::build_weight_base(&red.graph, WeightFamily::PolyDecay { rho3: 3.0 })
            .unwrap();
    let kappa = validate_weight_compatibility(
        &coeff.alpha,
        &coeff.beta,
        &gamma,
        red.graph.edges(),
        &KappaOptions::default(),
    );
    assert!(kappa.pass, "{kappa:?}");

    // truncation and regularization
    let r = 2.5;
    let tg = Arc::new(truncate(&red.graph, r).unwrap());
    assert_eq!(
        tg.vertices()
            .iter()
            .filter(|v| v.kind == VertexKind::TruncationBoundary)
            .count(),
        1
    );
    let eta = make_cutoff(r, CutOffKind::Linear);
    let alpha_r = truncate_alpha(&coeff.alpha, &eta);
    let delta = 0.05;
    let pair = regularize(&alpha_r, &coeff.beta, &tg, delta).unwrap();
    let bounds = check_asp_reg(&pair, &coeff.alpha, &alpha_r, &coeff.beta, &tg, 500);
    assert!(bounds.pass, "{bounds:?}");

    // spectral noise from a symmetric atom pair plus mass at the origin
    let gamma_t =
        gspde_core::coeff::build_weight_truncated(&tg, WeightFamily::PolyDecay { rho3: 3.0 })
            .unwrap();
    let atoms = [
        SpectralAtom {
            xi: (0.8, 0.3),
            weight: 0.4,
        },
        SpectralAtom {
            xi: (-0.8, -0.3),
            weight: 0.4,
        },
        SpectralAtom {
            xi: (0.0, 0.0),
            weight: 0.7,
        },
    ];
    let noise = Arc::new(build_spectral_noise(&spec, &red, &tg, &atoms, &tab).unwrap());
    assert!((noise.bound() - 1.5).abs() < 1e-12);
    assert!(noise.bound_margin(&tg, 200) <= 1e-6 * noise.bound());

    // assembly and two coupled mesh levels
    let coarse = Arc::new(build_space(&tg, 0.05).unwrap());
    let fine = Arc::new(coarse.refine(2));
    let fields = FemFields {
        alpha: &pair.alpha,
        beta_delta: &pair.beta,
        beta: &coeff.beta,
        gamma: &gamma_t,
    };
    let ops_c = assemble(&coarse, &fields).unwrap();
    let ops_f = assemble(&fine, &fields).unwrap();

    let u0 =
        gspde_core::field::ScalarField::uniform(3, gspde_core::field::FnField::new(|z| (-z).exp()));
    let dt = 0.01;
    let t_final = 0.2;
    let make_inst = |ops: Arc<gspde_core::fem::AssembledOperators>| ProblemInstance {
        ops,
        noise: noise.clone(),
        drift: ReactionFn::Linear(-1.0),
        diffusion: ReactionFn::Linear(0.5),
        cutoff: Some(eta),
        u0: u0.clone(),
        t_final,
        dt,
        r: f64::NAN,
        delta: f64::NAN,
    };
    let grid = uniform_grid(dt, (t_final / dt).round() as usize);
    let stream = sample_increments(noise.n_modes(), 99, &grid).unwrap();

    let traj_c = integrate(&make_inst(ops_c), &stream, usize::MAX).unwrap();
    let traj_f = integrate(&make_inst(ops_f.clone()), &stream, usize::MAX).unwrap();
    assert!(traj_f.last().iter().all(|v| v.is_finite()));

    // coupled coarse/fine runs stay close in the error norm
    let e = weighted_error(
        &ops_f,
        traj_f.last(),
        &coarse,
        traj_c.last(),
        ErrorWeight::BetaGamma,
    )
    .unwrap();
    let scale = ops_f.norm_m_err(traj_f.last());
    assert!(
        e < 0.2 * scale,
        "coarse/fine gap {e:.3e} vs scale {scale:.3e}"
    );
}
