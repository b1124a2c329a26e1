use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::fem::quad::adaptive_simpson;
use crate::fem::tests_support::unit_ops;
use crate::field::{FnField, ScalarField};
use crate::graph::tests_support::unit_interval;
use crate::graph::{EdgeId, TruncatedGraph};
use crate::hamiltonian::{harmonic, reduce, TabulateOptions};

fn unit_graph() -> TruncatedGraph {
    TruncatedGraph::from_compact(&unit_interval()).unwrap()
}

#[test]
fn direct_constant_mode_is_accepted() {
    let g = unit_graph();
    let model = build_direct_noise(&g, vec![ScalarField::constant(1, 1.0)], 1.0).unwrap();
    assert_eq!(model.n_modes(), 1);
    assert!(model.bound_margin(&g, 64) <= 1e-9);
}

#[test]
fn declared_bound_is_enforced() {
    let g = unit_graph();
    let too_big = ScalarField::constant(1, 2.0);
    assert!(matches!(
        build_direct_noise(&g, vec![too_big], 1.0),
        Err(crate::Error::BoundViolated { .. })
    ));
}

#[test]
fn cosine_basis_with_sampled_bound() {
    let g = unit_graph();
    let basis: Vec<ScalarField> = (1..=8)
        .map(|m| {
            let m = m as f64;
            ScalarField::uniform(
                1,
                FnField::with_deriv(
                    move |z| (m * PI * z).cos(),
                    move |z| -m * PI * (m * PI * z).sin(),
                ),
            )
        })
        .collect();
    // sampled sup of the squared sum is 8 (all cosines hit 1 at z = 0)
    let model = build_direct_noise(&g, basis, 8.0).unwrap();
    assert_eq!(model.n_modes(), 8);
}

#[test]
fn asymmetric_atoms_are_rejected() {
    let spec = harmonic();
    let red = reduce(&spec).unwrap();
    let tg = crate::graph::truncate(&red.graph, 2.0).unwrap();
    let atoms = [SpectralAtom {
        xi: (1.0, 0.0),
        weight: 0.5,
    }];
    let tab = TabulateOptions {
        samples_per_edge: 16,
        z_max: 4.0,
        ..Default::default()
    };
    assert!(matches!(
        build_spectral_noise(&spec, &red, &tg, &atoms, &tab),
        Err(crate::Error::AsymmetricAtoms)
    ));
}

#[test]
fn origin_atom_gives_constant_mode() {
    let spec = harmonic();
    let red = reduce(&spec).unwrap();
    let tg = crate::graph::truncate(&red.graph, 2.0).unwrap();
    let atoms = [SpectralAtom {
        xi: (0.0, 0.0),
        weight: 1.0,
    }];
    let tab = TabulateOptions {
        samples_per_edge: 16,
        z_max: 4.0,
        ..Default::default()
    };
    let model = build_spectral_noise(&spec, &red, &tg, &atoms, &tab).unwrap();
    assert_eq!(model.n_modes(), 1);
    for z in [0.0, 0.7, 2.9] {
        assert!((model.basis()[0].eval(EdgeId(0), z) - 1.0).abs() < 1e-12);
    }
}

/// Atom pair at +-(1, 0) on the harmonic Hamiltonian: the cos mode is the
/// contour average of cos(x1) over the circle of radius sqrt(2 z), matched
/// against direct quadrature; the sin mode vanishes by symmetry; the
/// pointwise trace bound holds with total mass 1.
#[test]
fn harmonic_atom_pair_projection() {
    let spec = harmonic();
    let red = reduce(&spec).unwrap();
    let tg = crate::graph::truncate(&red.graph, 4.0).unwrap();
    let atoms = [
        SpectralAtom {
            xi: (1.0, 0.0),
            weight: 0.5,
        },
        SpectralAtom {
            xi: (-1.0, 0.0),
            weight: 0.5,
        },
    ];
    let tab = TabulateOptions {
        samples_per_edge: 64,
        z_max: 6.0,
        ..Default::default()
    };
    let model = build_spectral_noise(&spec, &red, &tg, &atoms, &tab).unwrap();
    assert_eq!(model.n_modes(), 2);
    assert!((model.bound() - 1.0).abs() < 1e-14);

    let k = EdgeId(0);
    for z in [0.5_f64, 1.0, 2.5, 4.5] {
        let r = (2.0 * z).sqrt();
        // sqrt(2w) = 1 here, so the mode is exactly the average of cos(x1)
        let oracle =
            adaptive_simpson(&|t: f64| (r * t.cos()).cos(), 0.0, 2.0 * PI, 1e-12) / (2.0 * PI);
        let got = model.basis()[0].eval(k, z);
        assert!((got - oracle).abs() < 1e-6, "z = {z}: {got} vs {oracle}");
        assert!(
            model.basis()[1].eval(k, z).abs() < 1e-8,
            "sin mode at z = {z}"
        );
    }
    assert!(model.bound_margin(&tg, 256) <= 1e-6);
}

#[test]
fn apply_diffusion_special_cases() {
    let (space, ops) = unit_ops(8);
    let g = space.graph();
    let model = build_direct_noise(g, vec![ScalarField::constant(1, 1.0)], 1.0).unwrap();
    let u = vec![1.0; ops.dim()];

    // g = 0 kills the load
    let out = apply_diffusion(&ops, &model, &u, &|_| 0.0, &[0.3], None).unwrap();
    assert!(out.iter().all(|v| v.abs() < 1e-14));

    // g = 1, e = 1, eta = 1: the projection of a constant increment
    let out = apply_diffusion(&ops, &model, &u, &|_| 1.0, &[0.3], None).unwrap();
    assert!(out.iter().all(|v| (v - 0.3).abs() < 1e-11), "{out:?}");

    // g(u) = u with u = 1: same thing through the nonlinearity
    let out = apply_diffusion(&ops, &model, &u, &|v| v, &[0.3], None).unwrap();
    assert!(out.iter().all(|v| (v - 0.3).abs() < 1e-11));
}

/// Direct quadrature oracle for a genuinely varying mode,
/// `P_h` computed by hand: rhs_i = dW int e(z) phi_i dz, then mass solve.
#[test]
fn apply_diffusion_matches_quadrature_oracle() {
    let (space, ops) = unit_ops(6);
    let g = space.graph();
    let mode = ScalarField::uniform(1, FnField::new(|z| 1.0 + 0.5 * (2.0 * PI * z).sin()));
    let model = build_direct_noise(g, vec![mode.clone()], 2.26).unwrap();
    let u = vec![1.0; ops.dim()];
    let dw = [0.7];
    let out = apply_diffusion(&ops, &model, &u, &|v| v, &dw, None).unwrap();

    // oracle: assemble the load by adaptive quadrature
    let mut rhs = vec![0.0; ops.dim()];
    let h = 1.0 / 6.0;
    for (i, r) in rhs.iter_mut().enumerate() {
        // dof -> hat center: interior dofs at (i+1) h, vertices at 0 and 1
        let center = if i < 5 {
            (i + 1) as f64 * h
        } else if i == 5 {
            0.0
        } else {
            1.0
        };
        let hat = move |z: f64| (1.0 - (z - center).abs() / h).max(0.0);
        *r = dw[0]
            * adaptive_simpson(
                &|z| hat(z) * mode.eval(EdgeId(0), z),
                (center - h).max(0.0),
                (center + h).min(1.0),
                1e-13,
            );
    }
    let oracle = crate::fem::l2_project(&ops, &rhs).unwrap();
    for (a, b) in out.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

/// Ito isometry shadow: the mean squared norm of the projected noise term
/// over many draws matches dt * sum_j ||P_h(g(u) e_j)||^2 within 5 relative
/// standard errors.
#[test]
fn ito_isometry_over_draws() {
    let (space, ops) = unit_ops(8);
    let g = space.graph();
    let basis = vec![
        ScalarField::constant(1, 1.0),
        ScalarField::uniform(1, FnField::new(|z| (PI * z).cos())),
        ScalarField::uniform(1, FnField::new(|z| z - 0.5)),
    ];
    let model = build_direct_noise(g, basis, 3.0).unwrap();
    let u: Vec<f64> = (0..ops.dim()).map(|i| 0.3 + 0.1 * i as f64).collect();
    let g_fn = |v: f64| v.tanh();
    let dt = 0.02_f64;

    // expected value: dt * sum_j ||P_h(g(u) e_j)||_{M_delta}^2
    let mut expected = 0.0;
    for j in 0..3 {
        let mut unit = vec![0.0; 3];
        unit[j] = 1.0;
        let pj = apply_diffusion(&ops, &model, &u, &g_fn, &unit, None).unwrap();
        expected += dt * ops.norm_m_delta(&pj).powi(2);
    }

    let n_draws = 10_000;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for seed in 0..n_draws {
        let stream = sample_increments(3, seed, &[0.0, dt]).unwrap();
        let d = apply_diffusion(&ops, &model, &u, &g_fn, stream.step(0), None).unwrap();
        let v = ops.norm_m_delta(&d).powi(2);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n_draws as f64;
    let var = sumsq / n_draws as f64 - mean * mean;
    let stderr = (var / n_draws as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 5.0 * stderr,
        "mean {mean}, expected {expected}, stderr {stderr}"
    );
}

#[test]
fn vertex_discontinuous_basis_is_rejected() {
    use crate::graph::{build_graph, GraphSpec, VertexKind};
    let mut s = GraphSpec::default();
    let c = s.vertex(VertexKind::Interior, 1.0);
    let a = s.vertex(VertexKind::Exterior, 0.0);
    let b = s.vertex(VertexKind::Exterior, 0.0);
    s.edge(0.0, 1.0, a, c);
    s.edge(0.0, 1.0, b, c);
    s.relax_degree = true;
    let g = TruncatedGraph::from_compact(&build_graph(&s).unwrap()).unwrap();
    let jumpy = ScalarField::new(vec![
        Arc::new(FnField::constant(1.0)) as Arc<dyn crate::field::Field1D>,
        Arc::new(FnField::constant(2.0)) as Arc<dyn crate::field::Field1D>,
    ]);
    assert!(matches!(
        build_direct_noise(&g, vec![jumpy], 4.0),
        Err(crate::Error::DiscontinuousAtVertex(_, _))
    ));
}
