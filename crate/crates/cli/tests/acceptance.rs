//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantities. Criteria are serialized through a global
//! lock so the per-criterion runtime budgets are measured on a quiet
//! process.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use gspde_cli::config::Config;
use gspde_cli::experiments::{
    fit_rate, run_delta_sweep, run_fem_rate, run_truncation_sweep, run_validation_suite,
};
use gspde_core::coeff::CoefficientField;
use gspde_core::fem::{assemble, quad, FemFields, FemSpace};
use gspde_core::field::{FnField, ScalarField};
use gspde_core::graph::{build_graph, EdgeId, GraphSpec, TruncatedGraph, VertexKind};
use gspde_core::hamiltonian::{
    contour_integrals, double_well, harmonic, trace_closed, LevelComponent, TraceOptions,
};
use gspde_core::noise::{build_direct_noise, sample_increments, uniform_grid};
use gspde_core::solver::{integrate, ProblemInstance, ReactionFn};

fn lock() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gspde-acceptance-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn budget(name: &str, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < limit_s,
        "{name}: runtime {elapsed:.1}s exceeds the {limit_s}s budget"
    );
}

/// Criterion 1: contour integration on the quadratic Hamiltonian reproduces
/// alpha(z) = 4 pi z and beta(z) = 2 pi to relative 1e-6 on z in [0.1, 5].
#[test]
fn acceptance_1_coefficient_oracle() {
    let _g = lock();
    let start = Instant::now();
    let spec = harmonic();
    let opts = TraceOptions::default();
    let mut worst = 0.0_f64;
    for i in 0..25 {
        let z = 0.1 + (5.0 - 0.1) * i as f64 / 24.0;
        let p0 = ((2.0 * z).sqrt(), 0.0);
        let points = trace_closed(&spec, p0, z, &opts).unwrap();
        let ints = contour_integrals(
            &spec,
            &LevelComponent {
                z,
                edge: None,
                points,
            },
            &opts,
        )
        .unwrap();
        let rel_a = (ints.alpha - 4.0 * PI * z).abs() / (4.0 * PI * z);
        let rel_b = (ints.beta - 2.0 * PI).abs() / (2.0 * PI);
        worst = worst.max(rel_a).max(rel_b);
    }
    assert!(worst <= 1e-6, "worst relative error {worst:.3e}");
    budget("criterion 1", start, 10.0);
    println!(
        "ACCEPTANCE 1 (coefficient oracle): PASS — worst rel err {worst:.2e} in {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 2: on the double well, beta grows like |log(z_s - z)| towards
/// the saddle: linear regression against the log distance has R^2 >= 0.98.
#[test]
fn acceptance_2_saddle_log_blowup() {
    let _g = lock();
    let start = Instant::now();
    let spec = double_well();
    let opts = TraceOptions::default();
    let z_s = 1.0;
    let n = 20;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        // log-spaced distances in [1e-3, 1e-1], inside the right well
        let dz = 10.0_f64.powf(-3.0 + 2.0 * i as f64 / (n - 1) as f64);
        let z = z_s - dz;
        let points = trace_closed(&spec, (1.2, 0.0), z, &opts).unwrap();
        let ints = contour_integrals(
            &spec,
            &LevelComponent {
                z,
                edge: None,
                points,
            },
            &opts,
        )
        .unwrap();
        xs.push(dz.ln().abs());
        ys.push(ints.beta);
    }
    let nf = n as f64;
    let xb = xs.iter().sum::<f64>() / nf;
    let yb = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xb) * (y - yb)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xb) * (x - xb)).sum();
    let syy: f64 = ys.iter().map(|y| (y - yb) * (y - yb)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    assert!(r2 >= 0.98, "R^2 = {r2:.4}");
    budget("criterion 2", start, 30.0);
    println!(
        "ACCEPTANCE 2 (saddle log blow-up): PASS — R^2 = {r2:.4}, slope {:.3} in {:.2}s",
        sxy / sxx,
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 3: with unit weight and no reaction, the total weighted mass
/// is conserved to 1e-10 relative over a thousand implicit steps on a
/// triple-well-shaped truncated graph.
#[test]
fn acceptance_3_conservation() {
    let _g = lock();
    let start = Instant::now();
    // three wells, two saddles, unbounded edge: the shape of Fig-1
    let mut s = GraphSpec::default();
    let m1 = s.vertex(VertexKind::Exterior, 0.0);
    let m2 = s.vertex(VertexKind::Exterior, 0.1);
    let m3 = s.vertex(VertexKind::Exterior, 0.2);
    let s1 = s.vertex(VertexKind::Interior, 1.0);
    let s2 = s.vertex(VertexKind::Interior, 2.0);
    let oi = s.vertex(VertexKind::Infinity, f64::INFINITY);
    s.edge(0.0, 1.0, m1, s1);
    s.edge(0.1, 1.0, m2, s1);
    s.edge(1.0, 2.0, s1, s2);
    s.edge(0.2, 2.0, m3, s2);
    s.edge(2.0, f64::INFINITY, s2, oi);
    let graph = build_graph(&s).unwrap();
    let profile = gspde_core::coeff::double_well_like_profile(&graph).unwrap();
    let coeff = gspde_core::coeff::analytic_coefficients(&graph, &profile).unwrap();

    let r = 4.0;
    let tg = Arc::new(gspde_core::graph::truncate(&graph, r).unwrap());
    let eta = gspde_core::coeff::make_cutoff(r, gspde_core::coeff::CutOffKind::Linear);
    let alpha_r = gspde_core::coeff::truncate_alpha(&coeff.alpha, &eta);
    let pair = gspde_core::coeff::regularize(&alpha_r, &coeff.beta, &tg, 0.05).unwrap();
    let gamma = ScalarField::constant(graph.edges().len(), 1.0);
    let space = Arc::new(gspde_core::fem::build_space(&tg, 1.0 / 16.0).unwrap());
    let ops = assemble(
        &space,
        &FemFields {
            alpha: &pair.alpha,
            beta_delta: &pair.beta,
            beta: &coeff.beta,
            gamma: &gamma,
        },
    )
    .unwrap();
    let noise = Arc::new(
        build_direct_noise(
            &tg,
            vec![ScalarField::constant(graph.edges().len(), 1.0)],
            1.0,
        )
        .unwrap(),
    );
    let inst = ProblemInstance {
        ops: ops.clone(),
        noise,
        drift: ReactionFn::Zero,
        diffusion: ReactionFn::Zero,
        cutoff: Some(eta),
        u0: ScalarField::uniform(graph.edges().len(), FnField::new(|z| 1.0 + (1.3 * z).sin())),
        t_final: 1.0,
        dt: 1e-3,
        r,
        delta: 0.05,
    };
    let stream = sample_increments(1, 7, &uniform_grid(1e-3, 1000)).unwrap();
    let traj = integrate(&inst, &stream, 100).unwrap();
    let ones = vec![1.0; ops.dim()];
    let mass = |u: &[f64]| -> f64 {
        ones.iter()
            .zip(ops.m_delta.matvec(u))
            .map(|(a, b)| a * b)
            .sum()
    };
    let m0 = mass(&traj.states[0]);
    let mut drift = 0.0_f64;
    for st in &traj.states {
        drift = drift.max(((mass(st) - m0) / m0).abs());
    }
    assert!(drift <= 1e-10, "relative mass drift {drift:.3e}");
    println!(
        "ACCEPTANCE 3 (conservation): PASS — relative drift {drift:.2e} over 1000 steps in {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 4: the deterministic heat sub-case converges at second order
/// in h against the separation-of-variables solution, and the finest level
/// is within 1e-4 of it.
#[test]
fn acceptance_4_deterministic_fem_rate() {
    let _g = lock();
    let start = Instant::now();
    let mut s = GraphSpec::default();
    let v0 = s.vertex(VertexKind::Exterior, 0.0);
    let v1 = s.vertex(VertexKind::Exterior, 1.0);
    s.edge(0.0, 1.0, v0, v1);
    s.relax_degree = true;
    let tg = Arc::new(TruncatedGraph::from_compact(&build_graph(&s).unwrap()).unwrap());
    let coeff = CoefficientField::constant(1, 1.0, 1.0);
    let gamma = ScalarField::constant(1, 1.0);
    let noise =
        Arc::new(build_direct_noise(&tg, vec![ScalarField::constant(1, 1.0)], 1.0).unwrap());
    let t_final = 0.5;
    let u0 = ScalarField::uniform(
        1,
        FnField::with_deriv(|z| (PI * z).cos(), |z| -PI * (PI * z).sin()),
    );

    let mut levels = Vec::new();
    for k in [16usize, 32, 64, 128] {
        let space = Arc::new(FemSpace::from_elements(tg.clone(), vec![k]));
        let ops = assemble(
            &space,
            &FemFields {
                alpha: &coeff.alpha,
                beta_delta: &coeff.beta,
                beta: &coeff.beta,
                gamma: &gamma,
            },
        )
        .unwrap();
        let h = 1.0 / k as f64;
        let dt = h * h;
        let inst = ProblemInstance {
            ops,
            noise: noise.clone(),
            drift: ReactionFn::Zero,
            diffusion: ReactionFn::Zero,
            cutoff: None,
            u0: u0.clone(),
            t_final,
            dt,
            r: f64::NAN,
            delta: f64::NAN,
        };
        let n_steps = (t_final / dt).round() as usize;
        let stream = sample_increments(1, 0, &uniform_grid(dt, n_steps)).unwrap();
        let traj = integrate(&inst, &stream, usize::MAX).unwrap();
        let decay = (-PI * PI * t_final / 2.0).exp();
        let err2: f64 = (0..k)
            .map(|el| {
                let z0 = el as f64 * h;
                let z1 = (el + 1) as f64 * h;
                quad::integrate(8, z0, z1, |z| {
                    let d = space.eval(traj.last(), EdgeId(0), z) - decay * (PI * z).cos();
                    d * d
                })
            })
            .sum();
        levels.push((h, err2.sqrt(), 0.0));
    }
    let (slope, se) = fit_rate(&levels).unwrap();
    let finest = levels.last().unwrap().1;
    assert!(
        (1.9..=2.1).contains(&slope),
        "slope {slope:.3} +- {se:.3}, levels {levels:?}"
    );
    assert!(finest <= 1e-4, "finest-level error {finest:.3e}");
    budget("criterion 4", start, 60.0);
    println!(
        "ACCEPTANCE 4 (deterministic FEM rate): PASS — slope {slope:.3}, finest err {finest:.2e} in {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 5: stochastic convergence under trace-class atomic noise with
/// 64 bridge-coupled seeds: fitted RMS slope at least 0.4 with standard
/// error at most 0.1.
#[test]
fn acceptance_5_stochastic_fem_rate() {
    let _g = lock();
    let start = Instant::now();
    let out = scratch_dir("fem-rate");
    let toml = format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 64
seed_base = 1000
t_final = 0.5
dt_rule = "h"

[graph]
source = "hamiltonian"
hamiltonian = "harmonic"

[coefficients]
source = "analytic"
profile = "harmonic"

[gamma]
family = "poly"
rho3 = 3.0

[truncation]
r_list = [2.0]

[regularization]
delta_list = [0.125]

[mesh]
h_list = [0.125, 0.0625, 0.03125, 0.015625]

[noise]
mode = "spectral"
atoms = [ {{ xi = [1.0, 0.0], w = 0.5 }}, {{ xi = [-1.0, 0.0], w = 0.5 }}, {{ xi = [0.0, 0.0], w = 1.0 }} ]

[dynamics]
b = "linear:-1"
g = "linear:0.5"
u0 = "one"
"#,
        out.display()
    );
    let config = Config::parse(&toml).unwrap();
    let report = run_fem_rate(&config).unwrap();
    let (slope, se) = report.slope.unwrap();
    assert!(slope >= 0.4, "slope {slope:.3}");
    assert!(se <= 0.1, "slope stderr {se:.3}");
    assert!(report.levels.iter().all(|l| l.n_seeds == 64));
    budget("criterion 5", start, 900.0);
    println!(
        "ACCEPTANCE 5 (stochastic FEM rate): PASS — slope {slope:.3} +- {se:.3} in {:.1}s",
        start.elapsed().as_secs_f64()
    );
}

fn double_well_graph_file(dir: &std::path::Path) -> PathBuf {
    let path = dir.join("dw.txt");
    std::fs::write(
        &path,
        "[vertices]\n0 exterior 0.0\n1 exterior 0.0\n2 interior 1.0\n3 infinity inf\n\
         [edges]\n0 0.0 1.0 0 2\n1 0.0 1.0 1 2\n2 1.0 inf 2 3\n",
    )
    .unwrap();
    path
}

fn delta_sweep_toml(out: &std::path::Path, graph_file: &std::path::Path) -> String {
    format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 32
seed_base = 500
t_final = 0.25
dt_rule = "fixed:0.0078125"

[graph]
source = "file"
file = "{}"

[coefficients]
source = "analytic"
profile = "double-well-like"

[gamma]
family = "unit"

[truncation]
r_list = [2.0]

[regularization]
delta_list = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125]

[mesh]
h_list = [0.0078125]

[noise]
mode = "direct"
modes = ["one", "cos:1.0"]
bound = 0.0

[dynamics]
b = "linear:-1"
g = "linear:0.5"
u0 = "one"
"#,
        out.display(),
        graph_file.display()
    )
}

/// Criterion 6: the regularization sweep on a graph with a saddle vertex
/// produces Cauchy differences that do not increase (within the 95% band)
/// and drop by at least a factor four across delta in {2^-3 .. 2^-7}.
#[test]
fn acceptance_6_delta_sweep() {
    let _g = lock();
    let start = Instant::now();
    let out = scratch_dir("delta-sweep");
    let graph_file = double_well_graph_file(&out);
    let config = Config::parse(&delta_sweep_toml(&out, &graph_file)).unwrap();
    let report = run_delta_sweep(&config).unwrap();
    assert!(report.pass, "notes: {:?}", report.notes);
    let first = report.levels.first().unwrap().error;
    let last = report.levels.last().unwrap().error;
    assert!(last <= 0.25 * first, "last/first = {:.3}", last / first);
    budget("criterion 6", start, 600.0);
    println!(
        "ACCEPTANCE 6 (delta sweep): PASS — differences {:.2e} -> {:.2e} (ratio {:.3}) in {:.1}s",
        first,
        last,
        last / first,
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 7: the truncation sweep with cubically decaying weight against
/// R_ref = 64: errors strictly decrease and error^2 / B(R) stays within a
/// factor-ten band.
#[test]
fn acceptance_7_truncation_sweep() {
    let _g = lock();
    let start = Instant::now();
    let out = scratch_dir("trunc-sweep");
    let toml = format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 64
seed_base = 4000
t_final = 0.5
dt_rule = "fixed:0.03125"

[graph]
source = "hamiltonian"
hamiltonian = "harmonic"

[coefficients]
source = "analytic"
profile = "harmonic"

[gamma]
family = "poly"
rho3 = 3.0

[truncation]
r_list = [4.0, 8.0, 16.0, 32.0]
r_ref = 64.0

[regularization]
delta_list = [0.125]

[mesh]
h_list = [0.25]

[noise]
mode = "direct"
modes = ["one"]
bound = 1.0

[dynamics]
b = "linear:-1"
g = "linear:0.5"
u0 = "one"
"#,
        out.display()
    );
    let config = Config::parse(&toml).unwrap();
    let report = run_truncation_sweep(&config).unwrap();
    assert!(report.pass, "notes: {:?}", report.notes);
    for w in report.levels.windows(2) {
        assert!(w[1].error < w[0].error, "errors must strictly decrease");
    }
    let band = report
        .constants
        .iter()
        .find(|(k, _)| k == "band_ratio")
        .map(|(_, v)| *v)
        .unwrap();
    assert!(band <= 10.0, "band ratio {band:.3}");
    budget("criterion 7", start, 600.0);
    println!(
        "ACCEPTANCE 7 (truncation sweep): PASS — errors {:.2e} -> {:.2e}, band {band:.2} in {:.1}s",
        report.levels.first().unwrap().error,
        report.levels.last().unwrap().error,
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 8: the invariant suite — coercivity over a thousand random
/// vectors, the KL trace bound on the grid, form symmetry under unit
/// weights, and mesh-stability of the interpolation-inequality constant.
#[test]
fn acceptance_8_invariant_suite() {
    let _g = lock();
    let start = Instant::now();
    let out = scratch_dir("validate");
    let graph_file = double_well_graph_file(&out);
    let config = Config::parse(&delta_sweep_toml(&out, &graph_file)).unwrap();
    let report = run_validation_suite(&config).unwrap();
    for required in [
        "coercivity",
        "kl-trace-bound",
        "form-symmetry-unit-gamma",
        "interpolation-inequality",
    ] {
        let item = report
            .items
            .iter()
            .find(|i| i.name == required)
            .unwrap_or_else(|| panic!("missing validation item {required}"));
        assert!(item.pass, "{required}: {:?}", item.constants);
    }
    assert!(report.all_pass(), "{:?}", report.to_json());
    budget("criterion 8", start, 60.0);
    println!(
        "ACCEPTANCE 8 (invariant suite): PASS — {} checks in {:.2}s",
        report.items.len(),
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 9: reruns with a fixed configuration and seed list produce
/// byte-identical CSV output.
#[test]
fn acceptance_9_determinism() {
    let _g = lock();
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_gspde");
    let base = scratch_dir("determinism");
    let graph_file = double_well_graph_file(&base);

    let mut csv_pairs = Vec::new();
    for (cmd, toml_for) in [("delta-sweep", true), ("trunc-sweep", false)] {
        let mut outputs = Vec::new();
        for rerun in 0..2 {
            let out = base.join(format!("{cmd}-{rerun}"));
            std::fs::create_dir_all(&out).unwrap();
            let toml = if toml_for {
                delta_sweep_toml(&out, &graph_file).replace("seeds = 32", "seeds = 8")
            } else {
                format!(
                    r#"
[experiment]
out_dir = "{}"
seeds = 8
seed_base = 4000
t_final = 0.25
dt_rule = "fixed:0.0625"

[graph]
source = "hamiltonian"
hamiltonian = "harmonic"

[coefficients]
source = "analytic"
profile = "harmonic"

[gamma]
family = "poly"
rho3 = 3.0

[truncation]
r_list = [4.0, 8.0, 16.0]
r_ref = 32.0

[regularization]
delta_list = [0.125]

[mesh]
h_list = [0.25]

[noise]
mode = "direct"
modes = ["one"]
bound = 1.0

[dynamics]
b = "linear:-1"
g = "linear:0.5"
u0 = "one"
"#,
                    out.display()
                )
            };
            let cfg_path = out.join("config.toml");
            std::fs::write(&cfg_path, toml).unwrap();
            let status = std::process::Command::new(bin)
                .arg(&cfg_path)
                .arg(cmd)
                .status()
                .unwrap();
            assert!(status.success(), "{cmd} run {rerun} failed");
            outputs.push(out);
        }
        for file in [format!("{cmd}.csv"), format!("{cmd}_summary.csv")] {
            let a = std::fs::read(outputs[0].join(&file)).unwrap();
            let b = std::fs::read(outputs[1].join(&file)).unwrap();
            assert_eq!(a, b, "{file} differs between reruns");
            csv_pairs.push(file);
        }
    }
    println!(
        "ACCEPTANCE 9 (determinism): PASS — byte-identical {csv_pairs:?} in {:.1}s",
        start.elapsed().as_secs_f64()
    );
}
