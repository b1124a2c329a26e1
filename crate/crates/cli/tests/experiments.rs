//! Library-level experiment runner checks that complement the acceptance
//! suite: the deterministic sub-case of the spatial sweep and the inert
//! regularization case.

use std::path::{Path, PathBuf};

use gspde_cli::config::Config;
use gspde_cli::experiments::{run_delta_sweep, run_fem_rate};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gspde-exp-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

/// Without noise every seed coincides and the sweep against the refined
/// reference recovers the classical second-order rate.
#[test]
fn deterministic_fem_rate_reaches_order_two() {
    let out = scratch("det-fem-rate");
    let graph = out.join("interval.txt");
    write(
        &graph,
        "[vertices]\n0 exterior 0.0\n1 exterior 1.0\n[edges]\n0 0.0 1.0 0 1\n",
    );
    let toml = format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 2
seed_base = 0
t_final = 0.25
dt_rule = "h2"

[graph]
source = "file"
file = "{}"

[coefficients]
source = "constant"
alpha = 1.0
beta = 1.0

[gamma]
family = "unit"

[truncation]
r_list = [1.0]

[regularization]
delta_list = [0.2]

[mesh]
h_list = [0.125, 0.0625, 0.03125]

[noise]
mode = "off"

[dynamics]
b = "zero"
g = "zero"
u0 = "cospi"
"#,
        out.display(),
        graph.display()
    );
    let config = Config::parse(&toml).unwrap();
    let report = run_fem_rate(&config).unwrap();
    let (slope, _) = report.slope.unwrap();
    assert!(slope >= 1.9, "slope {slope:.3}");
    // identical seeds: no Monte Carlo spread
    assert!(report.levels.iter().all(|l| l.stderr == 0.0));
}

/// A cycle of two interior vertices with constant coefficients: no exterior
/// vertex to lift and nothing for the freeze to change, so the
/// regularization is inert and consecutive levels agree to solver tolerance.
#[test]
fn inert_regularization_gives_zero_differences() {
    let out = scratch("inert-delta");
    let graph = out.join("cycle.txt");
    write(
        &graph,
        "[vertices]\n0 interior 0.0\n1 interior 1.0\n\
         [edges]\n0 0.0 1.0 0 1\n1 0.0 1.0 0 1\n\
         [options]\nrelax_degree = true\n",
    );
    let toml = format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 4
seed_base = 10
t_final = 0.1
dt_rule = "fixed:0.01"

[graph]
source = "file"
file = "{}"

[coefficients]
source = "constant"
alpha = 1.0
beta = 1.0

[gamma]
family = "unit"

[truncation]
r_list = [1.0]

[regularization]
delta_list = [0.125, 0.0625, 0.03125]

[mesh]
h_list = [0.0625]

[noise]
mode = "direct"
modes = ["one"]
bound = 1.0

[dynamics]
b = "linear:-1"
g = "linear:0.5"
u0 = "one"
"#,
        out.display(),
        graph.display()
    );
    let config = Config::parse(&toml).unwrap();
    let report = run_delta_sweep(&config).unwrap();
    assert!(report.pass);
    for l in &report.levels {
        assert!(
            l.error <= 1e-12,
            "difference {} at delta {}",
            l.error,
            l.param
        );
    }
}

/// A weight decaying slower than quadratically makes the truncation bound
/// proxy non-decreasing, which the sweep rejects up front.
#[test]
fn too_fat_weight_is_rejected() {
    let out = scratch("gamma-fat");
    let toml = format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 2
seed_base = 0
t_final = 0.1
dt_rule = "fixed:0.05"

[graph]
source = "hamiltonian"
hamiltonian = "harmonic"

[coefficients]
source = "analytic"
profile = "harmonic"

[gamma]
family = "poly"
rho3 = 1.5

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
b = "zero"
g = "linear:0.5"
u0 = "one"
"#,
        out.display()
    );
    let config = Config::parse(&toml).unwrap();
    match gspde_cli::experiments::run_truncation_sweep(&config) {
        Err(gspde_cli::CliError::GammaTooFat(_)) => {}
        other => panic!("expected GammaTooFat, got {other:?}"),
    }
}
