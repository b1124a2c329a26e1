//! End-to-end checks of the binary: exit codes, file outputs, config
//! rejection.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gspde")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gspde-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn base_config(out: &Path) -> String {
    format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 4
seed_base = 1
t_final = 0.1
dt_rule = "fixed:0.01"

[graph]
source = "hamiltonian"
hamiltonian = "triple-well"

[coefficients]
source = "tabulated"
samples_per_edge = 24
z_max = 6.0

[gamma]
family = "unit"

[truncation]
r_list = [2.0]

[regularization]
delta_list = [0.01]

[mesh]
h_list = [0.05]

[noise]
mode = "direct"
modes = ["one"]
bound = 1.0

[dynamics]
b = "zero"
g = "linear:0.3"
u0 = "one"
"#,
        out.display()
    )
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn build_graph_output_parses_back() {
    let out = scratch("build-graph");
    let cfg = write_config(&out, &base_config(&out));
    let status = Command::new(bin())
        .arg(&cfg)
        .arg("build-graph")
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("graph.txt")).unwrap();
    let g = gspde_core::graph::parse_graph_file(&text).unwrap();
    // triple well: 3 minima + 2 saddles + infinity, tree with 5 edges
    assert_eq!(g.vertices().len(), 6);
    assert_eq!(g.edges().len(), 5);
    assert!(g.unbounded_edge().is_some());
}

#[test]
fn validate_subcommand_passes_and_writes_json() {
    let out = scratch("validate");
    let cfg = write_config(&out, &base_config(&out));
    let status = Command::new(bin())
        .arg(&cfg)
        .arg("validate")
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("validation.json")).unwrap())
            .unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(true));
    assert!(json["items"].as_array().unwrap().len() >= 6);
}

#[test]
fn run_subcommand_dumps_trajectory() {
    let out = scratch("run");
    let cfg = write_config(&out, &base_config(&out));
    let status = Command::new(bin()).arg(&cfg).arg("run").status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("t,dof_0,dof_1"));
    let n_dofs = header.split(',').count() - 1;

    let status = Command::new(bin())
        .arg(&cfg)
        .arg("run")
        .arg("--binary")
        .status()
        .unwrap();
    assert!(status.success());
    let bytes = std::fs::read(out.join("trajectory.bin")).unwrap();
    let n_states = text.lines().count() - 1;
    assert_eq!(bytes.len(), n_states * (n_dofs + 1) * 8);
}

#[test]
fn dump_matrices_writes_matrix_market() {
    let out = scratch("dump");
    let cfg = write_config(&out, &base_config(&out));
    let status = Command::new(bin())
        .arg(&cfg)
        .arg("dump-matrices")
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["m_delta", "m_err", "a", "s"] {
        let text = std::fs::read_to_string(out.join(format!("{name}.mtx"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "%%MatrixMarket matrix coordinate real general"
        );
        let dims: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(dims.len(), 3);
        assert_eq!(text.lines().count(), 2 + dims[2]);
    }
    // basis table with columns z,k,e_1..e_J (one direct mode configured)
    let basis = std::fs::read_to_string(out.join("noise_basis.csv")).unwrap();
    assert_eq!(basis.lines().next().unwrap(), "z,k,e_1");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let out = scratch("badkey");
    let cfg = write_config(&out, &format!("{}\nnot_a_section = 3\n", base_config(&out)));
    let output = Command::new(bin())
        .arg(&cfg)
        .arg("validate")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("error"));
}

#[test]
fn non_nested_mesh_list_is_rejected() {
    let out = scratch("badmesh");
    let text = base_config(&out).replace("h_list = [0.05]", "h_list = [0.05, 0.03]");
    let cfg = write_config(&out, &text);
    let output = Command::new(bin())
        .arg(&cfg)
        .arg("fem-rate")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("powers of two"));
}

#[test]
fn oversized_delta_is_rejected() {
    let out = scratch("baddelta");
    let text = base_config(&out).replace("delta_list = [0.01]", "delta_list = [0.4, 0.02]");
    let cfg = write_config(&out, &text);
    let output = Command::new(bin())
        .arg(&cfg)
        .arg("delta-sweep")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("delta"));
}

#[test]
fn single_level_fem_rate_is_rejected() {
    let out = scratch("onelevel");
    let cfg = write_config(&out, &base_config(&out));
    let output = Command::new(bin())
        .arg(&cfg)
        .arg("fem-rate")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("levels"));
}

#[test]
fn seed_override_changes_output() {
    let out = scratch("seed-override");
    let graph = out.join("dw.txt");
    std::fs::write(
        &graph,
        "[vertices]\n0 exterior 0.0\n1 exterior 0.0\n2 interior 1.0\n3 infinity inf\n\
         [edges]\n0 0.0 1.0 0 2\n1 0.0 1.0 1 2\n2 1.0 inf 2 3\n",
    )
    .unwrap();
    let text = base_config(&out)
        .replace("source = \"hamiltonian\"", "source = \"file\"")
        .replace(
            "hamiltonian = \"triple-well\"",
            &format!("file = \"{}\"", graph.display()),
        )
        .replace(
            "source = \"tabulated\"",
            "source = \"analytic\"\nprofile = \"double-well-like\"",
        );
    let cfg = write_config(&out, &text);
    let run = |seed: &str, dest: &str| -> Vec<u8> {
        let dest_dir = out.join(dest);
        let status = Command::new(bin())
            .arg(&cfg)
            .arg("--seed")
            .arg(seed)
            .arg("--out")
            .arg(&dest_dir)
            .arg("run")
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dest_dir.join("trajectory.csv")).unwrap()
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let c = run("2", "c");
    assert_eq!(a, b, "same seed must reproduce");
    assert_ne!(a, c, "different seed must differ");
}

#[test]
fn csv_coefficients_and_table_weight_validate() {
    let out = scratch("csv-coeff");
    let graph = out.join("halfline.txt");
    std::fs::write(
        &graph,
        "[vertices]\n0 exterior 0.0\n1 infinity inf\n[edges]\n0 0.0 inf 0 1\n",
    )
    .unwrap();
    // harmonic coefficients sampled on a grid
    let mut coeff = String::from("z,alpha,beta\n");
    for i in 1..=60 {
        let z = 0.1 * i as f64;
        coeff.push_str(&format!(
            "{z},{},{}\n",
            4.0 * std::f64::consts::PI * z,
            2.0 * std::f64::consts::PI
        ));
    }
    let coeff_path = out.join("coeff.csv");
    std::fs::write(&coeff_path, coeff).unwrap();
    // cubically decaying weight table
    let mut gamma = String::from("z,gamma\n");
    for i in 0..=60 {
        let z = 0.05 + 0.1 * i as f64;
        gamma.push_str(&format!("{z},{}\n", (z + 1.0).powi(-3)));
    }
    let gamma_path = out.join("gamma.csv");
    std::fs::write(&gamma_path, gamma).unwrap();

    let text = format!(
        r#"
[experiment]
out_dir = "{}"
seeds = 2
seed_base = 1
t_final = 0.05
dt_rule = "fixed:0.01"

[graph]
source = "file"
file = "{}"

[coefficients]
source = "csv"
files = ["{}"]

[gamma]
family = "table"
file = "{}"

[truncation]
r_list = [2.0]

[regularization]
delta_list = [0.1]

[mesh]
h_list = [0.125]

[noise]
mode = "direct"
modes = ["one"]
bound = 1.0

[dynamics]
b = "zero"
g = "linear:0.3"
u0 = "one"
"#,
        out.display(),
        graph.display(),
        coeff_path.display(),
        gamma_path.display()
    );
    let cfg = write_config(&out, &text);
    let status = Command::new(bin())
        .arg(&cfg)
        .arg("validate")
        .status()
        .unwrap();
    assert!(status.success());
}
