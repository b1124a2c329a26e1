use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use gspde_cli::config::Config;
use gspde_cli::experiments::{
    run_delta_sweep, run_fem_rate, run_truncation_sweep, run_validation_suite,
};
use gspde_cli::report::{append_timing, print_report, write_levels_csv, write_summary_csv};
use gspde_cli::setup::{seed_list, Setup};
use gspde_cli::CliError;

/// Simulator for degenerate parabolic stochastic PDEs on metric graphs:
/// truncation, local regularization and P1 finite elements, with convergence
/// sweep and validation subcommands.
#[derive(Parser)]
#[command(name = "gspde", version, about)]
struct Cli {
    /// Experiment configuration (TOML).
    config: PathBuf,

    /// Override the seed base from the configuration.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the output directory from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Rayon worker threads (0 = automatic).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant validation suite and write validation.json.
    Validate,
    /// Reduce the configured Hamiltonian and write the graph description.
    BuildGraph,
    /// Integrate a single trajectory and dump it.
    Run {
        /// Write the little-endian binary column dump instead of CSV.
        #[arg(long)]
        binary: bool,
        /// Keep every k-th time step.
        #[arg(long, default_value_t = 1)]
        save_every: usize,
    },
    /// Spatial convergence sweep against a refined reference level.
    FemRate,
    /// Regularization (delta) sweep with shared noise.
    DeltaSweep,
    /// Truncation (R) sweep against the reference radius.
    TruncSweep,
    /// Assemble on the first (R, delta, h) level and dump the operator
    /// matrices in Matrix Market format.
    DumpMatrices,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(pass) => std::process::exit(if pass { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let mut config = Config::from_file(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed_base = seed;
    }
    if let Some(out) = &cli.out {
        config.experiment.out_dir = out.display().to_string();
    }
    let out_dir = PathBuf::from(&config.experiment.out_dir);
    let started = Instant::now();

    let pass = match cli.command {
        Command::Validate => {
            let report = run_validation_suite(&config)?;
            for item in &report.items {
                println!(
                    "{:<38} {}  {}",
                    item.name,
                    if item.pass { "PASS" } else { "FAIL" },
                    item.constants
                        .iter()
                        .map(|(k, v)| format!("{k}={v:.4e}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                );
            }
            std::fs::create_dir_all(&out_dir)?;
            std::fs::write(
                out_dir.join("validation.json"),
                serde_json::to_string_pretty(&report.to_json())
                    .map_err(|e| CliError::Config(e.to_string()))?,
            )?;
            append_timing(&out_dir, "validate", started.elapsed().as_secs_f64())?;
            report.all_pass()
        }
        Command::BuildGraph => {
            let setup = Setup::build(&config)?;
            let g = &setup.graph;
            let mut text = String::from("[vertices]\n");
            for v in g.vertices() {
                let kind = match v.kind {
                    gspde_core::graph::VertexKind::Interior => "interior",
                    gspde_core::graph::VertexKind::Exterior => "exterior",
                    gspde_core::graph::VertexKind::Infinity => "infinity",
                    gspde_core::graph::VertexKind::TruncationBoundary => "boundary",
                };
                let z = if v.z.is_infinite() {
                    "inf".into()
                } else {
                    format!("{:.16e}", v.z)
                };
                text.push_str(&format!("{} {} {}\n", v.id.0, kind, z));
            }
            text.push_str("[edges]\n");
            for e in g.edges() {
                let b = if e.b.is_infinite() {
                    "inf".into()
                } else {
                    format!("{:.16e}", e.b)
                };
                text.push_str(&format!(
                    "{} {:.16e} {} {} {}\n",
                    e.id.0, e.a, b, e.v_at_a.0, e.v_at_b.0
                ));
            }
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("graph.txt");
            std::fs::write(&path, text)?;
            println!(
                "wrote {} ({} vertices, {} edges)",
                path.display(),
                g.vertices().len(),
                g.edges().len()
            );
            true
        }
        Command::Run { binary, save_every } => {
            let setup = Setup::build(&config)?;
            let level = setup.truncated(config.truncation.r_list[0])?;
            let pair = level.regularized(config.regularization.delta_list[0])?;
            let space = level.space(*config.mesh.h_list.last().unwrap())?;
            let ops = level.assemble_on(&space, &pair)?;
            let noise = level.noise_model()?;
            let dt = config.dt_rule()?.dt_for(space.h());
            let inst =
                level.instance(ops, noise.clone(), dt, config.regularization.delta_list[0])?;
            let n_steps = (inst.t_final / inst.dt).round() as usize;
            let stream = gspde_core::noise::sample_increments(
                noise.n_modes(),
                config.experiment.seed_base,
                &gspde_core::noise::uniform_grid(dt, n_steps),
            )?;
            let traj = gspde_core::solver::integrate(&inst, &stream, save_every)?;
            std::fs::create_dir_all(&out_dir)?;
            if binary {
                let path = out_dir.join("trajectory.bin");
                let mut f = std::fs::File::create(&path)?;
                traj.write_binary(&mut f)?;
                println!("wrote {} ({} states)", path.display(), traj.states.len());
            } else {
                let path = out_dir.join("trajectory.csv");
                let mut f = std::fs::File::create(&path)?;
                traj.write_csv(&mut f)?;
                println!("wrote {} ({} states)", path.display(), traj.states.len());
            }
            true
        }
        Command::FemRate => {
            let report = run_fem_rate(&config)?;
            finish(&out_dir, &report, started)?
        }
        Command::DeltaSweep => {
            let report = run_delta_sweep(&config)?;
            finish(&out_dir, &report, started)?
        }
        Command::TruncSweep => {
            let report = run_truncation_sweep(&config)?;
            finish(&out_dir, &report, started)?
        }
        Command::DumpMatrices => {
            let setup = Setup::build(&config)?;
            let level = setup.truncated(config.truncation.r_list[0])?;
            let pair = level.regularized(config.regularization.delta_list[0])?;
            let space = level.space(*config.mesh.h_list.last().unwrap())?;
            let ops = level.assemble_on(&space, &pair)?;
            std::fs::create_dir_all(&out_dir)?;
            for (name, m) in [
                ("m_delta", &ops.m_delta),
                ("m_err", &ops.m_err),
                ("a", &ops.a),
                ("s", &ops.s),
            ] {
                let path = out_dir.join(format!("{name}.mtx"));
                let mut f = std::fs::File::create(&path)?;
                m.write_matrix_market(&mut f)?;
                println!("wrote {}", path.display());
            }
            let noise = level.noise_model()?;
            let path = out_dir.join("noise_basis.csv");
            let mut f = std::fs::File::create(&path)?;
            noise.write_basis_csv(&level.graph, 128, &mut f)?;
            println!("wrote {}", path.display());
            println!("dofs: {}, seeds: {}", ops.dim(), seed_list(&config).len());
            true
        }
    };
    Ok(pass)
}

fn finish(
    out_dir: &std::path::Path,
    report: &gspde_cli::experiments::ErrorReport,
    started: Instant,
) -> Result<bool, CliError> {
    print_report(report);
    write_levels_csv(out_dir, report)?;
    write_summary_csv(out_dir, report)?;
    append_timing(out_dir, &report.experiment, started.elapsed().as_secs_f64())?;
    Ok(report.pass)
}
