//! Deterministic CSV emission.
//!
//! Data files are byte-identical across reruns with the same configuration
//! and seeds, so wall-clock timings go to a separate plain-text file instead
//! of the data CSVs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::experiments::ErrorReport;
use crate::CliError;

/// Fixed data schema: `experiment,level,param,error,stderr,seeds`.
pub fn write_levels_csv(dir: &Path, report: &ErrorReport) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", report.experiment));
    let mut f = fs::File::create(&path)?;
    writeln!(f, "experiment,level,param,error,stderr,seeds")?;
    for (i, l) in report.levels.iter().enumerate() {
        writeln!(
            f,
            "{},{},{:.16e},{:.16e},{:.16e},{}",
            report.experiment, i, l.param, l.error, l.stderr, l.n_seeds
        )?;
    }
    Ok(path)
}

/// Summary with the fitted slope, bound proxies and measured constants.
pub fn write_summary_csv(dir: &Path, report: &ErrorReport) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}_summary.csv", report.experiment));
    let mut f = fs::File::create(&path)?;
    writeln!(f, "key,value")?;
    writeln!(f, "experiment,{}", report.experiment)?;
    writeln!(f, "param,{}", report.param_name)?;
    writeln!(f, "pass,{}", report.pass)?;
    if let Some((slope, se)) = report.slope {
        writeln!(f, "slope,{slope:.16e}")?;
        writeln!(f, "slope_stderr,{se:.16e}")?;
    }
    for (i, b) in report.bound_proxy.iter().enumerate() {
        writeln!(f, "bound_proxy_{i},{b:.16e}")?;
    }
    for (k, v) in &report.constants {
        writeln!(f, "{k},{v:.16e}")?;
    }
    for (i, n) in report.notes.iter().enumerate() {
        writeln!(f, "note_{i},{}", n.replace(',', ";"))?;
    }
    Ok(path)
}

/// Wall-clock seconds per experiment, outside the deterministic data files.
pub fn append_timing(dir: &Path, experiment: &str, seconds: f64) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join("timings.txt");
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(f, "{experiment} wallclock_s {seconds:.3}")?;
    Ok(())
}

/// Human-readable level table on stdout.
pub fn print_report(report: &ErrorReport) {
    println!(
        "experiment: {} (parameter {})",
        report.experiment, report.param_name
    );
    println!(
        "{:>4} {:>14} {:>14} {:>12} {:>7}",
        "lvl", report.param_name, "error", "stderr", "seeds"
    );
    for (i, l) in report.levels.iter().enumerate() {
        println!(
            "{:>4} {:>14.6e} {:>14.6e} {:>12.3e} {:>7}",
            i, l.param, l.error, l.stderr, l.n_seeds
        );
    }
    if let Some((slope, se)) = report.slope {
        println!("fitted slope: {slope:.4} +- {se:.4}");
    }
    if !report.bound_proxy.is_empty() {
        println!("bound proxy B: {:?}", report.bound_proxy);
    }
    for (k, v) in &report.constants {
        println!("  {k} = {v:.6e}");
    }
    for n in &report.notes {
        println!("  note: {n}");
    }
    println!("result: {}", if report.pass { "PASS" } else { "FAIL" });
}
