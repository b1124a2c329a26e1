//! TOML experiment configuration.
//!
//! A single file drives every experiment; the subcommand decides which sweep
//! runs. Parameter lists are validated up front: mesh widths strictly
//! decreasing with power-of-two nesting, regularization parameters strictly
//! decreasing, truncation radii strictly increasing, all names resolvable.

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentSection,
    pub graph: GraphSection,
    pub coefficients: CoeffSection,
    #[serde(default)]
    pub gamma: GammaSection,
    pub truncation: TruncationSection,
    pub regularization: RegularizationSection,
    pub mesh: MeshSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub dynamics: DynamicsSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub out_dir: String,
    pub seeds: usize,
    #[serde(default)]
    pub seed_base: u64,
    pub t_final: f64,
    /// `"h"`, `"h2"` or `"fixed:<dt>"`.
    pub dt_rule: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// `"hamiltonian"` or `"file"`.
    pub source: String,
    #[serde(default)]
    pub hamiltonian: String,
    #[serde(default)]
    pub file: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSection {
    /// `"analytic"` (profile by name), `"tabulated"` (contour integrals) or
    /// `"constant"` (synthetic, bypasses the vertex-class rules).
    pub source: String,
    #[serde(default)]
    pub profile: String,
    #[serde(default = "default_samples")]
    pub samples_per_edge: usize,
    /// Tabulation horizon on the unbounded edge; must exceed the largest
    /// truncation radius plus one.
    #[serde(default)]
    pub z_max: f64,
    #[serde(default = "default_one")]
    pub alpha: f64,
    #[serde(default = "default_one")]
    pub beta: f64,
    /// One `z,alpha,beta` CSV file per edge, for `source = "csv"`.
    #[serde(default)]
    pub files: Vec<String>,
}

fn default_one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    48
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    /// `"unit"`, `"exp"`, `"poly"` or `"table"`.
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub rho1: f64,
    #[serde(default)]
    pub rho2: f64,
    #[serde(default)]
    pub rho3: f64,
    /// `z,gamma` CSV for the unbounded edge, for `family = "table"`.
    #[serde(default)]
    pub file: String,
}

fn default_family() -> String {
    "unit".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub r_list: Vec<f64>,
    /// Reference radius for the truncation sweep.
    #[serde(default)]
    pub r_ref: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: String,
}

fn default_cutoff() -> String {
    "linear".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationSection {
    pub delta_list: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub h_list: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// `"direct"`, `"spectral"` or `"off"`.
    #[serde(default = "default_noise_mode")]
    pub mode: String,
    /// Direct basis function names (`one`, `cos:<freq>`, `sin:<freq>`,
    /// `decay:<rate>`).
    #[serde(default)]
    pub modes: Vec<String>,
    /// Declared trace bound for direct mode; 0 means "use the sampled sup".
    #[serde(default)]
    pub bound: f64,
    #[serde(default)]
    pub atoms: Vec<AtomSection>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            mode: "off".into(),
            modes: Vec::new(),
            bound: 0.0,
            atoms: Vec::new(),
        }
    }
}

fn default_noise_mode() -> String {
    "off".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub xi: [f64; 2],
    pub w: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub b: String,
    pub g: String,
    /// Initial data name (`one`, `cospi`, `decay:<rate>`, `bump`).
    pub u0: String,
}

/// Time-step rule derived from the mesh width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    EqualH,
    HSquared,
    Fixed(f64),
}

impl DtRule {
    pub fn parse(text: &str) -> Result<DtRule, CliError> {
        match text {
            "h" => Ok(DtRule::EqualH),
            "h2" => Ok(DtRule::HSquared),
            other => match other.strip_prefix("fixed:") {
                Some(v) => v
                    .parse()
                    .map(DtRule::Fixed)
                    .map_err(|_| CliError::Config(format!("bad dt in `{other}`"))),
                None => Err(CliError::Config(format!(
                    "dt_rule must be `h`, `h2` or `fixed:<dt>`, got `{other}`"
                ))),
            },
        }
    }

    pub fn dt_for(&self, h: f64) -> f64 {
        match *self {
            DtRule::EqualH => h,
            DtRule::HSquared => h * h,
            DtRule::Fixed(dt) => dt,
        }
    }

    /// Grid-refinement exponent between consecutive (halved) mesh levels:
    /// each h-halving refines the time grid by `2^k`.
    pub fn refinements_per_level(&self) -> u32 {
        match self {
            DtRule::EqualH => 1,
            DtRule::HSquared => 2,
            DtRule::Fixed(_) => 0,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| CliError::Config(format!("TOML: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn dt_rule(&self) -> Result<DtRule, CliError> {
        DtRule::parse(&self.experiment.dt_rule)
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));

        if self.experiment.seeds == 0 {
            return fail("need at least one seed".into());
        }
        if !(self.experiment.t_final >= 0.0) {
            return fail("t_final must be nonnegative".into());
        }
        self.dt_rule()?;

        match self.graph.source.as_str() {
            "hamiltonian" => {
                if self.graph.hamiltonian.is_empty() {
                    return fail("graph.source = hamiltonian needs graph.hamiltonian".into());
                }
            }
            "file" => {
                if self.graph.file.is_empty() {
                    return fail("graph.source = file needs graph.file".into());
                }
                if self.coefficients.source == "tabulated" || self.noise.mode == "spectral" {
                    return fail(
                        "tabulated coefficients and spectral noise need graph.source = hamiltonian"
                            .into(),
                    );
                }
            }
            other => return fail(format!("unknown graph source `{other}`")),
        }

        match self.coefficients.source.as_str() {
            "analytic" => {
                if self.coefficients.profile.is_empty() {
                    return fail("analytic coefficients need a profile name".into());
                }
            }
            "tabulated" | "constant" => {}
            "csv" => {
                if self.coefficients.files.is_empty() {
                    return fail("csv coefficients need one file per edge".into());
                }
            }
            other => return fail(format!("unknown coefficient source `{other}`")),
        }

        match self.gamma.family.as_str() {
            "unit" | "exp" | "poly" => {}
            "table" => {
                if self.gamma.file.is_empty() {
                    return fail("gamma.family = table needs gamma.file".into());
                }
            }
            other => return fail(format!("unknown gamma family `{other}`")),
        }

        // h list strictly decreasing, power-of-two nested
        let h = &self.mesh.h_list;
        if h.is_empty() {
            return fail("mesh.h_list is empty".into());
        }
        for w in h.windows(2) {
            if !(w[1] < w[0]) {
                return fail("mesh.h_list must be strictly decreasing".into());
            }
            let ratio = w[0] / w[1];
            let r = ratio.round();
            if (ratio - r).abs() > 1e-9 || r < 2.0 || (r as u64).count_ones() != 1 {
                return fail(format!(
                    "mesh.h_list must refine by powers of two, got ratio {ratio}"
                ));
            }
        }

        let d = &self.regularization.delta_list;
        if d.is_empty() {
            return fail("regularization.delta_list is empty".into());
        }
        if d.windows(2).any(|w| !(w[1] < w[0])) {
            return fail("regularization.delta_list must be strictly decreasing".into());
        }
        if d.iter().any(|&x| !(x > 0.0)) {
            return fail("regularization deltas must be positive".into());
        }

        let r = &self.truncation.r_list;
        if r.is_empty() {
            return fail("truncation.r_list is empty".into());
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return fail("truncation.r_list must be strictly increasing".into());
        }
        match self.truncation.cutoff.as_str() {
            "linear" | "smoothed" => {}
            other => return fail(format!("unknown cutoff kind `{other}`")),
        }

        match self.noise.mode.as_str() {
            "off" => {}
            "direct" => {
                if self.noise.modes.is_empty() {
                    return fail("direct noise needs at least one mode name".into());
                }
            }
            "spectral" => {
                if self.noise.atoms.is_empty() {
                    return fail("spectral noise needs atoms".into());
                }
            }
            other => return fail(format!("unknown noise mode `{other}`")),
        }

        // names must resolve
        gspde_core::solver::ReactionFn::parse(&self.dynamics.b)
            .map_err(|e| CliError::Config(format!("dynamics.b: {e}")))?;
        gspde_core::solver::ReactionFn::parse(&self.dynamics.g)
            .map_err(|e| CliError::Config(format!("dynamics.g: {e}")))?;
        crate::setup::parse_graph_fn_name(&self.dynamics.u0)
            .map_err(|e| CliError::Config(format!("dynamics.u0: {e}")))?;
        for m in &self.noise.modes {
            crate::setup::parse_graph_fn_name(m)
                .map_err(|e| CliError::Config(format!("noise mode `{m}`: {e}")))?;
        }

        Ok(())
    }
}
