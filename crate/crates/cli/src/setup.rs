//! Builders from the parsed configuration to solver objects.
//!
//! The expensive inputs (Hamiltonian reduction, tabulated coefficients,
//! spectral noise projection) are constructed once per configuration; the
//! sweep runners then instantiate per-(R, delta, h) operators from them.

use std::sync::Arc;

use gspde_core::coeff::{
    analytic_coefficients, build_weight_base, double_well_like_profile, harmonic_profile,
    make_cutoff, regularize, truncate_alpha, CoefficientField, CutOff, CutOffKind, RegularizedPair,
    WeightFamily,
};
use gspde_core::fem::{assemble, build_space, AssembledOperators, FemFields, FemSpace};
use gspde_core::field::{FnField, ScalarField};
use gspde_core::graph::{parse_graph_file, truncate, MetricGraph, TruncatedGraph};
use gspde_core::hamiltonian::{reduce, registry, ReducedGraph, TabulateOptions};
use gspde_core::noise::{build_direct_noise, build_spectral_noise, NoiseModel, SpectralAtom};
use gspde_core::solver::{ProblemInstance, ReactionFn};

use crate::config::Config;
use crate::CliError;

/// Named graph functions used for initial data and direct noise bases. All
/// built-ins are functions of the level coordinate alone, so they are
/// automatically continuous at vertices.
pub fn parse_graph_fn_name(name: &str) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>, CliError> {
    let (kind, arg) = match name.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (name, None),
    };
    let param = |what: &str| -> Result<f64, CliError> {
        arg.ok_or_else(|| CliError::Config(format!("`{kind}` needs a parameter ({what})")))?
            .parse()
            .map_err(|_| CliError::Config(format!("bad parameter in `{name}`")))
    };
    match kind {
        "one" => Ok(Arc::new(|_| 1.0)),
        "cospi" => Ok(Arc::new(|z: f64| (std::f64::consts::PI * z).cos())),
        "cos" => {
            let f = param("frequency")?;
            Ok(Arc::new(move |z: f64| (f * z).cos()))
        }
        "sin" => {
            let f = param("frequency")?;
            Ok(Arc::new(move |z: f64| (f * z).sin()))
        }
        "decay" => {
            let r = param("rate")?;
            Ok(Arc::new(move |z: f64| (-r * z).exp()))
        }
        "bump" => Ok(Arc::new(|z: f64| (-z * z).exp())),
        other => Err(CliError::Config(format!(
            "unknown graph function `{other}`"
        ))),
    }
}

fn graph_fn_field(name: &str, n_edges: usize) -> Result<ScalarField, CliError> {
    let f = parse_graph_fn_name(name)?;
    Ok(ScalarField::uniform(n_edges, FnField::new(move |z| f(z))))
}

/// Configuration-wide objects independent of (R, delta, h).
pub struct Setup {
    pub config: Config,
    pub graph: MetricGraph,
    /// Present when the graph came from a Hamiltonian.
    pub reduced: Option<ReducedGraph>,
    pub coeff: CoefficientField,
    pub gamma: ScalarField,
    /// `None` for table-backed weights.
    pub gamma_family: Option<WeightFamily>,
    pub cutoff_kind: CutOffKind,
    pub drift: ReactionFn,
    pub diffusion: ReactionFn,
}

impl Setup {
    pub fn build(config: &Config) -> Result<Setup, CliError> {
        let (graph, reduced, spec) = match config.graph.source.as_str() {
            "hamiltonian" => {
                let spec = registry(&config.graph.hamiltonian)?;
                spec.validate()?;
                let red = reduce(&spec)?;
                (red.graph.clone(), Some(red), Some(spec))
            }
            _ => {
                let text = std::fs::read_to_string(&config.graph.file)
                    .map_err(|e| CliError::Config(format!("{}: {e}", config.graph.file)))?;
                (parse_graph_file(&text)?, None, None)
            }
        };

        let z_max = if config.coefficients.z_max > 0.0 {
            config.coefficients.z_max
        } else {
            let r_top = config
                .truncation
                .r_list
                .iter()
                .chain(std::iter::once(&config.truncation.r_ref))
                .fold(0.0_f64, |m, &r| m.max(r));
            r_top + 3.0
        };

        let coeff = match config.coefficients.source.as_str() {
            "analytic" => {
                let profile = match config.coefficients.profile.as_str() {
                    "harmonic" => harmonic_profile(),
                    "double-well-like" | "by-vertex-kind" => double_well_like_profile(&graph)?,
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown analytic profile `{other}`"
                        )))
                    }
                };
                analytic_coefficients(&graph, &profile)?
            }
            "constant" => CoefficientField::constant(
                graph.edges().len(),
                config.coefficients.alpha,
                config.coefficients.beta,
            ),
            "csv" => {
                let tables = config
                    .coefficients
                    .files
                    .iter()
                    .map(|f| {
                        std::fs::read_to_string(f)
                            .map_err(|e| CliError::Config(format!("{f}: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                gspde_core::coeff::coefficients_from_csv(&graph, &tables)?
            }
            _ => {
                let spec = spec
                    .as_ref()
                    .expect("validated: tabulated needs a Hamiltonian");
                let red = reduced.as_ref().expect("validated");
                let opts = TabulateOptions {
                    samples_per_edge: config.coefficients.samples_per_edge,
                    z_max,
                    ..Default::default()
                };
                gspde_core::hamiltonian::tabulate_coefficients(spec, red, &opts)?
            }
        };

        let (gamma_family, gamma) = match config.gamma.family.as_str() {
            "unit" => {
                let fam = WeightFamily::Unit;
                (Some(fam), build_weight_base(&graph, fam)?)
            }
            "exp" => {
                let fam = WeightFamily::ExpDecay {
                    rho1: config.gamma.rho1,
                    rho2: config.gamma.rho2,
                };
                (Some(fam), build_weight_base(&graph, fam)?)
            }
            "poly" => {
                let fam = WeightFamily::PolyDecay {
                    rho3: config.gamma.rho3,
                };
                (Some(fam), build_weight_base(&graph, fam)?)
            }
            _ => {
                let text = std::fs::read_to_string(&config.gamma.file)
                    .map_err(|e| CliError::Config(format!("{}: {e}", config.gamma.file)))?;
                (None, gspde_core::coeff::weight_from_csv(&graph, &text)?)
            }
        };

        let cutoff_kind = match config.truncation.cutoff.as_str() {
            "linear" => CutOffKind::Linear,
            _ => CutOffKind::SmoothedLinear,
        };

        Ok(Setup {
            config: config.clone(),
            graph,
            reduced,
            coeff,
            gamma,
            gamma_family,
            cutoff_kind,
            drift: ReactionFn::parse(&config.dynamics.b)?,
            diffusion: ReactionFn::parse(&config.dynamics.g)?,
        })
    }

    /// Graph truncated at `r`, with the cut-off and truncated coefficient.
    /// Compact graphs pass through unchanged with an inert cut-off.
    pub fn truncated(&self, r: f64) -> Result<TruncatedLevel<'_>, CliError> {
        let graph = Arc::new(if self.graph.unbounded_edge().is_some() {
            truncate(&self.graph, r)?
        } else {
            TruncatedGraph::from_compact(&self.graph)?
        });
        let cutoff = make_cutoff(graph.r(), self.cutoff_kind);
        let alpha_r = truncate_alpha(&self.coeff.alpha, &cutoff);
        // edge ids are stable under truncation, so the base weight restricts
        let gamma = self.gamma.clone();
        Ok(TruncatedLevel {
            setup: self,
            graph,
            cutoff,
            alpha_r,
            gamma,
        })
    }

    pub fn u0_field(&self) -> Result<ScalarField, CliError> {
        graph_fn_field(&self.config.dynamics.u0, self.graph.edges().len())
    }
}

/// Everything tied to one truncation radius.
pub struct TruncatedLevel<'a> {
    pub setup: &'a Setup,
    pub graph: Arc<TruncatedGraph>,
    pub cutoff: CutOff,
    pub alpha_r: ScalarField,
    pub gamma: ScalarField,
}

impl TruncatedLevel<'_> {
    pub fn regularized(&self, delta: f64) -> Result<RegularizedPair, CliError> {
        Ok(regularize(
            &self.alpha_r,
            &self.setup.coeff.beta,
            &self.graph,
            delta,
        )?)
    }

    pub fn space(&self, target_h: f64) -> Result<Arc<FemSpace>, CliError> {
        Ok(Arc::new(build_space(&self.graph, target_h)?))
    }

    pub fn assemble_on(
        &self,
        space: &Arc<FemSpace>,
        pair: &RegularizedPair,
    ) -> Result<Arc<AssembledOperators>, CliError> {
        Ok(assemble(
            space,
            &FemFields {
                alpha: &pair.alpha,
                beta_delta: &pair.beta,
                beta: &self.setup.coeff.beta,
                gamma: &self.gamma,
            },
        )?)
    }

    pub fn noise_model(&self) -> Result<Arc<NoiseModel>, CliError> {
        let cfg = &self.setup.config.noise;
        let n_edges = self.graph.edges().len();
        match cfg.mode.as_str() {
            "off" => {
                // placeholder single mode; the diffusion coefficient is zero
                Ok(Arc::new(build_direct_noise(
                    &self.graph,
                    vec![ScalarField::constant(n_edges, 1.0)],
                    1.0,
                )?))
            }
            "direct" => {
                let basis = cfg
                    .modes
                    .iter()
                    .map(|m| graph_fn_field(m, n_edges))
                    .collect::<Result<Vec<_>, _>>()?;
                let bound = if cfg.bound > 0.0 {
                    cfg.bound
                } else {
                    // sampled sup with a little headroom
                    let mut sup = 0.0_f64;
                    for e in self.graph.edges() {
                        for i in 0..=256 {
                            let z = e.a + (e.b - e.a) * i as f64 / 256.0;
                            let s: f64 = basis.iter().map(|b| b.eval(e.id, z).powi(2)).sum();
                            sup = sup.max(s);
                        }
                    }
                    sup * (1.0 + 1e-9)
                };
                Ok(Arc::new(build_direct_noise(&self.graph, basis, bound)?))
            }
            _ => {
                let spec = registry(&self.setup.config.graph.hamiltonian)?;
                let red = self.setup.reduced.as_ref().expect("validated");
                let atoms: Vec<SpectralAtom> = cfg
                    .atoms
                    .iter()
                    .map(|a| SpectralAtom {
                        xi: (a.xi[0], a.xi[1]),
                        weight: a.w,
                    })
                    .collect();
                let tab = TabulateOptions {
                    samples_per_edge: self.setup.config.coefficients.samples_per_edge,
                    z_max: self.graph.r() + 2.0,
                    ..Default::default()
                };
                Ok(Arc::new(build_spectral_noise(
                    &spec,
                    red,
                    &self.graph,
                    &atoms,
                    &tab,
                )?))
            }
        }
    }

    /// Full problem instance on one mesh level.
    pub fn instance(
        &self,
        ops: Arc<AssembledOperators>,
        noise: Arc<NoiseModel>,
        dt: f64,
        delta: f64,
    ) -> Result<ProblemInstance, CliError> {
        Ok(ProblemInstance {
            ops,
            noise,
            drift: self.setup.drift,
            diffusion: self.setup.diffusion,
            cutoff: Some(self.cutoff),
            u0: self.setup.u0_field()?,
            t_final: self.setup.config.experiment.t_final,
            dt,
            r: self.graph.r(),
            delta,
        })
    }
}

/// The seed list an experiment runs over.
pub fn seed_list(config: &Config) -> Vec<u64> {
    (0..config.experiment.seeds as u64)
        .map(|i| config.experiment.seed_base + i)
        .collect()
}
