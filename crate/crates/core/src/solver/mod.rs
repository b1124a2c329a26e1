//! Time integration of the semi-discrete system, weighted-norm error
//! evaluation between nested meshes, and Monte Carlo ensembles.
//!
//! One step of the drift-implicit Euler-Maruyama scheme solves
//!
//! ```text
//!   (M_delta - dt A) u_{n+1} = M_delta u_n + dt <B(u_n), phi> + <G(u_n) dW_n, phi>
//! ```
//!
//! with the factorization of the left-hand side cached across steps. The
//! noise enters explicitly, the drift implicitly only through the linear
//! part (the operator); reaction terms are evaluated at the previous state.

mod error;
mod mc;

pub use error::{weighted_error, ErrorWeight};
pub use mc::{mc_ensemble, McStats};

use std::sync::Arc;

use crate::coeff::CutOff;
use crate::fem::{l2_project, p1_field, AssembledOperators, ShiftedSolver};
use crate::field::ScalarField;
use crate::noise::{NoiseIncrementStream, NoiseModel};
use crate::{Error, Result};

/// Named Lipschitz reaction functions for drift and diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReactionFn {
    Zero,
    /// `c * u`
    Linear(f64),
    /// `c * tanh(u)`: bounded and smooth
    BoundedSmooth(f64),
    /// `c`, independent of the state (additive noise)
    Const(f64),
}

impl ReactionFn {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ReactionFn::Zero => 0.0,
            ReactionFn::Linear(c) => c * u,
            ReactionFn::BoundedSmooth(c) => c * u.tanh(),
            ReactionFn::Const(c) => c,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ReactionFn::Zero) || matches!(self, ReactionFn::Const(c) if *c == 0.0)
    }

    /// Parses `zero`, `linear:c`, `tanh:c`, `const:c`.
    pub fn parse(name: &str) -> Result<ReactionFn> {
        let (kind, arg) = match name.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (name, None),
        };
        let c = || -> Result<f64> {
            arg.ok_or_else(|| {
                Error::Invalid(format!("`{kind}` needs a parameter, e.g. {kind}:0.5"))
            })?
            .parse()
            .map_err(|_| Error::Invalid(format!("bad parameter in `{name}`")))
        };
        match kind {
            "zero" => Ok(ReactionFn::Zero),
            "linear" => Ok(ReactionFn::Linear(c()?)),
            "tanh" => Ok(ReactionFn::BoundedSmooth(c()?)),
            "const" => Ok(ReactionFn::Const(c()?)),
            other => Err(Error::Invalid(format!(
                "unknown reaction function `{other}`"
            ))),
        }
    }
}

/// Everything a single trajectory needs.
#[derive(Clone)]
pub struct ProblemInstance {
    pub ops: Arc<AssembledOperators>,
    pub noise: Arc<NoiseModel>,
    pub drift: ReactionFn,
    pub diffusion: ReactionFn,
    pub cutoff: Option<CutOff>,
    pub u0: ScalarField,
    pub t_final: f64,
    pub dt: f64,
    /// Provenance carried into trajectories: truncation radius and
    /// regularization parameter (NaN when not applicable).
    pub r: f64,
    pub delta: f64,
}

impl ProblemInstance {
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// The uniform time grid implied by `dt` and `t_final`.
    pub fn time_grid(&self) -> Vec<f64> {
        crate::noise::uniform_grid(self.dt, self.n_steps())
    }

    /// Initial dof vector: the mass projection of `u0`.
    pub fn project_initial(&self) -> Result<Vec<f64>> {
        let rhs = self.ops.load(|k, z| self.u0.eval(k, z));
        l2_project(&self.ops, &rhs)
    }
}

/// One-step integrator with the shifted factorization cached.
pub struct SemiImplicitStepper {
    instance: ProblemInstance,
    solver: Arc<ShiftedSolver>,
}

impl SemiImplicitStepper {
    pub fn new(instance: ProblemInstance) -> Result<Self> {
        let solver = instance.ops.solver(1.0, -instance.dt)?;
        Ok(Self { instance, solver })
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    /// `(M - dt A) u_{n+1} = M u_n + dt b-load + g-load`.
    pub fn step(&self, u: &[f64], dw: &[f64]) -> Result<Vec<f64>> {
        let inst = &self.instance;
        let mut rhs = inst.ops.m_delta.matvec(u);

        if !inst.drift.is_zero() {
            let nodal: Vec<f64> = u.iter().map(|&v| inst.drift.eval(v)).collect();
            let bfield = p1_field(&inst.ops.space, &nodal);
            let cutoff = inst.cutoff;
            let load = inst.ops.load(|k, z| {
                let eta = cutoff.map_or(1.0, |c| crate::field::Field1D::eval(&c, z));
                bfield.eval(k, z) * eta
            });
            for (r, l) in rhs.iter_mut().zip(&load) {
                *r += inst.dt * l;
            }
        }

        if !inst.diffusion.is_zero() && !dw.is_empty() {
            let g = inst.diffusion;
            let load = crate::noise::diffusion_load(
                &inst.ops,
                &inst.noise,
                u,
                &|v| g.eval(v),
                dw,
                inst.cutoff.as_ref(),
            );
            for (r, l) in rhs.iter_mut().zip(&load) {
                *r += l;
            }
        }

        let next = self.solver.solve(&rhs)?;
        if let Some(bad) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: 0,
                context: format!("dof {bad}"),
            });
        }
        Ok(next)
    }
}

/// A time-indexed sequence of dof vectors with provenance metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub h: f64,
    pub delta: f64,
    pub r: f64,
    pub seed: u64,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    /// CSV dump with header `t, dof_0..dof_{N-1}`.
    pub fn write_csv(&self, w: &mut dyn std::io::Write) -> Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        write!(w, "t")?;
        for i in 0..n {
            write!(w, ",dof_{i}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.16e}")?;
            for v in row {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Binary column dump: little-endian f64, row-major `(t, dofs...)`.
    pub fn write_binary(&self, w: &mut dyn std::io::Write) -> Result<()> {
        for (t, row) in self.times.iter().zip(&self.states) {
            w.write_all(&t.to_le_bytes())?;
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Integrates the instance along a noise stream, saving every `save_every`
/// steps (plus the initial and final states).
pub fn integrate(
    instance: &ProblemInstance,
    stream: &NoiseIncrementStream,
    save_every: usize,
) -> Result<Trajectory> {
    let n_steps = instance.n_steps();
    if n_steps == 0 {
        let u = instance.project_initial()?;
        return Ok(Trajectory {
            times: vec![0.0],
            states: vec![u],
            h: instance.ops.space.h(),
            delta: instance.delta,
            r: instance.r,
            seed: stream.seed(),
        });
    }
    if stream.n_steps() != n_steps {
        return Err(Error::GridMismatch(format!(
            "stream has {} steps, instance needs {n_steps}",
            stream.n_steps()
        )));
    }
    for (i, &t) in stream.times().iter().enumerate() {
        if (t - i as f64 * instance.dt).abs() > 1e-9 * instance.dt.max(1e-300) {
            return Err(Error::GridMismatch(format!(
                "stream time {t} differs from uniform grid at index {i}"
            )));
        }
    }
    if !instance.diffusion.is_zero() && stream.n_modes() != instance.noise.n_modes() {
        return Err(Error::GridMismatch(format!(
            "stream carries {} modes, noise model has {}",
            stream.n_modes(),
            instance.noise.n_modes()
        )));
    }

    let stepper = SemiImplicitStepper::new(instance.clone())?;
    let mut u = instance.project_initial()?;
    let save = save_every.max(1);

    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    let mut norm_history: Vec<f64> = Vec::new();
    for i in 0..n_steps {
        u = stepper.step(&u, stream.step(i)).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite {
                step: i,
                context: format!("norm history (last 5): {:?}", tail(&norm_history, 5)),
            },
            other => other,
        })?;
        norm_history.push(instance.ops.norm_m_delta(&u));
        let t = (i + 1) as f64 * instance.dt;
        if (i + 1) % save == 0 || i + 1 == n_steps {
            times.push(t);
            states.push(u.clone());
        }
    }

    Ok(Trajectory {
        times,
        states,
        h: instance.ops.space.h(),
        delta: instance.delta,
        r: instance.r,
        seed: stream.seed(),
    })
}

fn tail(v: &[f64], n: usize) -> &[f64] {
    &v[v.len().saturating_sub(n)..]
}
