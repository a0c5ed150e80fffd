//! Time evolution: exact matrix flows of the trace Hamiltonians, the
//! eigenvalue projection method, and fixed-step RK4 flows of arbitrary
//! Hamiltonians with conservation monitoring.
//!
//! Exact flows exploit that a trace-Hamiltonian flow leaves Y fixed, so X
//! moves by a polynomial (rational chart) or a one-parameter exponential
//! (trigonometric chart) in Y. Everything else integrates Hamilton's
//! equations through the chart vector fields in `dynamics`, recording a
//! configured list of invariants and spectral records along the way.

use num_complex::Complex64;

use crate::dynamics;
use crate::ham::{self, HamiltonianSpec};
use crate::lax::{spectral_record, SpectralRecord};
use crate::linalg;
use crate::phase::{
    check_constraint, from_particles, to_particles, PhasePoint, QuiverDatum, COLLISION_TOLERANCE,
};
use crate::specfun::Variant;
use crate::{Error, Result};

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Conserved-quantity drift that flags a trajectory as drifted; ten times
/// this aborts the run.
pub const FLOW_DRIFT_TOLERANCE: f64 = 1e-6;
/// Moment-map residual beyond which a quiver trajectory is flagged.
pub const CONSTRAINT_DRIFT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    /// Closed-form flow; trace Hamiltonians on rational/trigonometric
    /// quiver data only.
    Exact,
    /// Classical fixed-step Runge-Kutta; any Hamiltonian, any chart.
    Rk4,
}

/// A flow to run: which Hamiltonian, how, for how long, and how densely
/// to record. `dt` is the integrator step for RK4 and the output-grid
/// step for exact flows; recording happens every `record_every` steps.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub hamiltonian: HamiltonianSpec,
    pub method: FlowMethod,
    pub t_final: f64,
    pub dt: f64,
    pub record_every: usize,
}

/// What to log along a trajectory: Hamiltonian values and spectral
/// records over a z-grid (skipped when the grid is empty).
#[derive(Debug, Clone, Default)]
pub struct LogSpec {
    pub hamiltonians: Vec<HamiltonianSpec>,
    pub spectral_grid: Vec<Complex64>,
}

/// Per-recorded-time conserved data. `values[t][h]` is the h-th
/// configured Hamiltonian at the t-th recorded time.
#[derive(Debug, Clone)]
pub struct InvariantLog {
    pub hamiltonians: Vec<HamiltonianSpec>,
    pub values: Vec<Vec<Complex64>>,
    pub spectral: Vec<SpectralRecord>,
}

/// A recorded flow. `drifted` is set when the flow Hamiltonian moved more
/// than [`FLOW_DRIFT_TOLERANCE`] or a quiver state's moment-map residual
/// exceeded [`CONSTRAINT_DRIFT_TOLERANCE`]; runs abort with `StepError`
/// only at ten times the Hamiltonian tolerance.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub invariant_log: InvariantLog,
    pub drifted: bool,
}

fn require_degree(i: u32) -> Result<()> {
    if i == 0 {
        return Err(Error::Validation {
            message: "flow degree must be positive".to_string(),
        });
    }
    Ok(())
}

/// Flow of `(1/(i+1)) tr Y^(i+1)` on the rational chart: `X + t Y^i` with
/// Y, u, v fixed. The moment map is exactly unchanged because `Y^i`
/// commutes with Y.
pub fn exact_flow_rational(d: &QuiverDatum, i: u32, t: f64) -> Result<QuiverDatum> {
    require_degree(i)?;
    if !matches!(d.variant, Variant::Rational) {
        return Err(Error::Validation {
            message: "the polynomial exact flow lives on the rational chart".to_string(),
        });
    }
    Ok(rational_power_flow(d, i, t))
}

/// Flow of the degree-(i+1) trace Hamiltonian on the trigonometric chart:
/// `X -> X exp(t Y^i)` with `u -> exp(-t Y^i) u`, `v -> v exp(t Y^i)`.
/// The side and sign are forced by moment-map preservation: conjugating
/// `X^-1 Y X - Y + u v` by `exp(t Y^i)` fixes the constraint because the
/// exponential commutes with Y.
pub fn exact_flow_trig(d: &QuiverDatum, i: u32, t: f64) -> Result<QuiverDatum> {
    require_degree(i)?;
    if !matches!(d.variant, Variant::Trigonometric) {
        return Err(Error::Validation {
            message: "the exponential exact flow lives on the trigonometric chart".to_string(),
        });
    }
    Ok(trig_power_flow(d, i, t))
}

fn rational_power_flow(d: &QuiverDatum, power: u32, t: f64) -> QuiverDatum {
    QuiverDatum {
        variant: d.variant.clone(),
        x: &d.x + linalg::mat_pow(&d.y, power) * Complex64::new(t, 0.0),
        y: d.y.clone(),
        u: d.u.clone(),
        v: d.v.clone(),
    }
}

fn trig_power_flow(d: &QuiverDatum, power: u32, t: f64) -> QuiverDatum {
    let generator = linalg::mat_pow(&d.y, power);
    let forward = (&generator * Complex64::new(t, 0.0)).exp();
    let backward = (generator * Complex64::new(-t, 0.0)).exp();
    QuiverDatum {
        variant: d.variant.clone(),
        x: &d.x * &forward,
        y: d.y.clone(),
        u: &backward * &d.u,
        v: &d.v * &forward,
    }
}

/// Generator power may be 0 here (the flow of `tr Y` translates X by the
/// identity); the public entry points insist on positive powers.
fn exact_power_flow(d: &QuiverDatum, power: u32, t: f64) -> Result<QuiverDatum> {
    match d.variant {
        Variant::Rational => Ok(rational_power_flow(d, power, t)),
        Variant::Trigonometric => Ok(trig_power_flow(d, power, t)),
        Variant::Elliptic(_) => Err(Error::Validation {
            message: "no exact flow exists for the elliptic variant".to_string(),
        }),
    }
}

fn exact_flow(d: &QuiverDatum, i: u32, t: f64) -> Result<QuiverDatum> {
    require_degree(i)?;
    exact_power_flow(d, i, t)
}

/// Positions along the exact flow as sorted eigenvalue multisets of
/// `X(t)`. Well-defined straight through collisions: no separation checks,
/// no particle chart.
pub fn eigenvalue_projection(
    d: &QuiverDatum,
    i: u32,
    times: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let moved = exact_flow(d, i, t)?;
        out.push(linalg::eigenvalues(&moved.x)?);
    }
    Ok(out)
}

struct Recorder<'a> {
    log: &'a LogSpec,
    reference: Complex64,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(log: &'a LogSpec, reference: Complex64) -> Self {
        Recorder {
            log,
            reference,
            traj: Trajectory {
                times: Vec::new(),
                states: Vec::new(),
                invariant_log: InvariantLog {
                    hamiltonians: log.hamiltonians.clone(),
                    values: Vec::new(),
                    spectral: Vec::new(),
                },
                drifted: false,
            },
        }
    }

    /// Appends one sample, monitoring the flow Hamiltonian and the quiver
    /// constraint. `flow_value` is the flow Hamiltonian at this state.
    fn push(&mut self, t: f64, state: &PhasePoint, flow_value: Complex64) -> Result<()> {
        let drift = (flow_value - self.reference).norm();
        if drift > 10.0 * FLOW_DRIFT_TOLERANCE {
            return Err(Error::Step {
                message: format!(
                    "flow Hamiltonian drifted by {drift:.3e} at t = {t} (tolerance {FLOW_DRIFT_TOLERANCE:.1e})"
                ),
            });
        }
        if drift > FLOW_DRIFT_TOLERANCE {
            self.traj.drifted = true;
        }
        if let PhasePoint::Quiver(d) = state {
            let (_, residual) = check_constraint(d, CONSTRAINT_DRIFT_TOLERANCE)?;
            if residual > CONSTRAINT_DRIFT_TOLERANCE {
                self.traj.drifted = true;
            }
        }
        let mut row = Vec::with_capacity(self.log.hamiltonians.len());
        for h in &self.log.hamiltonians {
            row.push(ham::evaluate(h, state)?);
        }
        self.traj.invariant_log.values.push(row);
        if !self.log.spectral_grid.is_empty() {
            self.traj
                .invariant_log
                .spectral
                .push(spectral_record(state, &self.log.spectral_grid)?);
        }
        self.traj.times.push(t);
        self.traj.states.push(state.clone());
        Ok(())
    }
}

fn validate_flow_spec(spec: &FlowSpec) -> Result<usize> {
    spec.hamiltonian.validate()?;
    if !(spec.dt > 0.0 && spec.dt.is_finite()) {
        return Err(Error::Validation {
            message: "flow step dt must be positive and finite".to_string(),
        });
    }
    if !(spec.t_final >= 0.0 && spec.t_final.is_finite()) {
        return Err(Error::Validation {
            message: "flow horizon t_final must be nonnegative and finite".to_string(),
        });
    }
    if spec.record_every == 0 {
        return Err(Error::Validation {
            message: "record_every must be positive".to_string(),
        });
    }
    // The grid is n_steps uniform steps of dt; t_final off the grid is
    // rounded to the nearest step count.
    Ok((spec.t_final / spec.dt).round() as usize)
}

fn collision_guard(state: &PhasePoint, t: f64) -> Result<()> {
    if let PhasePoint::Particle(s) = state {
        let sep = s.min_separation();
        if sep <= COLLISION_TOLERANCE {
            return Err(Error::Collision {
                separation: sep,
                tolerance: COLLISION_TOLERANCE,
                context: format!("flow at t = {t}"),
            });
        }
    }
    Ok(())
}

/// Integrates Hamilton's equations with classical RK4 at fixed step,
/// recording every `record_every` steps (and always the endpoint state).
/// Particle runs abort at collisions; quiver runs continue through them
/// and rely on the drift monitors.
///
/// Trace and residue Hamiltonians on trigonometric particle data flow at
/// the quiver chart image (the structure that governs them there is the
/// group-cotangent one; the flat particle pairing breaks their higher
/// conservation laws) and each recorded state maps back through the
/// conversion, so the trajectory is recorded in the conversion's gauge.
pub fn ode_flow(start: &PhasePoint, spec: &FlowSpec, log: &LogSpec) -> Result<Trajectory> {
    if spec.method != FlowMethod::Rk4 {
        return Err(Error::Validation {
            message: "ode_flow integrates with RK4; use run_flow to dispatch exact flows"
                .to_string(),
        });
    }
    if let PhasePoint::Particle(s) = start {
        if matches!(s.variant, Variant::Trigonometric) && spec.hamiltonian.quiver_native() {
            let image = PhasePoint::Quiver(from_particles(s)?);
            let mut traj = ode_flow(&image, spec, log)?;
            for state in &mut traj.states {
                if let PhasePoint::Quiver(d) = state {
                    *state = PhasePoint::Particle(to_particles(d)?);
                }
            }
            return Ok(traj);
        }
    }
    let n_steps = validate_flow_spec(spec)?;
    collision_guard(start, 0.0)?;
    let h0 = ham::evaluate(&spec.hamiltonian, start)?;
    let mut recorder = Recorder::new(log, h0);
    recorder.push(0.0, start, h0)?;

    let dim = dynamics::dimension(start);
    let mut coords = dynamics::flatten(start);
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    for step_idx in 1..=n_steps {
        let dt = Complex64::new(spec.dt, 0.0);
        let k1 = dynamics::vector_field(&spec.hamiltonian, &dynamics::unflatten(start, &coords))?;
        for m in 0..dim {
            stage[m] = coords[m] + 0.5 * dt * k1[m];
        }
        let k2 = dynamics::vector_field(&spec.hamiltonian, &dynamics::unflatten(start, &stage))?;
        for m in 0..dim {
            stage[m] = coords[m] + 0.5 * dt * k2[m];
        }
        let k3 = dynamics::vector_field(&spec.hamiltonian, &dynamics::unflatten(start, &stage))?;
        for m in 0..dim {
            stage[m] = coords[m] + dt * k3[m];
        }
        let k4 = dynamics::vector_field(&spec.hamiltonian, &dynamics::unflatten(start, &stage))?;
        for m in 0..dim {
            coords[m] += dt / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        }

        let t = step_idx as f64 * spec.dt;
        let state = dynamics::unflatten(start, &coords);
        collision_guard(&state, t)?;
        if step_idx % spec.record_every == 0 || step_idx == n_steps {
            let h = ham::evaluate(&spec.hamiltonian, &state)?;
            recorder.push(t, &state, h)?;
        }
    }
    Ok(recorder.traj)
}

/// Runs the flow a `FlowSpec` describes: RK4 through [`ode_flow`], exact
/// flows by sampling the closed form on the same recording grid.
pub fn run_flow(start: &PhasePoint, spec: &FlowSpec, log: &LogSpec) -> Result<Trajectory> {
    match spec.method {
        FlowMethod::Rk4 => ode_flow(start, spec, log),
        FlowMethod::Exact => {
            let n_steps = validate_flow_spec(spec)?;
            let degree = match spec.hamiltonian {
                HamiltonianSpec::Trace(i) => i,
                _ => {
                    return Err(Error::Validation {
                        message: "exact flows exist only for trace Hamiltonians".to_string(),
                    })
                }
            };
            let d = match start {
                PhasePoint::Quiver(d) => d,
                PhasePoint::Particle(_) => {
                    return Err(Error::Validation {
                        message: "exact flows run on the quiver chart".to_string(),
                    })
                }
            };
            // The flow of (1/i) tr Y^i moves X along Y^(i-1).
            require_degree(degree)?;
            let generator_power = degree - 1;
            let h0 = ham::evaluate(&spec.hamiltonian, start)?;
            let mut recorder = Recorder::new(log, h0);
            recorder.push(0.0, start, h0)?;
            let mut step_idx = spec.record_every;
            loop {
                let last = step_idx >= n_steps;
                let idx = step_idx.min(n_steps);
                let t = idx as f64 * spec.dt;
                if idx > 0 {
                    let moved = PhasePoint::Quiver(exact_power_flow(d, generator_power, t)?);
                    let h = ham::evaluate(&spec.hamiltonian, &moved)?;
                    recorder.push(t, &moved, h)?;
                }
                if last {
                    break;
                }
                step_idx += spec.record_every;
            }
            Ok(recorder.traj)
        }
    }
}

/// The hierarchy flow at the marked pole: `ode_flow` with the degree-i
/// residue Hamiltonian, overriding whatever `spec.hamiltonian` says.
pub fn spin_hierarchy_flow(
    start: &PhasePoint,
    i: u32,
    spec: &FlowSpec,
    log: &LogSpec,
) -> Result<Trajectory> {
    let hierarchy = FlowSpec {
        hamiltonian: HamiltonianSpec::ResidueAtB(i),
        method: FlowMethod::Rk4,
        ..spec.clone()
    };
    ode_flow(start, &hierarchy, log)
}
