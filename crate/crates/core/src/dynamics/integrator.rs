//! Fixed-step splitting integrator for the mode equations.
//!
//! In canonical form the free system has `p_A = Ȧ`, `p_a = ȧ - τ̃⁻¹ᵀ A` and
//! `H = ½|p_A|² + ½|p_a + τ̃⁻¹ᵀ A|² + ½ A†ṼA`, with `a` cyclic. The vector
//! field splits into pieces that are each solved exactly:
//!
//! * drift: `A += h p_A`, `t += h`
//! * kick: `p_A -= h (Ṽ A + τ̃⁻¹ y)`, `a += h y`, with `y = p_a + τ̃⁻¹ᵀ A`
//! * drive: `p_a += h f cos(ω t)`
//! * friction: `p_A *= exp(-η h)`
//!
//! A palindromic composition of these gives a symmetric second-order step,
//! and the triple-jump composition of that step a fourth-order one. For the
//! free system each step is symplectic and time-reversible and `p_a` is
//! never touched, so the cloud momentum is conserved to round-off.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{cloud_momentum, energy, DampingSpec, DriveSpec, ModeCoefficients, ModeState};
use crate::error::{Error, Result};

/// `dt * max(Ω, ω, τ̃⁻¹)` must stay below this.
pub const STABILITY_LIMIT: f64 = 0.1;

/// How the cloud equation is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CloudEquation {
    /// `ä = τ̃⁻¹ᵀ Ȧ + f cos(ω t)`.
    #[default]
    Coupled,
    /// Strong-drive approximation `ä = f cos(ω t)`: the back-action of the
    /// atoms on the cloud is dropped.
    Prescribed,
}

/// Composition scheme of the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Symmetric second-order splitting.
    Leapfrog,
    /// Triple-jump composition of the leapfrog, fourth order.
    #[default]
    TripleJump,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    /// Absolute end time, s.
    pub t_end: f64,
    /// Step, s.
    pub dt: f64,
    /// Record every `stride` steps (the initial and final states are always
    /// recorded).
    pub stride: usize,
    pub scheme: Scheme,
    pub cloud: CloudEquation,
}

impl IntegrationConfig {
    pub fn new(t_end: f64, dt: f64) -> IntegrationConfig {
        IntegrationConfig {
            t_end,
            dt,
            stride: 1,
            scheme: Scheme::default(),
            cloud: CloudEquation::default(),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> IntegrationConfig {
        self.stride = stride;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> IntegrationConfig {
        self.scheme = scheme;
        self
    }

    pub fn with_cloud(mut self, cloud: CloudEquation) -> IntegrationConfig {
        self.cloud = cloud;
        self
    }

    fn steps_from(&self, t0: f64) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        let span = self.t_end - t0;
        if !(span.is_finite() && span >= 0.0) {
            return Err(Error::invalid(
                "t_end",
                format!("{} precedes the initial time {t0}", self.t_end),
            ));
        }
        Ok((span / self.dt).round() as usize)
    }
}

/// One mode to integrate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProblem {
    /// Label carried into the trajectory (usually the grid index).
    pub k_index: usize,
    pub coefficients: ModeCoefficients,
    pub drive: Option<DriveSpec>,
    pub initial: ModeState,
}

/// Sampled history of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrack {
    pub k_index: usize,
    pub states: Vec<ModeState>,
    /// `E(t)` at each sample.
    pub energy: Vec<f64>,
    /// `P(t) = ȧ - τ̃⁻¹ᵀ A` at each sample.
    pub cloud_momentum: Vec<DVector<Complex64>>,
}

impl ModeTrack {
    /// `max_t |E(t) - E(0)| / E(0)`; zero when `E(0) = 0`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }

    /// `max_t |P(t) - P(0)| / |P(0)|`, falling back to the absolute change
    /// when `P(0) = 0`.
    pub fn momentum_drift(&self) -> f64 {
        let p0 = &self.cloud_momentum[0];
        let scale = if p0.norm() > 0.0 { p0.norm() } else { 1.0 };
        self.cloud_momentum
            .iter()
            .map(|p| (p - p0).norm() / scale)
            .fold(0.0, f64::max)
    }

    /// Real part of atom component `component` at every sample.
    pub fn atom_series(&self, component: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.atom[component].re).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Strictly increasing sample times, s.
    pub times: Vec<f64>,
    /// One track per mode, in input order.
    pub tracks: Vec<ModeTrack>,
}

impl TrajectoryRecord {
    pub fn max_energy_drift(&self) -> f64 {
        self.tracks
            .iter()
            .map(ModeTrack::energy_drift)
            .fold(0.0, f64::max)
    }

    pub fn max_momentum_drift(&self) -> f64 {
        self.tracks
            .iter()
            .map(ModeTrack::momentum_drift)
            .fold(0.0, f64::max)
    }
}

/// Integrates every mode from its initial state to `config.t_end`. Modes are
/// independent and run in parallel; tracks keep the input order.
pub fn integrate(
    problems: &[ModeProblem],
    damping: DampingSpec,
    config: &IntegrationConfig,
) -> Result<TrajectoryRecord> {
    let Some(first) = problems.first() else {
        return Ok(TrajectoryRecord {
            times: Vec::new(),
            tracks: Vec::new(),
        });
    };
    let t0 = first.initial.t;
    if let Some(other) = problems.iter().find(|p| p.initial.t != t0) {
        return Err(Error::invalid(
            "initial",
            format!(
                "all modes must start together (t = {t0} vs {})",
                other.initial.t
            ),
        ));
    }
    let steps = config.steps_from(t0)?;
    let tracks = problems
        .par_iter()
        .map(|p| integrate_mode(p, damping, config))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryRecord {
        times: sample_steps(steps, config.stride)
            .map(|i| t0 + i as f64 * config.dt)
            .collect(),
        tracks,
    })
}

fn sample_steps(steps: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..=steps).filter(move |&i| i % stride == 0 || i == steps)
}

/// Integrates a single mode.
pub fn integrate_mode(
    problem: &ModeProblem,
    damping: DampingSpec,
    config: &IntegrationConfig,
) -> Result<ModeTrack> {
    let coefficients = &problem.coefficients;
    let d = coefficients.dimension();
    problem.initial.check(d)?;
    DampingSpec::new(damping.eta)?;
    if let Some(drive) = &problem.drive {
        if drive.force.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: drive.force.len(),
            });
        }
    }
    let steps = config.steps_from(problem.initial.t)?;

    let drive_rate = problem
        .drive
        .as_ref()
        .filter(|drive| drive.is_active())
        .map_or(0.0, |drive| drive.omega);
    let rate = coefficients
        .max_frequency()
        .max(coefficients.coupling_rate())
        .max(drive_rate);
    let product = config.dt * rate;
    if product >= STABILITY_LIMIT {
        return Err(Error::StepSize {
            dt: config.dt,
            product,
        });
    }

    match d {
        1 => Ok(run::<1>(problem, damping, config, steps)),
        2 => Ok(run::<2>(problem, damping, config, steps)),
        3 => Ok(run::<3>(problem, damping, config, steps)),
        _ => Err(Error::invalid(
            "dimension",
            format!("unsupported mode dimension {d}"),
        )),
    }
}

/// Real and imaginary parts as the two columns.
type Pair<const D: usize> = SMatrix<f64, D, 2>;

struct Phase<const D: usize> {
    t: f64,
    atom: Pair<D>,
    atom_momentum: Pair<D>,
    cloud: Pair<D>,
    cloud_momentum: Pair<D>,
}

struct Flows<const D: usize> {
    v: SMatrix<f64, D, D>,
    tau: SMatrix<f64, D, D>,
    tau_t: SMatrix<f64, D, D>,
    force: Option<(SVector<f64, D>, f64)>,
    eta: f64,
    coupled: bool,
}

impl<const D: usize> Flows<D> {
    fn cloud_velocity(&self, ph: &Phase<D>) -> Pair<D> {
        if self.coupled {
            ph.cloud_momentum + self.tau_t * ph.atom
        } else {
            ph.cloud_momentum
        }
    }

    fn drift(&self, ph: &mut Phase<D>, h: f64) {
        ph.atom += ph.atom_momentum * h;
        ph.t += h;
    }

    fn kick(&self, ph: &mut Phase<D>, h: f64) {
        let y = self.cloud_velocity(ph);
        ph.atom_momentum -= (self.v * ph.atom + self.tau * y) * h;
        ph.cloud += y * h;
    }

    fn drive(&self, ph: &mut Phase<D>, h: f64) {
        if let Some((force, omega)) = &self.force {
            let mut re = ph.cloud_momentum.column_mut(0);
            re += force * (h * (omega * ph.t).cos());
        }
    }

    fn friction(&self, ph: &mut Phase<D>, decay: f64) {
        if self.eta > 0.0 {
            ph.atom_momentum *= decay;
        }
    }

    /// Symmetric second-order step; `decay = exp(-η h / 2)`.
    fn leapfrog(&self, ph: &mut Phase<D>, h: f64, decay: f64) {
        self.drift(ph, 0.5 * h);
        self.drive(ph, 0.5 * h);
        self.friction(ph, decay);
        self.kick(ph, h);
        self.friction(ph, decay);
        self.drive(ph, 0.5 * h);
        self.drift(ph, 0.5 * h);
    }
}

fn to_pair<const D: usize>(v: &DVector<Complex64>) -> Pair<D> {
    Pair::<D>::from_fn(|i, j| if j == 0 { v[i].re } else { v[i].im })
}

fn from_pair<const D: usize>(p: &Pair<D>) -> DVector<Complex64> {
    DVector::from_fn(D, |i, _| Complex64::new(p[(i, 0)], p[(i, 1)]))
}

fn to_static<const D: usize>(m: &DMatrix<f64>) -> SMatrix<f64, D, D> {
    SMatrix::<f64, D, D>::from_fn(|i, j| m[(i, j)])
}

fn run<const D: usize>(
    problem: &ModeProblem,
    damping: DampingSpec,
    config: &IntegrationConfig,
    steps: usize,
) -> ModeTrack {
    let coefficients = &problem.coefficients;
    let coupled = config.cloud == CloudEquation::Coupled;
    let flows = Flows::<D> {
        v: to_static(coefficients.v_tilde()),
        tau: to_static(coefficients.tau_tilde()),
        tau_t: to_static(&coefficients.tau_tilde().transpose()),
        force: problem
            .drive
            .as_ref()
            .filter(|d| d.is_active())
            .map(|d| (SVector::<f64, D>::from_fn(|i, _| d.force[i]), d.omega)),
        eta: damping.eta,
        coupled,
    };

    let init = &problem.initial;
    let atom = to_pair::<D>(&init.atom);
    let cloud_velocity = to_pair::<D>(&init.cloud_velocity);
    let mut ph = Phase::<D> {
        t: init.t,
        atom,
        atom_momentum: to_pair(&init.atom_velocity),
        cloud: to_pair(&init.cloud),
        cloud_momentum: if coupled {
            cloud_velocity - flows.tau_t * atom
        } else {
            cloud_velocity
        },
    };

    let dt = config.dt;
    let substeps: Vec<(f64, f64)> = match config.scheme {
        Scheme::Leapfrog => vec![dt],
        Scheme::TripleJump => {
            let cbrt2 = 2f64.cbrt();
            let outer = 1.0 / (2.0 - cbrt2);
            let inner = -cbrt2 / (2.0 - cbrt2);
            vec![outer * dt, inner * dt, outer * dt]
        }
    }
    .into_iter()
    .map(|h| (h, (-0.5 * damping.eta * h).exp()))
    .collect();

    let snapshot = |ph: &Phase<D>, t: f64| ModeState {
        t,
        atom: from_pair(&ph.atom),
        atom_velocity: from_pair(&ph.atom_momentum),
        cloud: from_pair(&ph.cloud),
        cloud_velocity: from_pair(&flows.cloud_velocity(ph)),
    };

    let samples = sample_steps(steps, config.stride).count();
    let mut track = ModeTrack {
        k_index: problem.k_index,
        states: Vec::with_capacity(samples),
        energy: Vec::with_capacity(samples),
        cloud_momentum: Vec::with_capacity(samples),
    };
    let mut record = |state: ModeState| {
        track.energy.push(energy(&state, coefficients));
        track
            .cloud_momentum
            .push(cloud_momentum(&state, coefficients));
        track.states.push(state);
    };

    record(snapshot(&ph, init.t));
    for step in 1..=steps {
        for &(h, decay) in &substeps {
            flows.leapfrog(&mut ph, h, decay);
        }
        // keep the clock free of accumulated round-off
        ph.t = init.t + step as f64 * dt;
        if step % config.stride == 0 || step == steps {
            record(snapshot(&ph, ph.t));
        }
    }
    track
}
