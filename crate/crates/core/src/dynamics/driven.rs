//! Steady-state response of a single-branch mode to the cloud drive.
//!
//! With the cloud driven by `f cos(ωt)`, the atom coordinate settles into
//! an oscillation at `ω` with amplitude `A⁰ = f (τ̃⁻¹/ω) / (Ω² - ω²)`, where
//! `Ω² = Ṽ + (τ̃⁻¹)²` is the branch frequency. Friction `η` on the atom
//! coordinate regularises the pole:
//! `|A⁰| = |f| (|τ̃⁻¹|/ω) / √((Ω² - ω²)² + η²ω²)`.

use nalgebra::{Matrix3, Vector3};

use super::{DampingSpec, DriveSpec, ModeCoefficients};
use crate::error::{require_positive, Error, Result};

fn scalar_mode(coefficients: &ModeCoefficients) -> Result<(f64, f64)> {
    coefficients
        .as_scalar()
        .ok_or_else(|| Error::invalid("coefficients", "steady state needs a single-branch mode"))
}

/// `A⁰` of a driven single-branch mode.
///
/// Without friction the signed value is returned and `ω = Ω` is an error;
/// with friction the magnitude is returned.
pub fn steady_state_amplitude(
    coefficients: &ModeCoefficients,
    drive: &DriveSpec,
    damping: DampingSpec,
) -> Result<f64> {
    let (v, tau) = scalar_mode(coefficients)?;
    let force = match drive.force.as_slice() {
        [f] => *f,
        other => {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: other.len(),
            })
        }
    };
    let omega = require_positive("omega", drive.omega)?;
    DampingSpec::new(damping.eta)?;
    let detuning = v + tau * tau - omega * omega;
    if damping.eta == 0.0 {
        if detuning == 0.0 {
            return Err(Error::ExactResonance { omega });
        }
        Ok(force * (tau / omega) / detuning)
    } else {
        let denominator = (detuning * detuning + (damping.eta * omega).powi(2)).sqrt();
        Ok((force * tau).abs() / omega / denominator)
    }
}

/// Linear frequency grid, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl OmegaRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<OmegaRange> {
        require_positive("omega_min", min)?;
        require_positive("omega_max", max)?;
        if max <= min {
            return Err(Error::invalid("omega_max", "must exceed omega_min"));
        }
        if steps < 2 {
            return Err(Error::invalid("omega_steps", "need at least 2 points"));
        }
        Ok(OmegaRange { min, max, steps })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.step();
        (0..self.steps).map(move |i| {
            if i + 1 == self.steps {
                self.max
            } else {
                self.min + i as f64 * step
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceCurve {
    /// `(ω, |A⁰|)` pairs in grid order.
    pub points: Vec<(f64, f64)>,
    /// Index of the first maximum.
    pub peak_index: usize,
}

impl ResonanceCurve {
    pub fn peak(&self) -> (f64, f64) {
        self.points[self.peak_index]
    }
}

/// `|A⁰(ω)|` over `range`. Friction must be positive so that the grid
/// cannot land on the pole.
pub fn resonance_sweep(
    coefficients: &ModeCoefficients,
    force: f64,
    range: &OmegaRange,
    damping: DampingSpec,
) -> Result<ResonanceCurve> {
    if !(damping.eta > 0.0 && damping.eta.is_finite()) {
        return Err(Error::invalid(
            "eta",
            "resonance sweep needs positive friction",
        ));
    }
    OmegaRange::new(range.min, range.max, range.steps)?;
    let points = range
        .values()
        .map(|omega| {
            let drive = DriveSpec::scalar(force, omega)?;
            Ok((
                omega,
                steady_state_amplitude(coefficients, &drive, damping)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let peak_index = points.iter().enumerate().fold(
        0,
        |best, (i, p)| if p.1 > points[best].1 { i } else { best },
    );
    Ok(ResonanceCurve { points, peak_index })
}

/// Amplitude of the `ω` component of a sampled signal: least-squares fit of
/// `c + a cos(ωt) + b sin(ωt)`, returning `√(a² + b²)`.
pub fn drive_amplitude(times: &[f64], values: &[f64], omega: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    if times.len() < 3 {
        return Err(Error::invalid("times", "need at least 3 samples"));
    }
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let (s, c) = (omega * t).sin_cos();
        let basis = Vector3::new(1.0, c, s);
        normal += basis * basis.transpose();
        rhs += basis * y;
    }
    let fit = normal
        .cholesky()
        .ok_or_else(|| Error::invalid("times", "samples do not resolve the frequency"))?
        .solve(&rhs);
    Ok(fit[1].hypot(fit[2]))
}
