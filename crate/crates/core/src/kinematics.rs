//! Closed-form particle and cloud kinematics.
//!
//! A particle moving at `v0` carries a de Broglie wavelength `λ = h/(M v0)`
//! and a cloud of amplitude `Λ` fixed by `v0/λ = c/Λ`, so that
//! `Λ = h c / (M v0²)`.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};
use crate::lattice_model::PhysicalConstants;

/// Temperature used for the room-temperature estimates, K.
pub const ROOM_TEMPERATURE: f64 = 293.0;

/// Earth's orbital speed, m/s.
pub const EARTH_ORBITAL_SPEED: f64 = 3.0e4;

/// Length of a day, s.
pub const DAY: f64 = 86_400.0;

/// Representative atom mass of terrestrial matter, in proton masses.
pub const EARTH_ATOM_MASS_RATIO: f64 = 30.0;

/// Speed at which kinetic energy `M v0²/2` equals `k_B T`, m/s.
pub fn thermal_velocity(mass: f64, temperature: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("temperature", temperature)?;
    Ok((2.0 * constants.boltzmann * temperature / mass).sqrt())
}

/// `λ = h / (M v0)`, m.
pub fn de_broglie_wavelength(
    mass: f64,
    velocity: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("velocity", velocity)?;
    Ok(constants.planck / (mass * velocity))
}

/// Cloud amplitude `Λ = λ c / v0`, m.
pub fn cloud_amplitude(
    velocity: f64,
    wavelength: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_positive("velocity", velocity)?;
    if velocity >= constants.speed_of_light {
        return Err(Error::Superluminal { velocity });
    }
    if !(wavelength.is_finite() && wavelength >= 0.0) {
        return Err(Error::invalid(
            "wavelength",
            format!("must be non-negative, got {wavelength}"),
        ));
    }
    Ok(wavelength * constants.speed_of_light / velocity)
}

/// `Λ / g0`.
pub fn overlap_ratio(amplitude: f64, lattice_constant: f64) -> Result<f64> {
    require_positive("Lambda", amplitude)?;
    require_positive("g0", lattice_constant)?;
    Ok(amplitude / lattice_constant)
}

/// Kinematic parameters of one particle and its cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudKinematics {
    /// kg
    pub mass: f64,
    /// K, when the velocity came from a temperature.
    pub temperature: Option<f64>,
    /// m/s
    pub velocity: f64,
    /// de Broglie wavelength, m.
    pub wavelength: f64,
    /// Cloud amplitude, m.
    pub amplitude: f64,
    /// `Λ/g0`, when a lattice constant was supplied.
    pub overlap: Option<f64>,
}

impl CloudKinematics {
    pub fn from_velocity(
        mass: f64,
        velocity: f64,
        lattice_constant: Option<f64>,
        constants: &PhysicalConstants,
    ) -> Result<CloudKinematics> {
        let wavelength = de_broglie_wavelength(mass, velocity, constants)?;
        let amplitude = cloud_amplitude(velocity, wavelength, constants)?;
        let overlap = lattice_constant
            .map(|g0| overlap_ratio(amplitude, g0))
            .transpose()?;
        Ok(CloudKinematics {
            mass,
            temperature: None,
            velocity,
            wavelength,
            amplitude,
            overlap,
        })
    }

    /// Uses the thermal velocity at `temperature`.
    pub fn from_temperature(
        mass: f64,
        temperature: f64,
        lattice_constant: Option<f64>,
        constants: &PhysicalConstants,
    ) -> Result<CloudKinematics> {
        let velocity = thermal_velocity(mass, temperature, constants)?;
        let mut out = CloudKinematics::from_velocity(mass, velocity, lattice_constant, constants)?;
        out.temperature = Some(temperature);
        Ok(out)
    }

    /// Enveloping amplitude `Λ/π`.
    pub fn enveloping_amplitude(&self) -> f64 {
        self.amplitude / PI
    }

    /// Transverse extent of the cloud, `2Λ/π`.
    pub fn transverse_extent(&self) -> f64 {
        2.0 * self.amplitude / PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    /// Orbital motion around the Sun.
    Orbital,
    /// Rotation, evaluated at the equator.
    Rotational,
}

/// One of the two stationary flows carried by the Earth's motion.
#[derive(Debug, Clone, PartialEq)]
pub struct EarthFlowSpec {
    pub kind: FlowKind,
    /// m/s
    pub velocity: f64,
    /// m
    pub wavelength: f64,
    /// m
    pub amplitude: f64,
}

/// Orbital (`3×10⁴ m/s`) and equatorial rotational (`2πR/day`) flows for
/// atoms of mass `30 M_p`.
pub fn earth_flows(constants: &PhysicalConstants) -> [EarthFlowSpec; 2] {
    let mass = EARTH_ATOM_MASS_RATIO * constants.proton_mass;
    let flow = |kind, velocity| {
        let k = CloudKinematics::from_velocity(mass, velocity, None, constants)
            .expect("Earth flow speeds are positive and subluminal");
        EarthFlowSpec {
            kind,
            velocity,
            wavelength: k.wavelength,
            amplitude: k.amplitude,
        }
    };
    [
        flow(FlowKind::Orbital, EARTH_ORBITAL_SPEED),
        flow(
            FlowKind::Rotational,
            2.0 * PI * constants.earth_radius / DAY,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn atom() -> f64 {
        30.0 * consts().proton_mass
    }

    #[test]
    fn room_temperature_velocity() {
        let v = thermal_velocity(atom(), ROOM_TEMPERATURE, &consts()).unwrap();
        assert!((v - 4.0e2).abs() / 4.0e2 < 0.05, "{v}");
        let v4 = thermal_velocity(atom(), 4.0 * ROOM_TEMPERATURE, &consts()).unwrap();
        assert_relative_eq!(v4, 2.0 * v, max_relative = 1e-15);
        assert!(thermal_velocity(0.0, 293.0, &consts()).is_err());
        assert!(thermal_velocity(atom(), -1.0, &consts()).is_err());
    }

    #[test]
    fn wavelengths() {
        let lambda = de_broglie_wavelength(atom(), 4.0e2, &consts()).unwrap();
        assert!((lambda - 3.3e-11).abs() / 3.3e-11 < 0.05, "{lambda}");
        let lambda1 = de_broglie_wavelength(atom(), 3.0e4, &consts()).unwrap();
        assert!((lambda1 - 4e-13).abs() / 4e-13 < 0.15, "{lambda1}");
        let doubled = de_broglie_wavelength(atom(), 8.0e2, &consts()).unwrap();
        assert_relative_eq!(doubled, lambda / 2.0, max_relative = 1e-15);
        assert!(de_broglie_wavelength(atom(), 0.0, &consts()).is_err());
    }

    #[test]
    fn amplitudes() {
        let big = cloud_amplitude(4.0e2, 3.3e-11, &consts()).unwrap();
        assert!((big - 2.4e-5).abs() / 2.4e-5 < 0.05, "{big}");
        assert_eq!(cloud_amplitude(4.0e2, 0.0, &consts()).unwrap(), 0.0);
        let c = consts().speed_of_light;
        assert!(matches!(
            cloud_amplitude(c, 1.0, &consts()),
            Err(Error::Superluminal { .. })
        ));
    }

    #[test]
    fn overlap() {
        let r = overlap_ratio(2.4e-5, 4e-10).unwrap();
        assert_relative_eq!(r, 6.0e4, max_relative = 1e-12);
        assert_eq!(overlap_ratio(4e-10, 4e-10).unwrap(), 1.0);
        assert!(overlap_ratio(0.0, 4e-10).is_err());
    }

    #[test]
    fn earth_flow_values() {
        let [orbital, rotational] = earth_flows(&consts());
        assert_eq!(orbital.kind, FlowKind::Orbital);
        assert!((rotational.velocity - 462.0).abs() / 462.0 < 0.01);
        assert!((orbital.wavelength - 4e-13).abs() / 4e-13 < 0.15);
        assert!(rotational.amplitude > orbital.amplitude);
        let ratio = overlap_ratio(rotational.amplitude, 4e-10).unwrap();
        assert!((1e4..1e5).contains(&ratio));
    }

    #[test]
    fn enveloping_and_transverse_sizes() {
        let k = CloudKinematics::from_velocity(atom(), 400.0, Some(4e-10), &consts()).unwrap();
        assert_relative_eq!(k.enveloping_amplitude() * PI, k.amplitude);
        assert_relative_eq!(k.transverse_extent(), 2.0 * k.enveloping_amplitude());
        assert!(k.overlap.unwrap() > 1e4);
    }

    proptest! {
        #[test]
        fn velocity_amplitude_identity(ratio in 1.0f64..300.0, v in 1.0f64..1e7) {
            let c = consts();
            let k = CloudKinematics::from_velocity(ratio * c.proton_mass, v, None, &c).unwrap();
            let lhs = k.velocity * k.amplitude;
            let rhs = c.speed_of_light * k.wavelength;
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs);
            let closed = c.planck * c.speed_of_light / (k.mass * v * v);
            prop_assert!((k.amplitude - closed).abs() <= 1e-12 * closed);
        }

        #[test]
        fn monotone_in_velocity_and_mass(m in 1e-27f64..1e-24, v in 1.0f64..1e6, f in 1.001f64..10.0) {
            let c = consts();
            let slow = CloudKinematics::from_velocity(m, v, None, &c).unwrap();
            let fast = CloudKinematics::from_velocity(m, v * f, None, &c).unwrap();
            prop_assert!(fast.amplitude < slow.amplitude);
            let heavy = de_broglie_wavelength(m * f, v, &c).unwrap();
            prop_assert!(heavy < slow.wavelength);
        }
    }
}
