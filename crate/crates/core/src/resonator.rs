//! Resonator geometry and spectral-window calculators.
//!
//! A wave front crossing the Earth along a diameter and back covers
//! `L_rad = 4R`; one running round the equator covers `L_tan = 2πR`. A
//! body whose horizontal (West-East) and vertical dimensions keep the same
//! ratio `π/2` is treated as a resonator for those waves.

use std::f64::consts::FRAC_PI_2;

use crate::error::{require_positive, Error, Result};

/// Default relative tolerance for [`check_geometry`].
pub const DEFAULT_GEOMETRY_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorGeometry {
    /// Horizontal West-East dimension, m.
    pub l_tan: f64,
    /// Vertical dimension, m.
    pub l_rad: f64,
    pub ratio: f64,
    /// `|ratio - π/2| / (π/2)`.
    pub ratio_deviation: f64,
}

impl ResonatorGeometry {
    pub fn new(l_tan: f64, l_rad: f64) -> Result<ResonatorGeometry> {
        require_positive("l_tan", l_tan)?;
        require_positive("l_rad", l_rad)?;
        let ratio = l_tan / l_rad;
        Ok(ResonatorGeometry {
            l_tan,
            l_rad,
            ratio,
            ratio_deviation: (ratio - FRAC_PI_2).abs() / FRAC_PI_2,
        })
    }
}

/// Path lengths `(L_tan, L_rad, L_tan/L_rad)` for a sphere of radius `R`.
/// The ratio is returned as exactly `π/2`.
pub fn earth_path_lengths(radius: f64) -> Result<(f64, f64, f64)> {
    require_positive("R", radius)?;
    Ok((2.0 * std::f64::consts::PI * radius, 4.0 * radius, FRAC_PI_2))
}

/// Crossing times `(L_tan/c, L_rad/c)`, s.
pub fn travel_times(l_tan: f64, l_rad: f64, speed: f64) -> Result<(f64, f64)> {
    require_positive("L_tan", l_tan)?;
    require_positive("L_rad", l_rad)?;
    require_positive("c", speed)?;
    Ok((l_tan / speed, l_rad / speed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryCheck {
    pub geometry: ResonatorGeometry,
    pub tolerance: f64,
    pub passed: bool,
}

/// Passes iff the ratio deviates from `π/2` by at most `tolerance`
/// (relative). `tolerance` must lie in `(0, 1)`.
pub fn check_geometry(l_tan: f64, l_rad: f64, tolerance: f64) -> Result<GeometryCheck> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::invalid(
            "tolerance",
            format!("must lie in (0, 1), got {tolerance}"),
        ));
    }
    let geometry = ResonatorGeometry::new(l_tan, l_rad)?;
    Ok(GeometryCheck {
        geometry,
        tolerance,
        passed: geometry.ratio_deviation <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    /// m
    pub lambda_min: f64,
    /// m
    pub lambda_max: f64,
    /// Hz
    pub nu_min: f64,
    /// Hz
    pub nu_max: f64,
}

/// Band bounded below by `c/ν_Debye` and above by the resonator size.
pub fn spectral_window(nu_debye: f64, l_max: f64, speed: f64) -> Result<SpectralWindow> {
    require_positive("nu_debye", nu_debye)?;
    require_positive("l_max", l_max)?;
    require_positive("c", speed)?;
    let lambda_min = speed / nu_debye;
    if lambda_min >= l_max {
        return Err(Error::EmptyWindow {
            lambda_min,
            lambda_max: l_max,
        });
    }
    Ok(SpectralWindow {
        lambda_min,
        lambda_max: l_max,
        nu_min: speed / l_max,
        nu_max: nu_debye,
    })
}

/// `(n, l_tan/n, l_rad/n)` for `n = 1..=n_max`.
pub fn harmonic_lengths(base: &ResonatorGeometry, n_max: usize) -> Vec<(usize, f64, f64)> {
    (1..=n_max)
        .map(|n| (n, base.l_tan / n as f64, base.l_rad / n as f64))
        .collect()
}
