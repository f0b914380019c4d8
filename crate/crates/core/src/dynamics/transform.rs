//! Conversion between site displacements and collective amplitudes,
//! `ξ_n = (1/√(NM)) Σ_k A_k e^{ik·n}` and its inverse
//! `A_k = √(M/N) Σ_n ξ_n e^{-ik·n}`, on the grid commensurate with the
//! periodic box.

use num_complex::Complex64;

use crate::dispersion::KGrid;
use crate::error::{Error, Result};
use crate::lattice_model::LatticeSpec;

/// Relative tolerance on `A_k = conj(A_{-k})` and on the imaginary part of
/// reconstructed displacements.
pub const REALITY_TOLERANCE: f64 = 1e-10;

fn check_grid(grid: &KGrid, spec: &LatticeSpec) -> Result<()> {
    if grid.points_per_axis() != spec.n_sites() {
        return Err(Error::invalid(
            "grid",
            format!(
                "grid {:?} does not match the periodic box {:?}",
                grid.points_per_axis(),
                spec.n_sites()
            ),
        ));
    }
    Ok(())
}

fn phase(grid: &KGrid, k_index: usize, position: &[f64]) -> f64 {
    grid.point(k_index)
        .k
        .components()
        .iter()
        .zip(position)
        .map(|(k, r)| k * r)
        .sum()
}

/// `max_k |A_k - conj(A_{-k})| / max_k |A_k|` (zero for an all-zero list).
pub fn reality_residual(amplitudes: &[Complex64], grid: &KGrid) -> Result<f64> {
    if amplitudes.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: amplitudes.len(),
        });
    }
    let scale = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = (0..grid.len())
        .map(|i| (amplitudes[i] - amplitudes[grid.partner(i)].conj()).norm())
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Collective amplitudes of a real displacement field given per site (flat
/// site order of `spec`), in the order of the natural grid.
pub fn collective_amplitudes(field: &[f64], spec: &LatticeSpec) -> Result<Vec<Complex64>> {
    let n = spec.total_sites();
    if field.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: field.len(),
        });
    }
    let grid = KGrid::natural(spec);
    let norm = (spec.atom_mass() / n as f64).sqrt();
    let positions: Vec<Vec<f64>> = (0..n).map(|i| spec.position(&spec.site(i))).collect();
    Ok((0..grid.len())
        .map(|k| {
            let sum: Complex64 = field
                .iter()
                .zip(&positions)
                .map(|(&xi, r)| Complex64::from_polar(xi, -phase(&grid, k, r)))
                .sum();
            sum * norm
        })
        .collect())
}

/// Displacement of `site` (m) from amplitudes on the natural grid.
pub fn real_space_displacement(
    amplitudes: &[Complex64],
    grid: &KGrid,
    spec: &LatticeSpec,
    site: &[usize],
) -> Result<f64> {
    check_grid(grid, spec)?;
    if site.len() != spec.dimension() || site.iter().zip(spec.n_sites()).any(|(i, n)| i >= n) {
        return Err(Error::invalid(
            "site",
            format!("{site:?} outside the lattice"),
        ));
    }
    let residual = reality_residual(amplitudes, grid)?;
    if residual > REALITY_TOLERANCE {
        return Err(Error::RealityViolation { residual });
    }
    displacement_unchecked(amplitudes, grid, spec, site)
}

fn displacement_unchecked(
    amplitudes: &[Complex64],
    grid: &KGrid,
    spec: &LatticeSpec,
    site: &[usize],
) -> Result<f64> {
    let position = spec.position(site);
    let norm = 1.0 / (spec.total_sites() as f64 * spec.atom_mass()).sqrt();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (k, a) in amplitudes.iter().enumerate() {
        sum += a * Complex64::from_polar(1.0, phase(grid, k, &position));
        scale += a.norm();
    }
    if sum.im.abs() > REALITY_TOLERANCE * scale {
        return Err(Error::RealityViolation {
            residual: sum.im.abs() / scale,
        });
    }
    Ok(sum.re * norm)
}

/// Displacements of every site, flat site order.
pub fn real_space_field(
    amplitudes: &[Complex64],
    grid: &KGrid,
    spec: &LatticeSpec,
) -> Result<Vec<f64>> {
    check_grid(grid, spec)?;
    let residual = reality_residual(amplitudes, grid)?;
    if residual > REALITY_TOLERANCE {
        return Err(Error::RealityViolation { residual });
    }
    (0..spec.total_sites())
        .map(|i| displacement_unchecked(amplitudes, grid, spec, &spec.site(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> LatticeSpec {
        LatticeSpec::new(1, &[8], 1.0, 2.0, 0.002).unwrap()
    }

    #[test]
    fn conjugate_pair() {
        let spec = spec();
        let grid = KGrid::natural(&spec);
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        // labels -3..=4, index 5 is j = 2, its partner index 1 is j = -2
        amps[5] = Complex64::new(0.7, 0.0);
        amps[1] = Complex64::new(0.7, 0.0);
        let k = 2.0 * PI * 2.0 / 8.0;
        for n in 0..8 {
            let xi = real_space_displacement(&amps, &grid, &spec, &[n]).unwrap();
            let expected = 2.0 * 0.7 * (k * n as f64).cos() / (8.0f64 * 2.0).sqrt();
            assert_relative_eq!(xi, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_amplitudes() {
        let spec = spec();
        let grid = KGrid::natural(&spec);
        let amps = vec![Complex64::new(0.0, 0.0); 8];
        assert_eq!(real_space_field(&amps, &grid, &spec).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn one_sided_list_is_rejected() {
        let spec = spec();
        let grid = KGrid::natural(&spec);
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[5] = Complex64::new(0.7, 0.0);
        for n in 0..8 {
            assert!(matches!(
                real_space_displacement(&amps, &grid, &spec, &[n]),
                Err(Error::RealityViolation { .. })
            ));
        }
        assert!(real_space_displacement(&amps[..7], &grid, &spec, &[0]).is_err());
    }

    #[test]
    fn round_trip_two_dimensional() {
        let spec = LatticeSpec::new(2, &[4, 5], 3e-10, 5e-26, 5e-29).unwrap();
        let field: Vec<f64> = (0..20)
            .map(|i| ((i * 7) % 11) as f64 * 1e-12 - 4e-12)
            .collect();
        let amps = collective_amplitudes(&field, &spec).unwrap();
        let grid = KGrid::natural(&spec);
        assert!(reality_residual(&amps, &grid).unwrap() < 1e-13);
        let back = real_space_field(&amps, &grid, &spec).unwrap();
        for (a, b) in field.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12 * 4e-12);
        }
    }

    #[test]
    fn grid_must_match_box() {
        let spec = spec();
        let grid = KGrid::new(&[16], 1.0).unwrap();
        let amps = vec![Complex64::new(0.0, 0.0); 16];
        assert!(real_space_displacement(&amps, &grid, &spec, &[0]).is_err());
    }
}
