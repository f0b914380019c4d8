//! Time evolution of the collective coordinates.
//!
//! Each wavevector carries an atom coordinate `A` and a cloud coordinate `a`
//! (complex, `dimension`-component vectors in matrix mode, scalars in the
//! default branch mode). Their equations of motion are
//!
//! ```text
//! Ä = -Ṽ A - τ̃⁻¹ ȧ - η Ȧ
//! ä = τ̃⁻¹ᵀ Ȧ + f cos(ω t)
//! ```
//!
//! Without drive and friction the energy
//! `E = ½|Ȧ|² + ½|ȧ|² + ½ A†ṼA` and the cloud momentum `P = ȧ - τ̃⁻¹ᵀ A`
//! are conserved; the coupling is gyroscopic and does no work.

mod driven;
mod integrator;
mod transform;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::dispersion::{dispersion_at, fourier_matrices, KGrid};
use crate::error::{Error, Result};
use crate::lattice_model::{scalar_part, Model};

pub use driven::{
    drive_amplitude, resonance_sweep, steady_state_amplitude, OmegaRange, ResonanceCurve,
};
pub use integrator::{
    integrate, integrate_mode, CloudEquation, IntegrationConfig, ModeProblem, ModeTrack, Scheme,
    TrajectoryRecord, STABILITY_LIMIT,
};
pub use transform::{
    collective_amplitudes, real_space_displacement, real_space_field, reality_residual,
    REALITY_TOLERANCE,
};

/// Per-mode coefficients `Ṽ(k)` (1/s²) and `τ̃⁻¹(k)` (1/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    v_tilde: DMatrix<f64>,
    tau_tilde: DMatrix<f64>,
}

impl ModeCoefficients {
    /// A single branch: `Ṽ` is that branch's uncoupled `Ω²`.
    pub fn scalar(v_tilde: f64, tau_tilde: f64) -> ModeCoefficients {
        ModeCoefficients {
            v_tilde: DMatrix::from_element(1, 1, v_tilde),
            tau_tilde: DMatrix::from_element(1, 1, tau_tilde),
        }
    }

    /// Full matrix mode. `v_tilde` must be symmetric.
    pub fn matrix(v_tilde: DMatrix<f64>, tau_tilde: DMatrix<f64>) -> Result<ModeCoefficients> {
        let d = v_tilde.nrows();
        if !(1..=3).contains(&d) {
            return Err(Error::invalid("v_tilde", "dimension must be 1, 2 or 3"));
        }
        for m in [&v_tilde, &tau_tilde] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        let asymmetry = (&v_tilde - v_tilde.transpose()).amax();
        if asymmetry > 1e-12 * v_tilde.amax() {
            return Err(Error::Asymmetry {
                residual: asymmetry,
            });
        }
        Ok(ModeCoefficients { v_tilde, tau_tilde })
    }

    pub fn dimension(&self) -> usize {
        self.v_tilde.nrows()
    }

    pub fn v_tilde(&self) -> &DMatrix<f64> {
        &self.v_tilde
    }

    pub fn tau_tilde(&self) -> &DMatrix<f64> {
        &self.tau_tilde
    }

    /// `(Ṽ, τ̃⁻¹)` of a single-branch mode.
    pub fn as_scalar(&self) -> Option<(f64, f64)> {
        (self.dimension() == 1).then(|| (self.v_tilde[(0, 0)], self.tau_tilde[(0, 0)]))
    }

    /// Matrix governing `A` once the cloud momentum is eliminated:
    /// `Ṽ + τ̃⁻¹ τ̃⁻¹ᵀ`.
    pub fn effective_matrix(&self) -> DMatrix<f64> {
        &self.v_tilde + &self.tau_tilde * self.tau_tilde.transpose()
    }

    /// Largest free-oscillation frequency, rad/s.
    pub fn max_frequency(&self) -> f64 {
        if let Some((v, t)) = self.as_scalar() {
            return (v + t * t).max(0.0).sqrt();
        }
        let w = self.effective_matrix();
        SymmetricEigen::new((&w + w.transpose()) * 0.5)
            .eigenvalues
            .max()
            .max(0.0)
            .sqrt()
    }

    /// Largest singular value of `τ̃⁻¹`, 1/s.
    pub fn coupling_rate(&self) -> f64 {
        if let Some((_, t)) = self.as_scalar() {
            return t.abs();
        }
        self.tau_tilde.singular_values().max()
    }
}

/// Which coordinates each wavevector contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    /// One scalar mode per wavevector, projected on branch `s` (ascending
    /// frequency order). Requires isotropic scalar coupling.
    Branch(usize),
    /// The full `dimension`-component equations.
    Matrix,
}

impl Default for ModeSelection {
    fn default() -> Self {
        ModeSelection::Branch(0)
    }
}

/// Mode coefficients for every point of `grid`, in grid order.
pub fn mode_coefficients(
    model: &Model,
    grid: &KGrid,
    selection: ModeSelection,
) -> Result<Vec<ModeCoefficients>> {
    grid.iter()
        .map(|point| {
            let at = |e: Error| Error::AtWaveVector {
                k_index: point.index,
                k: point.k.components().to_vec(),
                source: Box::new(e),
            };
            match selection {
                ModeSelection::Matrix => {
                    let fm = fourier_matrices(model, &point.k).map_err(at)?;
                    ModeCoefficients::matrix(fm.v_tilde, fm.tau_tilde).map_err(at)
                }
                ModeSelection::Branch(s) => {
                    let row = dispersion_at(model, point.index, &point.k, &Default::default())
                        .map_err(at)?;
                    if s >= row.omegas.len() {
                        return Err(at(Error::invalid(
                            "branch",
                            format!("branch {s} out of range (dimension {})", row.omegas.len()),
                        )));
                    }
                    let tau = scalar_part(&row.fourier.tau_tilde).ok_or_else(|| {
                        at(Error::invalid(
                            "coupling",
                            "branch mode needs isotropic coupling",
                        ))
                    })?;
                    let e = row.polarizations.column(s);
                    let v = e.dot(&(&row.fourier.v_tilde * e));
                    Ok(ModeCoefficients::scalar(v, tau))
                }
            }
        })
        .collect()
}

/// Collective coordinates of one mode at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    /// s
    pub t: f64,
    /// `A`, kg^½ m.
    pub atom: DVector<Complex64>,
    pub atom_velocity: DVector<Complex64>,
    /// `a`, kg^½ m.
    pub cloud: DVector<Complex64>,
    pub cloud_velocity: DVector<Complex64>,
}

impl ModeState {
    pub fn at_rest(dimension: usize, t: f64) -> ModeState {
        let zero = DVector::zeros(dimension);
        ModeState {
            t,
            atom: zero.clone(),
            atom_velocity: zero.clone(),
            cloud: zero.clone(),
            cloud_velocity: zero,
        }
    }

    /// Single-component state.
    pub fn scalar(
        t: f64,
        atom: Complex64,
        atom_velocity: Complex64,
        cloud: Complex64,
        cloud_velocity: Complex64,
    ) -> ModeState {
        let v = |z| DVector::from_element(1, z);
        ModeState {
            t,
            atom: v(atom),
            atom_velocity: v(atom_velocity),
            cloud: v(cloud),
            cloud_velocity: v(cloud_velocity),
        }
    }

    /// Atom coordinates as given, `a = 0` and `ȧ = τ̃⁻¹ᵀ A`, so that the
    /// cloud momentum (the integration constant of the reduced atom
    /// equation) vanishes.
    pub fn with_zero_cloud_momentum(
        coefficients: &ModeCoefficients,
        t: f64,
        atom: DVector<Complex64>,
        atom_velocity: DVector<Complex64>,
    ) -> ModeState {
        let cloud_velocity = real_mul(&coefficients.tau_tilde.transpose(), &atom);
        ModeState {
            t,
            cloud: DVector::zeros(atom.len()),
            atom,
            atom_velocity,
            cloud_velocity,
        }
    }

    pub fn dimension(&self) -> usize {
        self.atom.len()
    }

    fn check(&self, dimension: usize) -> Result<()> {
        for v in [
            &self.atom,
            &self.atom_velocity,
            &self.cloud,
            &self.cloud_velocity,
        ] {
            if v.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// External drive `f cos(ω t)` on the cloud equation.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    /// `f`, one real component per coordinate.
    pub force: DVector<f64>,
    /// `ω`, rad/s.
    pub omega: f64,
}

impl DriveSpec {
    pub fn new(force: DVector<f64>, omega: f64) -> Result<DriveSpec> {
        let active = force.iter().any(|&f| f != 0.0);
        if force.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("force", "non-finite drive amplitude"));
        }
        if active && !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(
                "omega",
                format!("drive frequency must be positive, got {omega}"),
            ));
        }
        Ok(DriveSpec { force, omega })
    }

    pub fn scalar(force: f64, omega: f64) -> Result<DriveSpec> {
        DriveSpec::new(DVector::from_element(1, force), omega)
    }

    pub fn is_active(&self) -> bool {
        self.force.iter().any(|&f| f != 0.0)
    }
}

/// Friction `η` (1/s) acting on the atom coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DampingSpec {
    pub eta: f64,
}

impl DampingSpec {
    pub const NONE: DampingSpec = DampingSpec { eta: 0.0 };

    pub fn new(eta: f64) -> Result<DampingSpec> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::invalid(
                "eta",
                format!("must be non-negative, got {eta}"),
            ));
        }
        Ok(DampingSpec { eta })
    }
}

/// Time derivative of a [`ModeState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub atom_velocity: DVector<Complex64>,
    pub atom_acceleration: DVector<Complex64>,
    pub cloud_velocity: DVector<Complex64>,
    pub cloud_acceleration: DVector<Complex64>,
}

fn real_mul(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(m.nrows(), |i, _| {
        (0..m.ncols()).map(|j| v[j] * m[(i, j)]).sum()
    })
}

/// Right-hand side of the equations of motion.
pub fn derivatives(
    state: &ModeState,
    coefficients: &ModeCoefficients,
    drive: Option<&DriveSpec>,
    damping: DampingSpec,
) -> Result<StateDerivative> {
    let d = coefficients.dimension();
    state.check(d)?;
    let atom_acceleration = -real_mul(&coefficients.v_tilde, &state.atom)
        - real_mul(&coefficients.tau_tilde, &state.cloud_velocity)
        - state.atom_velocity.map(|z| z * damping.eta);
    let mut cloud_acceleration =
        real_mul(&coefficients.tau_tilde.transpose(), &state.atom_velocity);
    if let Some(drive) = drive {
        if drive.force.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: drive.force.len(),
            });
        }
        let phase = (drive.omega * state.t).cos();
        for (acc, f) in cloud_acceleration.iter_mut().zip(drive.force.iter()) {
            *acc += f * phase;
        }
    }
    Ok(StateDerivative {
        atom_velocity: state.atom_velocity.clone(),
        atom_acceleration,
        cloud_velocity: state.cloud_velocity.clone(),
        cloud_acceleration,
    })
}

/// `E = ½|Ȧ|² + ½|ȧ|² + ½ Re(A† Ṽ A)`.
pub fn energy(state: &ModeState, coefficients: &ModeCoefficients) -> f64 {
    let potential: f64 = state
        .atom
        .iter()
        .zip(real_mul(&coefficients.v_tilde, &state.atom).iter())
        .map(|(a, va)| (a.conj() * va).re)
        .sum();
    0.5 * (state.atom_velocity.norm_squared() + state.cloud_velocity.norm_squared() + potential)
}

/// `P = ȧ - τ̃⁻¹ᵀ A`.
pub fn cloud_momentum(state: &ModeState, coefficients: &ModeCoefficients) -> DVector<Complex64> {
    &state.cloud_velocity - real_mul(&coefficients.tau_tilde.transpose(), &state.atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_model::{build_chain_1d, PROTON_MASS};
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn decoupled_oscillator() {
        let state = ModeState::scalar(0.0, c(1.0), c(0.0), c(0.0), c(0.0));
        let d = derivatives(
            &state,
            &ModeCoefficients::scalar(4.0, 0.0),
            None,
            DampingSpec::NONE,
        )
        .unwrap();
        assert_eq!(d.atom_acceleration[0], c(-4.0));
        assert_eq!(d.cloud_acceleration[0], c(0.0));
    }

    #[test]
    fn coupling_drives_cloud() {
        let state = ModeState::scalar(0.0, c(0.0), c(2.0), c(0.0), c(0.0));
        let d = derivatives(
            &state,
            &ModeCoefficients::scalar(0.0, 3.0),
            None,
            DampingSpec::NONE,
        )
        .unwrap();
        assert_eq!(d.cloud_acceleration[0], c(6.0));
        assert_eq!(d.atom_velocity[0], c(2.0));
    }

    #[test]
    fn drive_at_time_zero() {
        let state = ModeState::at_rest(1, 0.0);
        let drive = DriveSpec::scalar(5.0, 1.3).unwrap();
        let d = derivatives(
            &state,
            &ModeCoefficients::scalar(1.0, 1.0),
            Some(&drive),
            DampingSpec::NONE,
        )
        .unwrap();
        assert_eq!(d.cloud_acceleration[0], c(5.0));
        assert_eq!(d.atom_acceleration[0], c(0.0));
    }

    #[test]
    fn friction_acts_on_atom_only() {
        let state = ModeState::scalar(0.0, c(0.0), c(2.0), c(0.0), c(0.0));
        let d = derivatives(
            &state,
            &ModeCoefficients::scalar(0.0, 0.0),
            None,
            DampingSpec::new(0.5).unwrap(),
        )
        .unwrap();
        assert_eq!(d.atom_acceleration[0], c(-1.0));
        assert_eq!(d.cloud_acceleration[0], c(0.0));
        assert!(DampingSpec::new(-1.0).is_err());
    }

    #[test]
    fn drive_requires_positive_frequency() {
        assert!(DriveSpec::scalar(1.0, 0.0).is_err());
        assert!(DriveSpec::scalar(0.0, 0.0).is_ok());
    }

    #[test]
    fn conserved_quantities_are_stationary() {
        // dE/dt and dP/dt from the derivative, matrix mode with generic data
        let v = DMatrix::from_row_slice(2, 2, &[3.0, 0.4, 0.4, 1.5]);
        let tau = DMatrix::from_row_slice(2, 2, &[0.7, -0.2, 0.3, 1.1]);
        let coeffs = ModeCoefficients::matrix(v, tau).unwrap();
        let z = |re: f64, im: f64| Complex64::new(re, im);
        let state = ModeState {
            t: 0.0,
            atom: DVector::from_vec(vec![z(0.3, -0.1), z(-0.5, 0.2)]),
            atom_velocity: DVector::from_vec(vec![z(0.9, 0.4), z(0.1, -0.7)]),
            cloud: DVector::from_vec(vec![z(0.0, 0.0), z(0.2, 0.0)]),
            cloud_velocity: DVector::from_vec(vec![z(-0.6, 0.3), z(0.8, 0.5)]),
        };
        let d = derivatives(&state, &coeffs, None, DampingSpec::NONE).unwrap();
        let h = 1e-6;
        let step = |s: f64| ModeState {
            t: s,
            atom: &state.atom + &d.atom_velocity * c(s),
            atom_velocity: &state.atom_velocity + &d.atom_acceleration * c(s),
            cloud: &state.cloud + &d.cloud_velocity * c(s),
            cloud_velocity: &state.cloud_velocity + &d.cloud_acceleration * c(s),
        };
        let de = (energy(&step(h), &coeffs) - energy(&step(-h), &coeffs)) / (2.0 * h);
        assert!(de.abs() < 1e-9, "{de}");
        let dp =
            (cloud_momentum(&step(h), &coeffs) - cloud_momentum(&step(-h), &coeffs)) / c(2.0 * h);
        assert!(dp.norm() < 1e-9);
    }

    #[test]
    fn zero_cloud_momentum_initial_state() {
        let coeffs = ModeCoefficients::scalar(2.0, 0.5);
        let s = ModeState::with_zero_cloud_momentum(
            &coeffs,
            0.0,
            DVector::from_element(1, c(2.0)),
            DVector::from_element(1, c(0.0)),
        );
        assert_eq!(s.cloud_velocity[0], c(1.0));
        assert_eq!(cloud_momentum(&s, &coeffs)[0], c(0.0));
        assert_eq!(energy(&s, &coeffs), 0.5 * (1.0 + 2.0 * 4.0));
    }

    #[test]
    fn branch_coefficients_from_chain() {
        let mass = 30.0 * PROTON_MASS;
        let tau = 1e12;
        let model = build_chain_1d(8, 4e-10, mass, 1e-3 * mass, 10.0, tau).unwrap();
        let grid = KGrid::natural(&model.spec);
        let modes = mode_coefficients(&model, &grid, ModeSelection::default()).unwrap();
        assert_eq!(modes.len(), 8);
        for (point, mode) in grid.iter().zip(&modes) {
            let kx = point.k.components()[0];
            let (v, t) = mode.as_scalar().unwrap();
            let g0 = 4e-10;
            assert_relative_eq!(
                v,
                2.0 * 10.0 * (1.0 - (kx * g0).cos()) / mass,
                max_relative = 1e-12,
                epsilon = 1e-3
            );
            assert_relative_eq!(
                t,
                2.0 * tau * (kx * g0).cos(),
                max_relative = 1e-12,
                epsilon = 1e-3
            );
        }
        let matrix = mode_coefficients(&model, &grid, ModeSelection::Matrix).unwrap();
        assert_eq!(matrix[3].as_scalar(), modes[3].as_scalar());
        assert!(mode_coefficients(&model, &grid, ModeSelection::Branch(1)).is_err());
    }

    #[test]
    fn max_frequency_matches_scalar_formula() {
        let m = ModeCoefficients::scalar(16.0, 3.0);
        assert_eq!(m.max_frequency(), 5.0);
        let mm = ModeCoefficients::matrix(
            DMatrix::from_diagonal(&DVector::from_vec(vec![16.0, 1.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 0.0])),
        )
        .unwrap();
        assert_relative_eq!(mm.max_frequency(), 5.0, max_relative = 1e-14);
        assert_relative_eq!(mm.coupling_rate(), 3.0, max_relative = 1e-14);
    }
}
