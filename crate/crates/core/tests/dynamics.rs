use inerton_lattice::dispersion::KGrid;
use inerton_lattice::dynamics::{
    collective_amplitudes, drive_amplitude, integrate, integrate_mode, mode_coefficients,
    real_space_field, reality_residual, CloudEquation, DampingSpec, DriveSpec, IntegrationConfig,
    ModeProblem, ModeSelection, ModeState,
};
use inerton_lattice::ChainParameters;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Under a strong drive the atoms barely feed back on the cloud, and the
/// prescribed-cloud model tracks the full one.
#[test]
fn prescribed_cloud_tracks_coupled_model_under_strong_drive() {
    let model = ChainParameters::default().build().unwrap();
    let grid = KGrid::natural(&model.spec);
    let coefficients =
        mode_coefficients(&model, &grid, ModeSelection::default()).unwrap()[6].clone();
    let omega_res = coefficients.max_frequency();
    let omega = 0.4 * omega_res;
    let problem = ModeProblem {
        k_index: 6,
        coefficients,
        drive: Some(DriveSpec::scalar(1.0, omega).unwrap()),
        initial: ModeState::at_rest(1, 0.0),
    };
    let t_end = 200.0 * 2.0 * std::f64::consts::PI / omega;
    let base = IntegrationConfig::new(t_end, 0.02 / omega_res).with_stride(5);

    let amplitude = |cloud| {
        let track =
            integrate_mode(&problem, DampingSpec::NONE, &base.clone().with_cloud(cloud)).unwrap();
        let times: Vec<f64> = track.states.iter().map(|s| s.t).collect();
        let envelope = track
            .atom_series(0)
            .iter()
            .fold(0.0f64, |m, a| m.max(a.abs()));
        (
            drive_amplitude(&times, &track.atom_series(0), omega).unwrap(),
            envelope,
        )
    };
    let (full, full_envelope) = amplitude(CloudEquation::Coupled);
    let (reduced, reduced_envelope) = amplitude(CloudEquation::Prescribed);
    assert!(
        (full - reduced).abs() / full < 0.05,
        "{full:e} vs {reduced:e}"
    );
    assert!(
        (full_envelope - reduced_envelope).abs() / full_envelope < 0.05,
        "{full_envelope:e} vs {reduced_envelope:e}"
    );
}

/// Evolving the collective amplitudes of a real field keeps `A_{-k}` the
/// conjugate of `A_k`, so the field stays real.
#[test]
fn evolution_preserves_real_field() {
    let params = ChainParameters {
        n_sites: 16,
        ..ChainParameters::default()
    };
    let model = params.build().unwrap();
    let spec = &model.spec;
    let grid = KGrid::natural(spec);
    let modes = mode_coefficients(&model, &grid, ModeSelection::default()).unwrap();

    let mut rng = StdRng::seed_from_u64(11);
    let mut field = || -> Vec<f64> { (0..16).map(|_| rng.random_range(-1e-11..1e-11)).collect() };
    let displacement = collective_amplitudes(&field(), spec).unwrap();
    let velocity: Vec<Complex64> = collective_amplitudes(&field(), spec)
        .unwrap()
        .into_iter()
        .map(|v| v * 1e12)
        .collect();

    let problems: Vec<ModeProblem> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| ModeProblem {
            k_index: i,
            coefficients: m.clone(),
            drive: None,
            initial: ModeState::with_zero_cloud_momentum(
                m,
                0.0,
                DVector::from_element(1, displacement[i]),
                DVector::from_element(1, velocity[i]),
            ),
        })
        .collect();
    let omega_max = modes.iter().map(|m| m.max_frequency()).fold(0.0, f64::max);
    let config = IntegrationConfig::new(2e-11, 0.02 / omega_max).with_stride(1000);
    let record = integrate(&problems, DampingSpec::NONE, &config).unwrap();

    for sample in 0..record.times.len() {
        let amplitudes: Vec<Complex64> = record
            .tracks
            .iter()
            .map(|t| t.states[sample].atom[0])
            .collect();
        assert!(reality_residual(&amplitudes, &grid).unwrap() < 1e-12);
        let xi = real_space_field(&amplitudes, &grid, spec).unwrap();
        assert!(xi.iter().all(|x| x.abs() < 1e-9));
    }
}

/// Friction on the atoms drains the energy of a free mode monotonically.
#[test]
fn friction_dissipates_every_mode() {
    let model = ChainParameters::default().build().unwrap();
    let grid = KGrid::natural(&model.spec);
    let modes = mode_coefficients(&model, &grid, ModeSelection::default()).unwrap();
    let problems: Vec<ModeProblem> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| ModeProblem {
            k_index: i,
            coefficients: m.clone(),
            drive: None,
            initial: ModeState::with_zero_cloud_momentum(
                m,
                0.0,
                DVector::from_element(1, Complex64::new(1e-23, 0.0)),
                DVector::from_element(1, Complex64::new(0.0, 0.0)),
            ),
        })
        .collect();
    let omega_max = modes.iter().map(|m| m.max_frequency()).fold(0.0, f64::max);
    let config = IntegrationConfig::new(5e-11, 0.02 / omega_max).with_stride(200);
    let record = integrate(&problems, DampingSpec::new(1e11).unwrap(), &config).unwrap();
    for track in &record.tracks {
        let (first, last) = (track.energy[0], *track.energy.last().unwrap());
        assert!(
            last < 0.5 * first,
            "mode {}: {first:e} -> {last:e}",
            track.k_index
        );
        assert!(track.energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    }
}
