use inerton_lattice::dispersion::{dispersion_sweep, CouplingMode, KGrid};
use inerton_lattice::lattice_model::{validate_model, CheckKind, ModelFile};
use inerton_lattice::PhysicalConstants;

const CUBIC: &str = "\
# simple cubic, nearest neighbours, isotropic springs
[lattice]
dimension = 3
n_sites = 4, 4, 4
g0 = 3e-10
M_over_Mp = 30

[force]
0,0,0 = 6 0 0  0 6 0  0 0 6
1,0,0 = -1 0 0  0 -1 0  0 0 -1
-1,0,0 = -1 0 0  0 -1 0  0 0 -1
0,1,0 = -1 0 0  0 -1 0  0 0 -1
0,-1,0 = -1 0 0  0 -1 0  0 0 -1
0,0,1 = -1 0 0  0 -1 0  0 0 -1
0,0,-1 = -1 0 0  0 -1 0  0 0 -1

[coupling]
1,0,0 = 5e11
-1,0,0 = 5e11
";

#[test]
fn cubic_model_from_file() {
    let constants = PhysicalConstants::default();
    let file: ModelFile = CUBIC.parse().unwrap();
    let model = file.to_model(&constants).unwrap();
    assert!(validate_model(&model).is_ok());

    let grid = KGrid::natural(&model.spec);
    assert_eq!(grid.len(), 64);
    let rows = dispersion_sweep(&model, &grid, &CouplingMode::default()).unwrap();
    let mass = model.spec.atom_mass();
    for row in &rows {
        let k = row.at.components();
        let elastic: f64 = k
            .iter()
            .map(|kx| 2.0 * (1.0 - (kx * 3e-10).cos()))
            .sum::<f64>()
            / mass;
        let tau = 2.0 * 5e11 * (k[0] * 3e-10).cos();
        // isotropic springs: three degenerate branches
        for omega in &row.omegas {
            let expected = (elastic + tau * tau).sqrt();
            assert!(
                (omega - expected).abs() <= 1e-10 * expected,
                "{k:?}: {omega:e} vs {expected:e}"
            );
        }
    }

    let written = ModelFile::from_model(&model, &constants).to_string();
    let again = ModelFile::parse(&written)
        .unwrap()
        .to_model(&constants)
        .unwrap();
    assert_eq!(again, model);
    assert_eq!(
        ModelFile::from_model(&again, &constants).to_string(),
        written
    );
}

#[test]
fn broken_sum_rule_is_reported() {
    let text = CUBIC.replace("0,0,0 = 6 0 0  0 6 0  0 0 6", "0,0,0 = 7 0 0  0 6 0  0 0 6");
    let model = ModelFile::parse(&text)
        .unwrap()
        .to_model(&PhysicalConstants::default())
        .unwrap();
    let report = validate_model(&model);
    assert!(!report.is_ok());
    let failed: Vec<CheckKind> = report.failures().map(|c| c.kind).collect();
    assert_eq!(failed, vec![CheckKind::AcousticSumRule]);
}
