//! Real-space description of the model crystal.
//!
//! A [`Model`] bundles the lattice geometry ([`LatticeSpec`]), the elastic
//! force constants `V(l)` ([`ForceConstants`], N/m) and the atom-cloud
//! coupling rates `τ⁻¹(l)` ([`CouplingConstants`], 1/s). Offsets `l` are
//! integer lattice vectors in units of the lattice constant; boundaries are
//! always periodic.

mod config;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{require_positive, Error, Result};

pub use config::{ModelFile, Section};

/// Proton rest mass used throughout, kg.
pub const PROTON_MASS: f64 = 1.67e-27;

/// Cloud mass used when none is given, as a fraction of the atom mass.
pub const DEFAULT_CLOUD_MASS_RATIO: f64 = 1.0e-3;

/// SI constants used by the calculators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J s.
    pub planck: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Speed of light, m/s.
    pub speed_of_light: f64,
    /// Proton rest mass, kg.
    pub proton_mass: f64,
    /// Mean Earth radius, m.
    pub earth_radius: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            planck: 6.626_070_15e-34,
            boltzmann: 1.380_649e-23,
            speed_of_light: 299_792_458.0,
            proton_mass: PROTON_MASS,
            earth_radius: 6.371e6,
        }
    }
}

/// Integer lattice offset `l - n`. Components beyond the lattice dimension
/// are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Offset(pub [i32; 3]);

impl Offset {
    pub const ZERO: Offset = Offset([0, 0, 0]);

    /// Builds an offset from up to three components.
    pub fn new(components: &[i32]) -> Result<Offset> {
        if components.is_empty() || components.len() > 3 {
            return Err(Error::invalid(
                "offset",
                format!("expected 1 to 3 components, got {}", components.len()),
            ));
        }
        let mut out = [0; 3];
        out[..components.len()].copy_from_slice(components);
        Ok(Offset(out))
    }

    pub fn along_x(n: i32) -> Offset {
        Offset([n, 0, 0])
    }

    pub fn components(&self, dimension: usize) -> &[i32] {
        &self.0[..dimension]
    }

    /// Euclidean length in units of the lattice constant.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| f64::from(c).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        *self == Offset::ZERO
    }

    /// True when some component is nonzero past `dimension`.
    fn exceeds(&self, dimension: usize) -> bool {
        self.0[dimension..].iter().any(|&c| c != 0)
    }
}

impl std::ops::Neg for Offset {
    type Output = Offset;
    fn neg(self) -> Offset {
        Offset([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Geometry and masses of a simple (mono-atomic) periodic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    dimension: usize,
    n_sites: Vec<usize>,
    lattice_constant: f64,
    atom_mass: f64,
    cloud_mass: f64,
}

impl LatticeSpec {
    pub fn new(
        dimension: usize,
        n_sites: &[usize],
        lattice_constant: f64,
        atom_mass: f64,
        cloud_mass: f64,
    ) -> Result<LatticeSpec> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::invalid(
                "dimension",
                format!("must be 1, 2 or 3, got {dimension}"),
            ));
        }
        let n_sites = match n_sites.len() {
            1 => vec![n_sites[0]; dimension],
            len if len == dimension => n_sites.to_vec(),
            len => {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: len,
                })
            }
        };
        if let Some(&n) = n_sites.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(
                "n_sites",
                format!("need at least 2 sites per axis, got {n}"),
            ));
        }
        require_positive("g0", lattice_constant)?;
        require_positive("atom_mass", atom_mass)?;
        require_positive("cloud_mass", cloud_mass)?;
        Ok(LatticeSpec {
            dimension,
            n_sites,
            lattice_constant,
            atom_mass,
            cloud_mass,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Sites along each axis.
    pub fn n_sites(&self) -> &[usize] {
        &self.n_sites
    }

    /// Total number of sites `N`.
    pub fn total_sites(&self) -> usize {
        self.n_sites.iter().product()
    }

    /// Lattice constant `g0`, m.
    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }

    /// Atom mass `M`, kg.
    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    /// Cloud mass `m`, kg.
    pub fn cloud_mass(&self) -> f64 {
        self.cloud_mass
    }

    /// Multi-index of the site with flat index `flat` (axis 0 slowest).
    pub fn site(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat;
        let mut out = vec![0; self.dimension];
        for axis in (0..self.dimension).rev() {
            out[axis] = rest % self.n_sites[axis];
            rest /= self.n_sites[axis];
        }
        out
    }

    /// Cartesian position of a site, m.
    pub fn position(&self, site: &[usize]) -> Vec<f64> {
        site.iter()
            .map(|&i| i as f64 * self.lattice_constant)
            .collect()
    }
}

/// Offset-indexed table of `dimension × dimension` matrices.
#[derive(Debug, Clone, PartialEq)]
struct OffsetTable {
    dimension: usize,
    entries: BTreeMap<Offset, DMatrix<f64>>,
}

impl OffsetTable {
    fn new(dimension: usize) -> OffsetTable {
        OffsetTable {
            dimension,
            entries: BTreeMap::new(),
        }
    }

    fn insert(&mut self, offset: Offset, matrix: DMatrix<f64>) -> Result<()> {
        if offset.exceeds(self.dimension) {
            return Err(Error::invalid(
                "offset",
                format!(
                    "{offset} has components beyond dimension {}",
                    self.dimension
                ),
            ));
        }
        if matrix.nrows() != self.dimension || matrix.ncols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid(
                "matrix",
                format!("non-finite entry at {offset}"),
            ));
        }
        self.entries.insert(offset, matrix);
        Ok(())
    }

    fn cutoff(&self) -> f64 {
        self.entries.keys().map(Offset::norm).fold(0.0, f64::max)
    }

    /// Largest `|M(l) - M(-l)ᵀ|` entry, with the offending offset. A missing
    /// partner counts as a zero matrix.
    fn inversion_residual(&self) -> (f64, Option<Offset>) {
        let zero = DMatrix::zeros(self.dimension, self.dimension);
        let mut worst = (0.0, None);
        for (offset, matrix) in &self.entries {
            let partner = self.entries.get(&-*offset).unwrap_or(&zero);
            let residual = (matrix - partner.transpose()).amax();
            if residual > worst.0 {
                worst = (residual, Some(*offset));
            }
        }
        worst
    }

    /// Sum of entry-wise magnitudes, used as the scale for relative checks.
    fn magnitude(&self) -> f64 {
        self.entries.values().map(|m| m.amax()).sum()
    }
}

/// Elastic force constants `V_{αβ}(l)`, N/m.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceConstants {
    table: OffsetTable,
}

impl ForceConstants {
    pub fn new(dimension: usize) -> ForceConstants {
        ForceConstants {
            table: OffsetTable::new(dimension),
        }
    }

    pub fn dimension(&self) -> usize {
        self.table.dimension
    }

    pub fn insert(&mut self, offset: Offset, matrix: DMatrix<f64>) -> Result<()> {
        self.table.insert(offset, matrix)
    }

    /// Inserts `value * I`.
    pub fn insert_scalar(&mut self, offset: Offset, value: f64) -> Result<()> {
        let d = self.dimension();
        self.table.insert(offset, DMatrix::identity(d, d) * value)
    }

    pub fn get(&self, offset: &Offset) -> Option<&DMatrix<f64>> {
        self.table.entries.get(offset)
    }

    pub fn get_mut(&mut self, offset: &Offset) -> Option<&mut DMatrix<f64>> {
        self.table.entries.get_mut(offset)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Offset, &DMatrix<f64>)> {
        self.table.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.table.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.entries.is_empty()
    }

    /// Largest offset length included, in lattice units.
    pub fn cutoff(&self) -> f64 {
        self.table.cutoff()
    }

    /// `Σ_l V(l)`; zero when the acoustic sum rule holds.
    pub fn sum(&self) -> DMatrix<f64> {
        let d = self.dimension();
        self.iter()
            .fold(DMatrix::zeros(d, d), |acc, (_, m)| acc + m)
    }
}

/// Atom-cloud collision rates `τ⁻¹_{αβ}(l)`, 1/s.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConstants {
    table: OffsetTable,
    isotropic_scalar: bool,
}

impl CouplingConstants {
    /// An empty table. With `isotropic_scalar` set, only multiples of the
    /// identity are accepted.
    pub fn new(dimension: usize, isotropic_scalar: bool) -> CouplingConstants {
        CouplingConstants {
            table: OffsetTable::new(dimension),
            isotropic_scalar,
        }
    }

    pub fn dimension(&self) -> usize {
        self.table.dimension
    }

    pub fn is_isotropic_scalar(&self) -> bool {
        self.isotropic_scalar
    }

    pub fn insert(&mut self, offset: Offset, matrix: DMatrix<f64>) -> Result<()> {
        if self.isotropic_scalar && scalar_part(&matrix).is_none() {
            return Err(Error::invalid(
                "coupling",
                format!("entry at {offset} is not a multiple of the identity"),
            ));
        }
        self.table.insert(offset, matrix)
    }

    pub fn insert_scalar(&mut self, offset: Offset, value: f64) -> Result<()> {
        let d = self.dimension();
        self.table.insert(offset, DMatrix::identity(d, d) * value)
    }

    pub fn get(&self, offset: &Offset) -> Option<&DMatrix<f64>> {
        self.table.entries.get(offset)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Offset, &DMatrix<f64>)> {
        self.table.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.table.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.entries.is_empty()
    }

    pub fn cutoff(&self) -> f64 {
        self.table.cutoff()
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.iter().all(|(_, m)| m.iter().all(|&x| x == 0.0))
    }
}

/// Returns `s` if `matrix == s * I` exactly.
pub(crate) fn scalar_part(matrix: &DMatrix<f64>) -> Option<f64> {
    let s = matrix[(0, 0)];
    let d = matrix.nrows();
    let is_scalar = (0..d).all(|i| (0..d).all(|j| matrix[(i, j)] == if i == j { s } else { 0.0 }));
    is_scalar.then_some(s)
}

/// Lattice, force constants and couplings of one crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: LatticeSpec,
    pub force: ForceConstants,
    pub coupling: CouplingConstants,
}

impl Model {
    pub fn new(
        spec: LatticeSpec,
        force: ForceConstants,
        coupling: CouplingConstants,
    ) -> Result<Model> {
        let d = spec.dimension();
        for found in [force.dimension(), coupling.dimension()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        Ok(Model {
            spec,
            force,
            coupling,
        })
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    /// Runs [`validate_model`] and turns the first failure into an error.
    pub fn validated(self) -> Result<Model> {
        validate_model(&self).into_result()?;
        Ok(self)
    }
}

/// Parameters of a nearest-neighbour chain. The default is the reference
/// chain used by the command-line tool and the acceptance checks: eight
/// atoms of mass `30 M_p` spaced 4 Å apart, `C = 10 N/m`, `τ⁻¹ = 10¹² 1/s`
/// and a cloud of `10⁻³ M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParameters {
    pub n_sites: usize,
    /// m
    pub lattice_constant: f64,
    /// kg
    pub atom_mass: f64,
    /// kg
    pub cloud_mass: f64,
    /// N/m
    pub stiffness: f64,
    /// 1/s
    pub coupling_rate: f64,
}

impl Default for ChainParameters {
    fn default() -> ChainParameters {
        let atom_mass = 30.0 * PROTON_MASS;
        ChainParameters {
            n_sites: 8,
            lattice_constant: 4.0e-10,
            atom_mass,
            cloud_mass: DEFAULT_CLOUD_MASS_RATIO * atom_mass,
            stiffness: 10.0,
            coupling_rate: 1.0e12,
        }
    }
}

impl ChainParameters {
    pub fn build(&self) -> Result<Model> {
        build_chain_1d(
            self.n_sites,
            self.lattice_constant,
            self.atom_mass,
            self.cloud_mass,
            self.stiffness,
            self.coupling_rate,
        )
    }
}

/// Nearest-neighbour chain: `V(0) = 2C`, `V(±1) = -C`, `τ⁻¹(±1) = τ`,
/// `τ⁻¹(0) = 0`.
pub fn build_chain_1d(
    n_sites: usize,
    lattice_constant: f64,
    atom_mass: f64,
    cloud_mass: f64,
    stiffness: f64,
    coupling_rate: f64,
) -> Result<Model> {
    require_positive("C_nn", stiffness)?;
    if !(coupling_rate.is_finite() && coupling_rate >= 0.0) {
        return Err(Error::invalid(
            "tau_nn",
            format!("must be non-negative, got {coupling_rate}"),
        ));
    }
    let spec = LatticeSpec::new(1, &[n_sites], lattice_constant, atom_mass, cloud_mass)?;

    let mut force = ForceConstants::new(1);
    force.insert_scalar(Offset::ZERO, 2.0 * stiffness)?;
    force.insert_scalar(Offset::along_x(1), -stiffness)?;
    force.insert_scalar(Offset::along_x(-1), -stiffness)?;

    let mut coupling = CouplingConstants::new(1, true);
    coupling.insert_scalar(Offset::ZERO, 0.0)?;
    coupling.insert_scalar(Offset::along_x(1), coupling_rate)?;
    coupling.insert_scalar(Offset::along_x(-1), coupling_rate)?;

    Model::new(spec, force, coupling)
}

/// Relative tolerance for the symmetry and sum-rule checks.
pub const VALIDATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    ForceInversionSymmetry,
    AcousticSumRule,
    ForceCutoff,
    CouplingInversionSymmetry,
    CouplingCutoff,
    CouplingIsotropy,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CheckKind::ForceInversionSymmetry => "force inversion symmetry",
            CheckKind::AcousticSumRule => "acoustic sum rule",
            CheckKind::ForceCutoff => "force cutoff",
            CheckKind::CouplingInversionSymmetry => "coupling inversion symmetry",
            CheckKind::CouplingCutoff => "coupling cutoff",
            CheckKind::CouplingIsotropy => "coupling isotropy",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub kind: CheckKind,
    pub passed: bool,
    /// Absolute residual of the check (matrix entries or offset excess).
    pub residual: f64,
    pub offending: Option<Offset>,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{verdict}  {}  residual={:e}", self.kind, self.residual)?;
        if let Some(offset) = self.offending {
            write!(f, "  offset={offset}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, kind: CheckKind) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.kind == kind)
    }

    pub fn into_result(self) -> Result<()> {
        match self.failures().next() {
            None => Ok(()),
            Some(first) => Err(Error::Validation(first.to_string())),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        Ok(())
    }
}

/// Checks inversion symmetry, the acoustic sum rule, offset cutoffs and (if
/// flagged) coupling isotropy. Never fails; every outcome is reported.
pub fn validate_model(model: &Model) -> ValidationReport {
    let mut checks = Vec::with_capacity(6);

    let force = &model.force.table;
    let scale = force.magnitude().max(f64::MIN_POSITIVE);
    let (residual, offending) = force.inversion_residual();
    checks.push(CheckOutcome {
        kind: CheckKind::ForceInversionSymmetry,
        passed: residual <= VALIDATION_TOLERANCE * scale,
        residual,
        offending,
    });

    let residual = model.force.sum().amax();
    checks.push(CheckOutcome {
        kind: CheckKind::AcousticSumRule,
        passed: residual <= VALIDATION_TOLERANCE * scale,
        residual,
        offending: (residual > VALIDATION_TOLERANCE * scale).then_some(Offset::ZERO),
    });

    checks.push(cutoff_check(CheckKind::ForceCutoff, force, &model.spec));

    let coupling = &model.coupling.table;
    let scale = coupling.magnitude().max(f64::MIN_POSITIVE);
    let (residual, offending) = coupling.inversion_residual();
    checks.push(CheckOutcome {
        kind: CheckKind::CouplingInversionSymmetry,
        passed: residual <= VALIDATION_TOLERANCE * scale,
        residual,
        offending,
    });
    checks.push(cutoff_check(
        CheckKind::CouplingCutoff,
        coupling,
        &model.spec,
    ));

    if model.coupling.is_isotropic_scalar() {
        let offending = coupling
            .entries
            .iter()
            .find(|(_, m)| scalar_part(m).is_none())
            .map(|(o, _)| *o);
        checks.push(CheckOutcome {
            kind: CheckKind::CouplingIsotropy,
            passed: offending.is_none(),
            residual: if offending.is_some() { 1.0 } else { 0.0 },
            offending,
        });
    }

    ValidationReport { checks }
}

/// Every offset component must satisfy `|l_α| <= n_α / 2`.
fn cutoff_check(kind: CheckKind, table: &OffsetTable, spec: &LatticeSpec) -> CheckOutcome {
    let mut worst = (0.0, None);
    for offset in table.entries.keys() {
        for (axis, &c) in offset.components(spec.dimension()).iter().enumerate() {
            let excess = f64::from(c.abs()) - spec.n_sites()[axis] as f64 / 2.0;
            if excess > worst.0 {
                worst = (excess, Some(*offset));
            }
        }
    }
    CheckOutcome {
        kind,
        passed: worst.1.is_none(),
        residual: worst.0,
        offending: worst.1,
    }
}
