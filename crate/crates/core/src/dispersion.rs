//! Reciprocal-space force matrices and branch frequencies.
//!
//! For a wavevector `k` the mass-normalised force matrix is
//! `Ṽ(k) = (1/M) Σ_l V(l) e^{ik·l}` and the coupling matrix is
//! `τ̃⁻¹(k) = Σ_l τ⁻¹(l) e^{ik·l}`. The branch frequencies are the square
//! roots of the eigenvalues of the effective matrix `W(k)`, which adds the
//! cloud-coupling correction to `Ṽ(k)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice_model::{scalar_part, CouplingConstants, ForceConstants, LatticeSpec, Model};

/// Imaginary parts of `Ṽ(k)`, `τ̃⁻¹(k)` below this fraction of the summed
/// term magnitudes are dropped; above it the model is rejected.
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

/// Relative asymmetry of `W` that is silently symmetrised.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenvalues above `-NEGATIVE_TOLERANCE * ‖W‖` are clamped to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// Wavevector in rad/m.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector(Vec<f64>);

impl WaveVector {
    /// Fails unless every component lies in the first Brillouin zone,
    /// `|k_α| <= π/g0`.
    pub fn new(components: Vec<f64>, lattice_constant: f64) -> Result<WaveVector> {
        let edge = PI / lattice_constant;
        if components.is_empty() || components.len() > 3 {
            return Err(Error::invalid("k", "expected 1 to 3 components"));
        }
        if let Some(&bad) = components
            .iter()
            .find(|k| !k.is_finite() || k.abs() > edge * (1.0 + 1e-12))
        {
            return Err(Error::invalid(
                "k",
                format!("component {bad:e} outside the first Brillouin zone (|k| <= {edge:e})"),
            ));
        }
        Ok(WaveVector(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|k| k * k).sum::<f64>().sqrt()
    }
}

/// A point of a [`KGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// Position in the grid's deterministic ordering.
    pub index: usize,
    /// Integer label per axis, `j ∈ (-n/2, n/2]`.
    pub label: Vec<i64>,
    pub k: WaveVector,
}

/// Uniform wavevector grid `k_α = 2π j / (n_α g0)`, `j ∈ (-n_α/2, n_α/2]`.
///
/// Points are ordered row-major over the per-axis labels, each axis running
/// from its most negative label upward.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    points_per_axis: Vec<usize>,
    lattice_constant: f64,
}

impl KGrid {
    pub fn new(points_per_axis: &[usize], lattice_constant: f64) -> Result<KGrid> {
        if points_per_axis.is_empty() || points_per_axis.len() > 3 {
            return Err(Error::invalid("grid", "expected 1 to 3 axes"));
        }
        if points_per_axis.contains(&0) {
            return Err(Error::invalid(
                "grid",
                "every axis needs at least one point",
            ));
        }
        crate::error::require_positive("g0", lattice_constant)?;
        Ok(KGrid {
            points_per_axis: points_per_axis.to_vec(),
            lattice_constant,
        })
    }

    /// The grid commensurate with the periodic box of `spec`.
    pub fn natural(spec: &LatticeSpec) -> KGrid {
        KGrid {
            points_per_axis: spec.n_sites().to_vec(),
            lattice_constant: spec.lattice_constant(),
        }
    }

    /// `points` per axis along every dimension of `spec`.
    pub fn uniform(spec: &LatticeSpec, points: usize) -> Result<KGrid> {
        KGrid::new(&vec![points; spec.dimension()], spec.lattice_constant())
    }

    /// A grid with no points.
    pub fn empty(dimension: usize, lattice_constant: f64) -> KGrid {
        KGrid {
            points_per_axis: vec![0; dimension.clamp(1, 3)],
            lattice_constant,
        }
    }

    pub fn dimension(&self) -> usize {
        self.points_per_axis.len()
    }

    pub fn points_per_axis(&self) -> &[usize] {
        &self.points_per_axis
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label_min(n: usize) -> i64 {
        (n / 2) as i64 - n as i64 + 1
    }

    pub fn label(&self, index: usize) -> Vec<i64> {
        let mut rest = index;
        let mut out = vec![0; self.dimension()];
        for axis in (0..self.dimension()).rev() {
            let n = self.points_per_axis[axis];
            out[axis] = (rest % n) as i64 + KGrid::label_min(n);
            rest /= n;
        }
        out
    }

    fn index_of(&self, label: &[i64]) -> usize {
        label
            .iter()
            .zip(&self.points_per_axis)
            .fold(0, |acc, (&j, &n)| {
                acc * n + (j - KGrid::label_min(n)) as usize
            })
    }

    pub fn point(&self, index: usize) -> GridPoint {
        let label = self.label(index);
        let k = label
            .iter()
            .zip(&self.points_per_axis)
            .map(|(&j, &n)| 2.0 * PI * j as f64 / (n as f64 * self.lattice_constant))
            .collect();
        GridPoint {
            index,
            label,
            k: WaveVector(k),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Index of the point at `-k`. The zone-edge label `n/2` of an even axis
    /// is its own partner.
    pub fn partner(&self, index: usize) -> usize {
        let label: Vec<i64> = self
            .label(index)
            .iter()
            .zip(&self.points_per_axis)
            .map(|(&j, &n)| if 2 * j == n as i64 { j } else { -j })
            .collect();
        self.index_of(&label)
    }
}

/// Reciprocal-space matrices at one wavevector.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrices {
    /// `Ṽ(k)`, 1/s².
    pub v_tilde: DMatrix<f64>,
    /// `τ̃⁻¹(k)`, 1/s.
    pub tau_tilde: DMatrix<f64>,
    pub at: WaveVector,
}

/// Sums `Σ_l M(l) e^{ik·l}` and returns the real part, rejecting a
/// significant imaginary part.
fn lattice_sum<'a>(
    entries: impl Iterator<Item = (&'a crate::lattice_model::Offset, &'a DMatrix<f64>)>,
    dimension: usize,
    lattice_constant: f64,
    k: &WaveVector,
) -> Result<DMatrix<f64>> {
    if k.dimension() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            found: k.dimension(),
        });
    }
    let mut re = DMatrix::zeros(dimension, dimension);
    let mut im = DMatrix::zeros(dimension, dimension);
    let mut scale = 0.0;
    for (offset, matrix) in entries {
        let phase: f64 = offset
            .components(dimension)
            .iter()
            .zip(k.components())
            .map(|(&l, &kc)| kc * f64::from(l) * lattice_constant)
            .sum();
        let (sin, cos) = phase.sin_cos();
        re += matrix * cos;
        im += matrix * sin;
        scale += matrix.amax();
    }
    let residual = im.amax();
    if residual > IMAGINARY_TOLERANCE * scale {
        return Err(Error::ImaginaryResidual { residual, scale });
    }
    Ok(re)
}

/// `Ṽ(k) = (1/M) Σ_l V(l) e^{ik·l}`, 1/s².
pub fn fourier_force(
    fc: &ForceConstants,
    spec: &LatticeSpec,
    k: &WaveVector,
) -> Result<DMatrix<f64>> {
    let sum = lattice_sum(fc.iter(), spec.dimension(), spec.lattice_constant(), k)?;
    Ok(sum / spec.atom_mass())
}

/// `τ̃⁻¹(k) = Σ_l τ⁻¹(l) e^{ik·l}`, 1/s.
pub fn fourier_coupling(
    cc: &CouplingConstants,
    spec: &LatticeSpec,
    k: &WaveVector,
) -> Result<DMatrix<f64>> {
    lattice_sum(cc.iter(), spec.dimension(), spec.lattice_constant(), k)
}

pub fn fourier_matrices(model: &Model, k: &WaveVector) -> Result<FourierMatrices> {
    Ok(FourierMatrices {
        v_tilde: fourier_force(&model.force, &model.spec, k)?,
        tau_tilde: fourier_coupling(&model.coupling, &model.spec, k)?,
        at: k.clone(),
    })
}

/// How the coupling correction to `W` is evaluated.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CouplingMode {
    /// Couplings are multiples of the identity, so
    /// `W = Ṽ + (τ̃⁻¹)²` regardless of polarization.
    #[default]
    IsotropicScalar,
    /// Evaluate
    /// `W_αβ = Ṽ_αβ + τ̃⁻¹_αβ Σ_α' τ̃⁻¹_α'β e_α' / e_β`
    /// with a fixed, user-supplied polarization `e`. Not iterated to
    /// self-consistency.
    FixedPolarization(DVector<f64>),
}

/// Effective force matrix `W(k)`, 1/s².
///
/// A coupling matrix that is an exact multiple of the identity always takes
/// the closed form `Ṽ + (τ̃⁻¹)²`; the polarization is then irrelevant. Any
/// other coupling needs [`CouplingMode::FixedPolarization`] with no zero
/// components.
pub fn effective_matrix(fm: &FourierMatrices, mode: &CouplingMode) -> Result<DMatrix<f64>> {
    let tau = &fm.tau_tilde;
    if scalar_part(tau).is_some() {
        return Ok(&fm.v_tilde + tau * tau);
    }
    let e = match mode {
        CouplingMode::FixedPolarization(e) => e,
        CouplingMode::IsotropicScalar => {
            return Err(Error::invalid(
                "coupling",
                "anisotropic coupling needs a fixed polarization",
            ))
        }
    };
    let d = tau.nrows();
    if e.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: e.len(),
        });
    }
    if let Some(component) = e.iter().position(|&x| x == 0.0) {
        return Err(Error::PolarizationSingularity { component });
    }
    // Σ_α' τ̃⁻¹_α'β e_α' / e_β, one factor per column β
    let column_factor: Vec<f64> = (0..d)
        .map(|beta| (0..d).map(|a| tau[(a, beta)] * e[a]).sum::<f64>() / e[beta])
        .collect();
    Ok(DMatrix::from_fn(d, d, |alpha, beta| {
        fm.v_tilde[(alpha, beta)] + tau[(alpha, beta)] * column_factor[beta]
    }))
}

/// Eigen-solution of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branches {
    /// `Ω_s²`, ascending, negatives within tolerance clamped to 0.
    pub eigenvalues: Vec<f64>,
    /// `Ω_s`, rad/s, ascending.
    pub omegas: Vec<f64>,
    /// Orthonormal polarizations, one column per branch.
    pub polarizations: DMatrix<f64>,
}

/// Solves `det(Ω² - W) = 0` for a (nearly) symmetric `W`.
pub fn branch_frequencies(w: &DMatrix<f64>) -> Result<Branches> {
    let d = w.nrows();
    if w.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: w.ncols(),
        });
    }
    let norm = w.norm();
    let asymmetry = (w - w.transpose()).amax();
    if asymmetry > ASYMMETRY_TOLERANCE * norm {
        return Err(Error::Asymmetry {
            residual: asymmetry,
        });
    }
    let symmetric = (w + w.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(symmetric);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(d);
    let mut polarizations = DMatrix::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        let lambda = eigen.eigenvalues[i];
        if lambda < -NEGATIVE_TOLERANCE * norm {
            return Err(Error::Instability { eigenvalue: lambda });
        }
        eigenvalues.push(lambda.max(0.0));
        let mut v = eigen.eigenvectors.column(i).into_owned();
        // sign convention: largest component positive
        if v[v.iamax()] < 0.0 {
            v.neg_mut();
        }
        polarizations.set_column(col, &v);
    }
    Ok(Branches {
        omegas: eigenvalues.iter().map(|l| l.sqrt()).collect(),
        eigenvalues,
        polarizations,
    })
}

/// Dispersion at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionResult {
    pub k_index: usize,
    pub at: WaveVector,
    pub fourier: FourierMatrices,
    /// `W(k)`, 1/s².
    pub w: DMatrix<f64>,
    /// `Ω_s(k)`, rad/s, ascending.
    pub omegas: Vec<f64>,
    pub polarizations: DMatrix<f64>,
}

impl DispersionResult {
    /// Per branch: whether the coupling term raises `Ω_s²`, i.e.
    /// `e_sᵀ (W - Ṽ) e_s > 1e-12 ‖W‖`.
    pub fn gap_flags(&self) -> Vec<bool> {
        let correction = &self.w - &self.fourier.v_tilde;
        let threshold = 1e-12 * self.w.norm();
        self.polarizations
            .column_iter()
            .map(|e| e.dot(&(&correction * e)) > threshold)
            .collect()
    }
}

/// Dispersion at one wavevector.
pub fn dispersion_at(
    model: &Model,
    k_index: usize,
    k: &WaveVector,
    mode: &CouplingMode,
) -> Result<DispersionResult> {
    let fourier = fourier_matrices(model, k)?;
    let w = effective_matrix(&fourier, mode)?;
    let branches = branch_frequencies(&w)?;
    Ok(DispersionResult {
        k_index,
        at: k.clone(),
        fourier,
        w,
        omegas: branches.omegas,
        polarizations: branches.polarizations,
    })
}

/// Dispersion over a grid, in grid order. Points are evaluated in parallel;
/// the first failing point (in grid order) is reported with its wavevector.
pub fn dispersion_sweep(
    model: &Model,
    grid: &KGrid,
    mode: &CouplingMode,
) -> Result<Vec<DispersionResult>> {
    if !grid.is_empty() && grid.dimension() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            found: grid.dimension(),
        });
    }
    let rows: Vec<Result<DispersionResult>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let point = grid.point(i);
            dispersion_at(model, i, &point.k, mode).map_err(|e| Error::AtWaveVector {
                k_index: i,
                k: point.k.components().to_vec(),
                source: Box::new(e),
            })
        })
        .collect();
    rows.into_iter().collect()
}
