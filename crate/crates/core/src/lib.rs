//! Lattice dynamics of a harmonic crystal whose atoms are each coupled to an
//! auxiliary oscillating "cloud" field through a velocity-coupling term.
//!
//! The crate is split the same way the computation flows:
//!
//! * [`lattice_model`]: real-space force constants `V(l)` and coupling rates
//!   `τ⁻¹(l)`, validation, and the plain-text model file format.
//! * [`dispersion`]: reciprocal-space force matrices, the effective matrix
//!   `W(k)` and branch frequencies over a Brillouin-zone grid.
//! * [`dynamics`]: time integration of the collective coordinates, driven
//!   steady states, resonance sweeps and real-space reconstruction.
//! * [`kinematics`] and [`resonator`]: closed-form calculators.
//! * [`report`]: CSV writers shared by the command-line front end.

pub mod dispersion;
pub mod dynamics;
mod error;
pub mod kinematics;
pub mod lattice_model;
pub mod report;
pub mod resonator;

pub use error::{Error, Result};
pub use lattice_model::{
    build_chain_1d, ChainParameters, CouplingConstants, ForceConstants, LatticeSpec, Model, Offset,
    PhysicalConstants,
};
