//! Spin Hamiltonian toolkit for a 3d¹ ion in a trigonally distorted
//! tetrahedral site, with its nuclear spin.

pub mod angular;
pub mod effective;
pub mod eigen;
pub mod error;
pub mod fitting;
pub mod hamiltonian;
pub mod spectra;
pub mod units;

pub use angular::{OperatorMatrix, ProductSpace, Spin};
pub use eigen::{EigenSystem, Irrep};
pub use error::{Error, Result};
pub use hamiltonian::{FieldConfig, ModelParams};
pub use effective::EffectiveParams;
pub use fitting::{ExperimentalTargets, ScanGrid};
pub use spectra::{SweepResult, TransitionTable};
