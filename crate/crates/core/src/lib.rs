//! Correlations visible in mutually unbiased measurements on bipartite
//! quantum states.
//!
//! Quantities are in bits. Measurements always act on subsystem A.

pub mod closed_form;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod mub;
pub mod optimize;
pub mod states;
pub mod sweep;
pub mod verify;

pub use closed_form::MeasureKind;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, Subsystem};
pub use measures::{
    classical_correlation_c1, holevo, measure_c, measure_cm, measure_q2, mutual_information, quantum_discord,
    OptimizerResult,
};
pub use mub::{Basis, MubSet, MubSetJson};
pub use optimize::OptimizerConfig;
pub use states::{BellState, BlochTriple, SchmidtVector, StateJson};
pub use sweep::{run_sweep, Family, SweepMode, SweepSpec};
pub use verify::{find_witness_mub_pair, verify_nullity_theorem, VerificationReport, Witness, WitnessPath};
