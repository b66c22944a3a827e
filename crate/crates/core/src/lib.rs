//! Classical and spectral complexity of random 3-SAT.
//!
//! The crate generates random 3-SAT instances, solves them with a
//! counting DPLL procedure, builds the adiabatic interpolation
//! Hamiltonian `H(s) = (1 - s) H_b + s H_p` for each instance, computes
//! its full spectrum along the interpolation, and measures how close the
//! unfolded nearest-neighbour spacing statistics are to the Wigner
//! (random-matrix) limit via the Brody parameter.
//!
//! Reference ensembles (GOE/GUE and one-parameter Gaussian processes)
//! validate the statistics pipeline end to end.

pub mod aqc;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod plot;
pub mod sat;
pub mod seed;
pub mod spectrum;
pub mod stats;

pub use aqc::{AqcSystem, DenseSymmetricMatrix};
pub use error::{Error, Result};
pub use experiment::{ComplexityCurve, CurveRecord, ExperimentConfig, InstanceRecord};
pub use sat::{CnfFormula, Literal, SatResult};
pub use spectrum::{Spectrum, SweepResult};
pub use stats::{BrodyFit, SpacingSample, UnfoldedSpectrum};
