//! Overconvergent generalized eigenforms attached to critical CM forms.

pub mod classical;
pub mod cmforms;
pub mod dirichlet;
pub mod padic;
pub mod qseries;
pub mod eigen;
pub mod katz;
pub mod pipeline;
pub mod cli;
pub mod verify;

pub use cmforms::{CMSpec, StabilizedForm};
pub use eigen::{Convention, GeneralizedEigenData, ModMatrix};
pub use katz::KatzSystem;
pub use padic::{Modulus, ResidueInt};
pub use pipeline::{run, RunConfig, RunResult};
pub use qseries::QSeries;
pub use verify::VerificationReport;
