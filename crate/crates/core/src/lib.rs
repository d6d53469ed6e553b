//! Characteristic function of quantum nonlocal correlation.
//!
//! A local projective measurement on subsystem A steers subsystem B into a
//! conditional state. The characteristic function records how strongly that
//! conditional state responds (in trace norm) to infinitesimal changes of the
//! measurement. Averaging its magnitude over all measurements, weighted by
//! the outcome probability, gives the strength `G`; comparing `G` of a state
//! against the best `G` reachable by productizing its pure-state
//! decompositions gives the entanglement quantity `E`.
//!
//! Modules, bottom-up:
//!
//! - [`states`]: canonical examples and seeded random ensembles
//! - [`linalg`]: density matrices, partial traces, trace norms, local unitaries
//! - [`su_basis`]: generalized Gell-Mann bases and Bloch vectors
//! - [`measurement`]: hyperspherical projector parameterization and measure
//! - [`tomography`]: reconstruction from projective statistics
//! - [`characteristic`]: conditional states and the characteristic function
//! - [`strength`]: the strength functional `G`
//! - [`entanglement`]: decompositions, productization, `E` and `E_s`
//! - [`optimize`]: the simplex search behind `E`
//! - [`steering`]: steering surfaces and the main-normal separability test
//! - [`io`]: state files, CSV and JSON emitters

pub mod characteristic;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod optimize;
pub mod states;
pub mod steering;
pub mod strength;
pub mod su_basis;
pub mod tomography;

pub use error::{QncError, Result};
pub use linalg::{CMatrix, CVector, DensityMatrix, Subsystem};
pub use measurement::{MeasurementParams, ParamIndex, Projector};
pub use strength::{Direction, IntegratorConfig, StrengthResult};
