//! Construction, validation, flexing, and Gram-set analysis of doubly
//! periodic triangulated surfaces with a deforming period lattice.
//!
//! The crate is organized around the pipeline
//! build -> validate -> seed -> trace -> analyze -> reduce:
//!
//! - [`lattice`]: exact integer arithmetic on the translation lattice.
//! - [`complex`]: the finite torus-quotient data model with shift-labelled
//!   simplices, validation, sublattice refinement, and lift patches.
//! - [`realization`]: positions and periods in 3-space, edge lengths, Gram
//!   matrices, gauge fixing.
//! - [`flex`]: constraint Jacobians, first-order flex spaces, Gauss-Newton
//!   projection, predictor-corrector path tracing.
//! - [`gramset`]: Gram point clouds, branch clustering, local dimension,
//!   algebraic relation fitting.
//! - [`reduction`]: empty-triangle collapses, degree-reducing flips, the
//!   terminating reduction loop, and base-case recognition with the
//!   polarization identity.
//! - [`builders`]: deterministic constructors for the worked examples.
//! - [`io`]: exchange JSON and trajectory CSV formats.

pub mod builders;
pub mod complex;
pub mod flex;
pub mod gramset;
pub mod io;
pub mod lattice;
pub mod poly;
pub mod realization;
pub mod reduction;

pub use complex::{
    CellRange, ComplexError, Corner, Edge, Patch, PeriodicComplex, Refinement, Triangle,
    ValidationReport, Violation,
};
pub use flex::{Configuration, FlexPath, FlexSample, FlexSpace, SolverSettings, StopReason};
pub use gramset::{GramCloud, GramSample, PolyRelation};
pub use lattice::{LatticeMatrix, LatticeVector};
pub use realization::{EdgeLengths, GaugeFrame, GramMatrix, Realization};
pub use reduction::{
    BaseCaseStructure, Cylinder, DiagonalStrategy, EmptyTriangleWitness, ReductionMove,
    ReductionTrace,
};
