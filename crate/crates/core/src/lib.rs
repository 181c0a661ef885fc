//! Coupled-mode solver for the Laplace equation in 2D strip-like domains with
//! nonplanar boundaries.
//!
//! The solver expands the field in an enhanced vertical basis: the local
//! Sturm-Liouville eigenfunctions of a reference waveguide augmented by two
//! polynomial boundary modes. The horizontal modal amplitudes satisfy a
//! coupled-mode system which is discretized with fourth-order periodic finite
//! differences and solved as a sparse banded linear system. The surface
//! Dirichlet-to-Neumann map is then available from a single modal amplitude.
//!
//! Crate layout:
//! - [`geometry`]: strip domains and boundary profiles
//! - [`eigensystem`]: local dispersion roots, eigenfunctions and their derivatives
//! - [`basis`]: boundary modes and the unified vertical-basis evaluation
//! - [`expansion`]: modal analysis/synthesis of vertical sections
//! - [`ccms`]: assembly and solution of the coupled-mode system
//! - [`dtn`]: Dirichlet-to-Neumann traces
//! - [`oracle`]: independent sigma-coordinate finite-difference solver
//! - [`benchmarks`]: reference field, error metrics, convergence studies

pub mod basis;
pub mod benchmarks;
pub mod ccms;
pub mod dtn;
pub mod eigensystem;
pub mod error;
pub mod expansion;
pub mod fit;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod quadrature;
pub mod stencil;

pub use basis::BasisEval;
pub use ccms::{CcmsCoefficients, TruncatedSystem};
pub use dtn::DtnTrace;
pub use eigensystem::{EigenDerivatives, LocalEigenvalues, ReferenceParams, Station};
pub use error::CcmtError;
pub use expansion::ModalField;
pub use geometry::{Profile, StripGeometry};
pub use oracle::SigmaGridSolution;
