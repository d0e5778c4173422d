//! Mesh-free solver for Dirichlet boundary-value problems on point-cloud
//! boundaries.
//!
//! The boundary of the domain is given only as a finite set of points with
//! prescribed solution values. The trial solution combines two parts:
//!
//! * a one-hidden-layer sigmoidal perceptron ([`mlp::MlpParams`]) that
//!   carries the bulk of the approximation, and
//! * a Gaussian radial-basis layer anchored at the boundary points
//!   ([`rbf::BoundarySet`]) whose coefficients are solved from a symmetric
//!   positive-definite linear system so the boundary values are matched
//!   exactly at those points.
//!
//! Training minimizes the squared PDE residual over a set of interior
//! collocation points with box-constrained BFGS, in two phases: a penalty
//! formulation first, then the exactly-constrained coupled model starting
//! from the penalty optimum ([`optim::two_phase_train`]).
//!
//! [`problems`] ships five ready-made Poisson benchmarks with analytic
//! solutions; [`geometry`] provides the point-cloud constructions behind
//! them.

pub mod error;
pub mod geometry;
pub mod mlp;
pub mod optim;
pub mod pde;
pub mod problems;
pub mod rbf;

pub use error::{Error, Result};
pub use geometry::{PointCloud, PointTag};
pub use mlp::MlpParams;
pub use optim::{TrainConfig, TrainReport, Termination, two_phase_train};
pub use pde::{CollocationGrid, DifferentialOperator, ProblemSpec, SolutionMode, TrialSolution};
pub use problems::{BenchmarkCase, CaseId};
pub use rbf::{BoundarySet, CholeskyFactor};

/// Caps the size of the global worker pool used for parallel point
/// sweeps (accuracy maps, manufactured-solution checks). `None` keeps
/// the default of one worker per available core. Calling this after the
/// pool already exists has no effect.
pub fn configure_threads(limit: Option<usize>) {
    if let Some(n) = limit {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
