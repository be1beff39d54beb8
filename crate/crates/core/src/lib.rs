//! Randomized Euler scheme for delay differential equations
//! `x'(t) = f(t, x(t), x(t - tau))` whose right-hand side may be only
//! integrable in `t`, together with Monte Carlo error estimation,
//! convergence-order fits and a priori bound checks.
//!
//! ```
//! use dde_core::{derive_stream, randomized_euler, DdeProblem};
//!
//! let problem = DdeProblem::scalar(|t, _x, z| 3.0 * z * (2.0 * t).sin(), 1.0, 1, 1.0).unwrap();
//! let mut stream = derive_stream(42, "example", &[]);
//! let traj = randomized_euler(&problem, 64, &mut stream).unwrap();
//! assert_eq!(traj.get(1, 0), traj.get(0, 64));
//! ```

pub mod analysis;
pub mod brownian;
pub mod error;
pub mod io;
pub mod mesh;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod solver;
pub mod svg;

pub use analysis::{
    bound_certificate, check_bounds, check_holder, compare_schemes, fit_slopes, mc_error, run_experiment, Aggregate,
    BoundCertificate, ErrorTable, ExperimentConfig, McConfig, ReferenceSpec, SlopeFit, SlopeReport,
};
pub use brownian::{brownian_path, PiecewisePath};
pub use error::{Error, Result};
pub use mesh::{Mesh, Trajectory};
pub use problem::{DdeProblem, RightHandSide, ScalarFn, VectorFn};
pub use problems::{k_weight, kainhofer_exact, PresetKind, PresetParams, ProblemPreset};
pub use rng::{derive_stream, sample_theta, RandomStream, ReplayUniforms, UniformSource};
pub use solver::{classical_euler, randomized_euler, solve, solve_pair, Scheme, SolverConfig};
