//! Uniform approximations of Schrödinger ground states for
//! V(x) = m² x² + g x⁴, and the rapidly convergent multiplicative
//! perturbation theory they generate.
//!
//! The library is organised around the Riccati form of the eigenvalue
//! problem, y′ − y² = E − V with y = −(log ψ)′:
//!
//! - [`model`] — the potential family and its exact coupling-scaling map;
//! - [`quadgrid`] — adaptive Gauss–Kronrod quadrature and sampled functions;
//! - [`trial`] — parameterized trial wavefunctions ψ₀ with analytic y₀, V₀;
//! - [`lpt`] — energy and log-derivative corrections E_k, y_k by quadrature,
//!   with convergence diagnostics;
//! - [`varopt`] — derivative-free minimization of the variational energy;
//! - [`oracle`] — independent finite-difference and shooting eigensolvers;
//! - [`analysis`] — critical couplings, semiclassical scans, energy gaps.

pub mod analysis;
mod error;
pub mod lpt;
pub mod model;
pub mod oracle;
pub mod quadgrid;
pub mod trial;
pub mod varopt;

pub use error::{Error, Result};
pub use lpt::{ConvergenceReport, PerturbationSeries};
pub use model::PotentialSpec;
pub use oracle::OracleSolution;
pub use quadgrid::{Domain, GridFunction, IntegralEstimate, QuadratureConfig};
pub use trial::{ExcitedSpec, FullTrialParams, SimpleTrialParams, TrialFunction};
pub use varopt::{OptimizationProblem, OptimizationResult};
