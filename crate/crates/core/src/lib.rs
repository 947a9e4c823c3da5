//! Numerical laboratory for blow-up phenomena of fractional stochastic heat
//! equations driven by white or spatially colored Gaussian noise.
//!
//! The crate is organized around the objects the estimates live on:
//!
//! - [`stable_kernel`]: the heat kernel p_t of the symmetric alpha-stable
//!   process, its scaling/monotonicity/two-sided bounds, the deterministic
//!   semigroup on a periodic lattice, and the kernel killed on a ball.
//! - [`correlation`]: the spatial correlation kernels f(x, y) of the noise,
//!   their ball infima K_f, integrability (Dalang-type) verdicts, and the
//!   Riesz-kernel convolution lower bounds.
//! - [`renewal`]: the nonlinear Volterra renewal inequalities behind every
//!   blow-up argument - closed-form blow-up times, thresholds, the exponent
//!   reduction, and a product-integration solver used as an oracle.
//! - [`field_sim`]: lattice discretization of the mild equation -
//!   white/colored noise sampling, exponential-Euler stepping through the
//!   stable semigroup, truncation stopping times, free and killed dynamics.
//! - [`moments`]: Monte Carlo moment estimation, blow-up proxies from
//!   truncation-hit statistics, parameter sweeps, and the linear-case
//!   Volterra oracle for cross-validation.

pub mod correlation;
pub mod error;
pub mod field_sim;
pub mod lattice;
pub mod moments;
pub mod quad;
pub mod renewal;
pub mod sampling;
pub mod stable_kernel;

pub use error::{Error, Result};
pub use lattice::{Lattice, ScalarField};
pub use stable_kernel::StableKernelSpec;
