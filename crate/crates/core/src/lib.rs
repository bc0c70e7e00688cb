//! Numerical laboratory for the soft edge of random-matrix spectra.
//!
//! * [`spectra`]: Airy-operator eigenvalues, semicircle classical locations,
//!   the effective potential ξ and the noiseless Riccati flow.
//! * [`riccati`]: the stochastic Airy diffusion and its blow-up counts.
//! * [`tridiag`]: tridiagonal Gaussian β-ensembles, Sturm counts, edge
//!   eigenvalues, eigenvectors and decay/rigidity diagnostics.
//! * [`measures`]: signed empirical measures and the bounded-Lipschitz
//!   distance.
//! * [`ratefn`]: large-deviation rate functionals and log-energies.
//! * [`kpz`]: Laplace-transform product estimators and lower-tail bounds.
//! * [`harness`]: seeded Monte Carlo experiments and the command line.

pub mod error;
pub mod harness;
pub mod kpz;
pub mod measures;
pub mod quad;
pub mod ratefn;
pub mod report;
pub mod riccati;
pub mod rng;
pub mod spectra;
pub mod stats;
pub mod tridiag;

pub use error::{Error, Result};
