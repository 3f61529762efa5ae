//! Numerical laboratory for the nodal statistics of random spherical
//! harmonics on the m-sphere.
//!
//! The crate is organised bottom up:
//!
//! * [`specfun`] normalized ultraspherical polynomials, Bessel functions,
//!   Hilb's approximation and the moment integrals of `Q_n^m`.
//! * [`geometry`] sphere volumes, the pushforward measure `mu`, parallel
//!   transport frames and the icosphere mesh.
//! * [`covariance`] the two-point function and the covariance matrices of
//!   `(f(x), f(y), grad f(x), grad f(y))`.
//! * [`moments`] expectation and second-moment integrals for the Leray
//!   measure and the nodal volume.
//! * [`ensemble`] samplers for random eigenfunctions on S^2 and for the
//!   isotropic Gaussian field on small point sets in any dimension.
//! * [`nodal`] nodal line extraction on meshes, Leray estimators and the
//!   Monte Carlo experiment driver.

pub mod covariance;
pub mod ensemble;
mod error;
pub mod geometry;
pub mod linalg;
pub mod moments;
pub mod nodal;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use specfun::SphereModel;
