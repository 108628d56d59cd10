//! Time-adapted Meyer wavelets and mild solutions of the incompressible Navier-Stokes
//! equations on the periodic box.
//!
//! The crate covers the spectral calculus on the torus ([`spectral`]), orthonormal Meyer
//! frames with heat-matched index sets ([`meyer`]), the wavelet-side solution norms
//! ([`norms`]), the Duhamel operators and their kernels ([`kernels`], [`duhamel`]), the
//! paraproduct split of the bilinear term ([`paraproduct`]), heat-flow experiments
//! ([`heat`]), decay-bound certification ([`estimates`], [`suites`]), the Picard solver
//! ([`solver`]), report output ([`io`]) and the command line ([`cli`]).

pub mod cli;
pub mod duhamel;
pub mod error;
pub mod estimates;
pub mod fft;
pub mod heat;
pub mod io;
pub mod kernels;
pub mod mesh;
pub mod meyer;
pub mod norms;
pub mod paraproduct;
pub mod solver;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
