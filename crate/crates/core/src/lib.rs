//! Joint spatial division and multiplexing (JSDM) for directional
//! multi-antenna downlink channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`angular`]: interval-set algebra on the spatial-frequency circle.
//! - [`channel`]: array geometry, covariances, eigenvalue spectra, channel draws.
//! - [`grouping`]: conflict graph and user selection (greedy and exhaustive).
//! - [`precoding`]: approximate block diagonalisation, zero forcing and
//!   covariance-only beamformers.
//! - [`generate`]: random multi-cluster and sparse multipath scenarios.
//! - [`eval`]: Monte Carlo sum spectral efficiency over SNR sweeps.
//! - [`io`]: scenario files, MPC CSV import and results export.

pub mod angular;
pub mod channel;
pub mod error;
pub mod eval;
pub mod generate;
pub mod grouping;
pub mod io;
pub mod linalg;
pub mod precoding;
pub mod quadrature;

pub use error::{Error, Result};
