//! Spectral Littlewood–Paley analysis on the periodic box, Besov norms and
//! interpolation inequalities, pseudospectral fluid solvers, and monitors that
//! track blow-up/extension criteria along simulated trajectories.
//!
//! The whole-space setting of the underlying theory is replaced by the torus
//! `[0, 2π)^d`: every estimate used here is frequency-local, so the dyadic
//! machinery carries over unchanged.

pub mod besov;
pub mod corpus;
pub mod error;
pub mod extension;
pub mod field;
pub mod grid;
pub mod inequalities;
pub mod littlewood_paley;
pub mod monitor;
pub mod serde_ext;
pub mod systems;
pub mod timeseries;
pub mod trajectory;
pub mod verify;

pub use besov::{besov_norm, besov_sequence, BesovParams, BesovSequence};
pub use error::{Error, Result};
pub use field::{Derivative, SpectralField};
pub use grid::{make_grid, Grid};
pub use littlewood_paley::{
    bernstein_ratio, build_cutoffs, low_pass, lp_block, Band, CutoffPair, DyadicDecomposition,
};
