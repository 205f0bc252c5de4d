//! Channel-flow laboratory for oscillatory perturbations of plane Couette
//! flow: a pseudospectral 2D Navier–Stokes solver, Rayleigh and
//! Orr–Sommerfeld spectra, and transient-growth diagnostics.

pub mod artifact;
pub mod cheb;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod fourier;
pub mod grid;
pub mod run;
pub mod shear;
pub mod solver;
pub mod spectrum;
pub mod sweep;
pub mod validation;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub use field::{divergence, integrate, l2_norm, vorticity, FlowField, ScalarField};
pub use grid::{make_grid, ChannelGrid};
pub use shear::{DriftState, ShearProfile};
pub use solver::{BcMode, DtPolicy, Solver, SolverParams, SolverState};
