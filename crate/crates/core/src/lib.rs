//! Pseudospectral simulation of two-dimensional infinite-depth gravity water
//! waves between vertical walls, in Riemannian variables on the periodic
//! reference interval `[-1, 1)`.
//!
//! The numerical core is generic over the scalar type ([`Real`] covers
//! `f32` and `f64`); the aliases below fix it to `f64`, which every check
//! and the CLI use.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod initdata;
pub mod kernels;
pub mod scalar;
pub mod spectral;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub use energy::{characterization, energy, CharacterizationReport, EnergyReport};
pub use evolution::{run, RunConfig, RunOutput, RunSummary, Snapshot};
pub use grid::PeriodicGrid;
pub use initdata::{make_ic, make_ic_on, CrestLocation, InitialData};
pub use spectral::{ProductRule, Side, SpectralField};
pub use state::{derive, DerivedState, InterfaceState, StateOptions, Tolerances};
pub use verify::{CheckRecord, VerifyReport};

pub type Field = SpectralField<f64>;
pub type Grid = PeriodicGrid<f64>;
pub type State = InterfaceState<f64>;
pub type Derived = DerivedState<f64>;
