//! Curvature of qubit evolution driven by a time-dependent magnetic field.
//!
//! The state `|psi(t)>` of a spin-1/2 in the field `h(t)` (Hamiltonian
//! `H = h0 I + h . sigma`, `hbar = 1`) traces a curve on the Bloch sphere.
//! This crate computes its speed, acceleration and curvature coefficient by
//! three independent routes, the speed and geodesic efficiencies, and the
//! transport phase, and cross-checks all of them against integrated dynamics.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod qubit;
pub mod series;
pub mod special;
pub mod validate;

pub use error::{Error, Result};
pub use fields::{FieldSample, FieldSpec, ScenarioParams};
pub use geometry::{ExtremaSummary, GeometryRecord};
pub use qubit::{BlochVector, PauliDecomp, QubitState};
