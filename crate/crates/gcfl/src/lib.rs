//! Workbench for free motion constrained to 2D surfaces f(x) = 0: the
//! generalized centripetal force law and its specialized forms, the
//! curvature quantities feeding it, the dummy-factor differential equations
//! that make geometric momentum and geometric potential compatible with
//! canonical quantization, and a numerical lab for the corresponding
//! operator commutator identities on discretized charts.
//!
//! Everything here is a pure function of immutable inputs; evaluators can be
//! called concurrently without shared state.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod math;
pub mod oplab;
pub mod qfactor;
pub mod report;
pub mod surface;

pub use error::{Error, Result};
pub use math::Vec3;
