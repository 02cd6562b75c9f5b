//! Exact weak-order, closure and convexity computations for root systems of Coxeter
//! groups in their geometric representations.
//!
//! Everything that decides anything runs in exact arithmetic over a quadratic field; float
//! shadows exist only for rendering and limit estimates.

#![allow(clippy::needless_range_loop, clippy::large_enum_variant)]

pub mod catalog;
pub mod convexity;
pub mod coxsys;
pub mod imagcone;
pub mod infwords;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod rootstore;
pub mod scalar;
pub mod weakorder;
pub mod windowindex;

pub use coxsys::{CoxeterSystem, Element, SystemError, SystemSpec};
pub use infwords::InfWord;
pub use linalg::{Matrix, Vector};
pub use rootstore::{RootSet, RootStore, Subsystem};
pub use scalar::Scalar;
pub use weakorder::{JoinConfig, JoinVerdict};
