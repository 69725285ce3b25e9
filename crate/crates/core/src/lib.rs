//! Quantitative resilience of driftless linear systems that lose authority
//! over some of their actuators.
//!
//! A system `x⁽ᵏ⁾ = B̄ū` with box-bounded inputs is split into controlled
//! columns `B` and lost columns `C`. The lost inputs `w` take arbitrary values
//! in their box and are observed by the controller. The crate computes the
//! nominal and malfunctioning minimal reach times, their ratio, and the
//! quantitative resilience `r_q` for single-column losses.

pub mod catalog;
pub mod cli;
pub mod ext;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod reach;
pub mod resilience;
pub mod sim;

pub use ext::ExtReal;
pub use model::{load_system, split, ActuatorSplit, Direction, IntegratorSystem, ModelError};
