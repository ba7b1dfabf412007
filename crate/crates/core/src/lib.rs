//! Power-grid topology analysis and PLC network-planning toolkit.
//!
//! The crate is organized around a single substrate, [`grid::GridGraph`]:
//! buses and branches with electrical parameters, loaded from plain-text
//! edge lists. Everything else is a pure function of it:
//!
//! - [`grid`] — data model, file ingestion, incidence/admittance/Laplacian
//!   matrix assembly.
//! - [`metrics`] — graph-theoretic characterization: average degree and
//!   path length, degree assortativity, algebraic connectivity, clustering,
//!   degree/spectral/branch-length distributions.
//! - [`powerflow`] — phasor bus quantities (`YV = I`, `S = V ⊙ I*`), the
//!   power-flow Jacobian, and the five steady-state operating constraints.
//! - [`channel`] — PLC channel models: multipath transfer function and
//!   impulse response, ABCD two-port cascades with bridged-tap companion
//!   sections, per-km path-loss tables, and log-normal gain statistics.
//! - [`planner`] — synthetic distribution-topology generation and
//!   link-budget coverage planning with greedy repeater placement.
//!
//! All deterministic operations are pure functions of immutable inputs;
//! stochastic ones take an explicit seed and reproduce exactly.

pub mod channel;
pub mod grid;
pub mod metrics;
pub mod planner;
pub mod powerflow;

pub use grid::{Branch, BranchKind, BranchStatus, Bus, BusId, BusRole, GridGraph};
