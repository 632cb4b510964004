//! Entanglement distribution from a quantum base station to ground users
//! through a reconfigurable intelligent surface (RIS) over free-space
//! optical links.
//!
//! The crate covers the channel statistics (atmospheric loss, Gamma-Gamma
//! turbulence, pointing error), the link success probability, the
//! Bell-diagonal noise model, the network utility and fairness metrics,
//! and a simulated-annealing solver for joint RIS placement and rate
//! allocation, plus the scenario runner used by the `risqn` CLI.

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod geometry;
pub mod link;
pub mod network;
pub mod optimizer;
pub mod scenario;
pub mod specfun;

pub use error::{Error, Result};
