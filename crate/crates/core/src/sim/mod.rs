//! Seeded discrete-event simulation of the protocols over trust domains.
//!
//! A single-threaded loop pops events in (tick, sequence) order, so a
//! scenario and its seed fully determine the run. Each domain runs one
//! protocol among its members: key generation followed by signing and
//! transcript gossip, Pedersen sharing with complaints, or AVSS.

pub mod config;
mod engine;
pub mod gossip;
mod queue;
pub mod report;

pub use config::{bundled_scenario, ConfigError, SimConfig};
pub use queue::EventQueue;
pub use report::{SimReport, TraceEvent};

use crate::group::{Backend, Ed25519, Toy};

/// Validates `config` and runs it to quiescence or `max_ticks`.
pub fn run_simulation(config: &SimConfig) -> Result<SimReport, ConfigError> {
    run_simulation_traced(config).map(|(r, _)| r)
}

/// Like [`run_simulation`], also returning the delivered-event log.
pub fn run_simulation_traced(config: &SimConfig) -> Result<(SimReport, Vec<TraceEvent>), ConfigError> {
    config.validate()?;
    Ok(match config.backend {
        Backend::Toy => engine::Engine::<Toy>::new(config).run(),
        Backend::Ed25519 => engine::Engine::<Ed25519>::new(config).run(),
    })
}
