//! Deterministic bi-directional pedestrian flow on an occupancy grid.
//!
//! Two groups start in bands at opposite edges of the grid and walk towards
//! the far side. Each step every agent scores its eight neighbors, picks a
//! cell, and contested cells admit one agent at random. Movement follows
//! either the least-effort model ([`lem`]) or an ant-system variant with
//! per-group pheromone layers ([`aco`]).
//!
//! All randomness comes from the keyed generator in [`rng`], so the
//! sequential and parallel executors in [`engine`] yield identical worlds.

pub mod aco;
pub mod config;
pub mod engine;
pub mod error;
pub mod grid;
pub mod lem;
pub mod metrics;
pub mod rng;
pub mod state;

pub use aco::{AcoParams, PheromoneField};
pub use config::{ExecutorKind, Model, Policy, ScenarioConfig};
pub use engine::{run, run_with, Engine};
pub use error::{Error, Result};
pub use grid::{AgentRecord, CellState, Direction, DistanceTable, Group, Neighborhood};
pub use lem::{CandidateScores, Decision, LemParams};
pub use metrics::{aggregate, proportion_test, CrossedSample, RunReport, StepReport, SweepReport};
pub use rng::{Phase, RngKey};
pub use state::{new_environment, SimState};
