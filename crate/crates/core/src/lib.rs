//! Binary particle swarm optimization for weighted Max-Sat.
//!
//! The crate is organised bottom-up:
//!
//! * [`wcnf`] holds the weighted CNF model, DIMACS WCNF I/O, a seeded
//!   instance generator and an exhaustive oracle for small instances.
//! * [`bpso`] is the binary swarm itself: sigmoid binarization, inertia
//!   schedule, velocity clamping, stagnation-based convergence and the
//!   guaranteed-convergence update for the best particle.
//! * [`topology`] provides the four neighborhoods (global best, ring,
//!   square grid, adaptive hierarchy).
//! * [`stats`] implements one-way ANOVA and the table arithmetic.
//! * [`harness`] runs repeated seeded trials over a plan and aggregates them.

pub mod bpso;
pub mod harness;
pub mod rng;
pub mod stats;
pub mod topology;
pub mod wcnf;

pub use bpso::{run, Particle, RunResult, SwarmConfig, SwarmError, SwarmState};
pub use harness::{Algorithm, ExperimentPlan, ExperimentReport, HarnessError};
pub use stats::{AlgorithmRuns, AnovaResult, StatsError};
pub use topology::{Topology, TopologyKind, TopologyParams};
pub use wcnf::{Assignment, Clause, WcnfError, WcnfInstance};
