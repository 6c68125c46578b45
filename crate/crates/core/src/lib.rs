//! Deterministic, seeded simulation and analysis library for
//! self-organizing resource allocation in small-cell networks.
//!
//! The library models channel selection and user association as graphical
//! games over a geometric interference graph, runs distributed learning
//! dynamics under restricted information (learning automata, best response,
//! stateless Q-learning, staged hierarchical Q-learning), and analyzes the
//! outcomes against exhaustive oracles (Nash-equilibrium enumeration,
//! welfare optimization, exact-potential verification).
//!
//! Everything is driven by explicit `u64` seeds: the same seed and
//! parameters reproduce topologies, runs, and experiment artifacts
//! bit-for-bit.

pub mod analysis;
pub mod error;
pub mod game;
pub mod games;
pub mod harness;
pub mod learning;
pub mod net;
pub mod seeding;
pub mod utility;

pub use error::{Error, Result};
pub use game::{
    best_response, enumerate_pure_ne, exhaustive_optimum, is_pure_ne, verify_potential_cycles,
    ActionProfile, Game, MixedProfile, PayoffNormalizer, TieBreak, Welfare,
};
pub use net::{generate_topology, Cell, NetworkTopology, SapUserTopology, TopologyParams};
pub use utility::{qoe_level, shannon_rate, QoeLevel, RadioParams, TrafficClass};
