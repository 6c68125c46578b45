//! Distributed multiuser learning dynamics under the information
//! constraints of the modeled networks: fully uncoupled (a player sees only
//! its own action and realized payoff), partially uncoupled (neighbor
//! actions observable), and staged hierarchical variants.

pub mod br;
pub mod q;
pub mod sla;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::game::ActionProfile;

pub use br::{run_best_response, BrParams, BrSchedule};
pub use q::{run_hierarchical_q, run_q_learning_simultaneous, HierarchicalQParams, QOutcome, QParams};
pub use sla::{run_sla, sla_update, SlaOutcome, SlaParams};

/// One recorded iteration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub actions: Vec<usize>,
    /// Raw realized payoffs (pre-normalization).
    pub payoffs: Vec<f64>,
    /// Which players observed a payoff this period.
    pub active: Vec<bool>,
}

/// Trajectory and convergence metadata of one seeded run.
///
/// `convergence_iteration` counts decision periods executed until the
/// dynamics' convergence test fired (algorithm-specific: probability
/// concentration for the automata, a no-move sweep for best response, a
/// stable greedy profile for Q-learning); `None` when the horizon ran out
/// first. Wall-clock time is informational only and deliberately excluded
/// from comparisons and serialized artifacts, which must be byte-identical
/// across re-runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub iterations_run: u64,
    pub convergence_iteration: Option<u64>,
    pub final_profile: ActionProfile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceStep>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.iterations_run == other.iterations_run
            && self.convergence_iteration == other.convergence_iteration
            && self.final_profile == other.final_profile
            && self.trace == other.trace
    }
}
