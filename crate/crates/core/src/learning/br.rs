//! Asynchronous best-response dynamics with inertia: players update one at
//! a time (round-robin by id, or a seeded random order per sweep) and move
//! only on a strict improvement, so a sweep without moves certifies a pure
//! Nash equilibrium. Requires deterministic (expectation-valued) utilities
//! and neighbor-action observability; no realized payoffs are drawn.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{ActionProfile, Game, TieBreak};
use crate::learning::{RunRecord, TraceStep};
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrSchedule {
    RoundRobin,
    RandomSeeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrParams {
    /// Maximum number of full sweeps.
    pub horizon: u64,
    pub schedule: BrSchedule,
    pub tie_break: TieBreak,
    /// Starting profile; drawn uniformly at random when absent.
    pub init: Option<ActionProfile>,
    pub record_trace: bool,
}

impl Default for BrParams {
    fn default() -> Self {
        BrParams {
            horizon: 200,
            schedule: BrSchedule::RoundRobin,
            tie_break: TieBreak::LowestIndex,
            init: None,
            record_trace: false,
        }
    }
}

/// Runs best-response dynamics. `convergence_iteration` is the 0-based
/// index of the first sweep in which nobody moved (starting at an
/// equilibrium therefore reports 0); `None` when the horizon ran out while
/// moves were still happening.
pub fn run_best_response(game: &dyn Game, params: &BrParams, seed: u64) -> Result<RunRecord> {
    let start = Instant::now();
    let n = game.num_players();
    let mut rng = rng_from_seed(seed);
    let mut profile = match &params.init {
        Some(p) => {
            crate::game::validate_profile(game, p)?;
            p.clone()
        }
        None => ActionProfile::new((0..n).map(|p| rng.gen_range(0..game.num_actions(p))).collect()),
    };

    let mut trace = Vec::new();
    let mut convergence_iteration = None;
    let mut iterations_run = 0;
    let ids: Vec<usize> = (0..n).collect();

    for sweep in 0..params.horizon {
        let order: Vec<usize> = match params.schedule {
            BrSchedule::RoundRobin => ids.clone(),
            BrSchedule::RandomSeeded => {
                let mut o = ids.clone();
                o.shuffle(&mut rng);
                o
            }
        };
        let mut moved = false;
        for &p in &order {
            if let Some(better) = strict_improvement(game, &profile, p, params.tie_break) {
                profile.set(p, better);
                moved = true;
            }
        }
        iterations_run = sweep + 1;
        if params.record_trace {
            trace.push(TraceStep {
                actions: profile.as_slice().to_vec(),
                payoffs: (0..n).map(|p| game.utility(p, &profile)).collect(),
                active: vec![true; n],
            });
        }
        if !moved {
            convergence_iteration = Some(sweep);
            break;
        }
    }

    Ok(RunRecord {
        seed,
        iterations_run,
        convergence_iteration,
        final_profile: profile,
        trace,
        wall_clock: start.elapsed(),
    })
}

/// The strictly improving action of `player`, when one exists: the
/// tie-break argmax among the maximizers, or `None` if the current action
/// is already maximal (inertia keeps ties in place, which makes
/// no-move sweeps equivalent to pure-NE membership).
fn strict_improvement(
    game: &dyn Game,
    profile: &ActionProfile,
    player: usize,
    tie_break: TieBreak,
) -> Option<usize> {
    let current = game.utility(player, profile);
    let best = crate::game::best_response(game, profile, player, tie_break);
    let best_value = game.utility(player, &profile.with(player, best));
    (best_value > current).then_some(best)
}

/// Convenience: checks the terminal profile against `is_pure_ne`.
pub fn terminated_at_ne(game: &dyn Game, record: &RunRecord, tolerance: f64) -> bool {
    record.convergence_iteration.is_some()
        && crate::game::is_pure_ne(game, &record.final_profile, tolerance)
}
