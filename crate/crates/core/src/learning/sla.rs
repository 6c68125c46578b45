//! Stochastic learning automata with the linear reward-inaction update.
//!
//! Fully uncoupled: each player keeps a probability vector over its own
//! actions and updates it from nothing but its own realized payoff,
//! normalized into [0, 1]:
//!
//! p_{n,a}(k+1) = p_{n,a}(k) + b * r(k) * (1{a = a_n(k)} - p_{n,a}(k))
//!
//! Players that observed no payoff this period (inactive cells) leave
//! their vectors untouched.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, PayoffNormalizer};
use crate::learning::{RunRecord, TraceStep};
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlaParams {
    pub horizon: u64,
    /// Step size b in (0, 1).
    pub step_size: f64,
    /// Declared converged when every player puts at least this much mass
    /// on one action.
    pub convergence_threshold: f64,
    pub record_trace: bool,
}

impl Default for SlaParams {
    fn default() -> Self {
        SlaParams { horizon: 5_000, step_size: 0.1, convergence_threshold: 0.99, record_trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct SlaOutcome {
    pub record: RunRecord,
    /// Final per-player action distributions.
    pub mixed: MixedProfile,
}

/// One linear reward-inaction update in place.
pub fn sla_update(probs: &mut [f64], chosen: usize, step_size: f64, payoff: f64) {
    debug_assert!((0.0..1.0).contains(&step_size) && step_size > 0.0);
    debug_assert!((0.0..=1.0).contains(&payoff));
    let gain = step_size * payoff;
    for (a, p) in probs.iter_mut().enumerate() {
        let indicator = (a == chosen) as u8 as f64;
        *p += gain * (indicator - *p);
    }
    debug_assert!({
        let sum: f64 = probs.iter().sum();
        (sum - 1.0).abs() <= MixedProfile::SIMPLEX_TOLERANCE && probs.iter().all(|&p| p >= 0.0)
    });
}

/// Runs the automata on `game` with the game's own payoff normalizer.
pub fn run_sla(game: &dyn Game, params: &SlaParams, seed: u64) -> Result<SlaOutcome> {
    run_sla_with(game, params, seed, &game.payoff_normalizer())
}

pub fn run_sla_with(
    game: &dyn Game,
    params: &SlaParams,
    seed: u64,
    normalizer: &PayoffNormalizer,
) -> Result<SlaOutcome> {
    if !(params.step_size > 0.0 && params.step_size < 1.0) {
        return Err(Error::config(format!(
            "step_size: must lie in (0, 1), got {}",
            params.step_size
        )));
    }
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let mut mixed = MixedProfile::uniform(game);
    let n = game.num_players();
    let mut trace = Vec::new();
    let mut convergence_iteration = None;
    let mut iterations_run = 0;

    for k in 0..params.horizon {
        let profile = mixed.sample(&mut rng);
        let realization = game.realize(&profile, &mut rng);
        for p in 0..n {
            if !realization.active[p] {
                continue;
            }
            let payoff = normalizer.normalize(p, realization.payoffs[p])?;
            sla_update(mixed.row_mut(p), profile.action(p), params.step_size, payoff);
        }
        if params.record_trace {
            trace.push(TraceStep {
                actions: profile.as_slice().to_vec(),
                payoffs: realization.payoffs.clone(),
                active: realization.active.clone(),
            });
        }
        iterations_run = k + 1;
        let concentrated = (0..n).all(|p| {
            mixed.row(p).iter().cloned().fold(0.0, f64::max) >= params.convergence_threshold
        });
        if concentrated {
            convergence_iteration = Some(iterations_run);
            break;
        }
    }

    Ok(SlaOutcome {
        record: RunRecord {
            seed,
            iterations_run,
            convergence_iteration,
            final_profile: mixed.greedy(),
            trace,
            wall_clock: start.elapsed(),
        },
        mixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{ActionProfile, TableGame};
    use crate::seeding::rng_from_seed;
    use rand::Rng;

    #[test]
    fn single_update_from_uniform_matches_hand_computation() {
        let mut probs = vec![0.5, 0.5];
        sla_update(&mut probs, 0, 0.1, 1.0);
        assert!((probs[0] - 0.55).abs() < 1e-15);
        assert!((probs[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn dominant_action_absorbs_single_player() {
        // One player, two actions with payoffs 1 and 0.
        let g = TableGame::from_fn(vec![2], |_, prof| if prof.action(0) == 1 { 1.0 } else { 0.0 });
        let out = run_sla(&g, &SlaParams::default(), 11).unwrap();
        assert!(out.record.convergence_iteration.is_some());
        assert_eq!(out.record.final_profile, ActionProfile::new(vec![1]));
        assert!(out.mixed.row(0)[1] >= 0.99);
    }

    #[test]
    fn simplex_invariants_hold_across_a_million_random_updates() {
        let mut rng = rng_from_seed(2024);
        let mut probs = vec![0.25; 4];
        for _ in 0..1_000_000 {
            let chosen = rng.gen_range(0..4);
            let b = rng.gen_range(1e-3..0.999);
            let r = rng.gen::<f64>();
            sla_update(&mut probs, chosen, b, r);
            debug_assert!(true); // the update itself asserts in debug builds
        }
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "sum drifted to {sum}");
        assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn payoff_outside_unit_interval_is_a_contract_violation() {
        let g = TableGame::from_fn(vec![2, 2], |_, _| 1.5);
        let err = run_sla(&g, &SlaParams::default(), 1).unwrap_err();
        assert!(matches!(err, Error::PayoffOutOfRange { .. }));
    }

    #[test]
    fn identical_seeds_reproduce_records_bit_for_bit() {
        let g = TableGame::from_fn(vec![2, 3], |p, prof| {
            0.2 + 0.1 * ((prof.action(0) + 2 * prof.action(1) + p) % 5) as f64
        });
        let params = SlaParams { horizon: 500, record_trace: true, ..SlaParams::default() };
        let a = run_sla(&g, &params, 42).unwrap();
        let b = run_sla(&g, &params, 42).unwrap();
        assert_eq!(a.record, b.record);
        assert_eq!(a.mixed, b.mixed);
        let c = run_sla(&g, &params, 43).unwrap();
        assert_ne!(a.record, c.record);
    }

    #[test]
    fn invalid_step_size_is_rejected() {
        let g = TableGame::from_fn(vec![2], |_, _| 0.5);
        for b in [0.0, 1.0, -0.2, 1.7] {
            let params = SlaParams { step_size: b, ..SlaParams::default() };
            assert!(run_sla(&g, &params, 1).is_err(), "b = {b}");
        }
    }

    #[test]
    fn nine_cell_robust_game_reaches_equilibria_of_the_expected_game() {
        // At least 95 of 100 seeded runs must end at a pure NE of the
        // expected-utility game.
        use crate::games::spectrum::{build_spectrum_game, SatisfactionKind, SpectrumAccessGameSpec};
        use crate::net::{generate_topology, PerCell, TopologyParams};
        let params = TopologyParams {
            n_cells: 9,
            active_prob: PerCell::Scalar(0.5),
            ..TopologyParams::default()
        };
        let topo = generate_topology(12, &params).unwrap();
        let mut spec = SpectrumAccessGameSpec::new(topo, SatisfactionKind::InterferenceCost);
        spec.robust = true;
        let game = build_spectrum_game(spec).unwrap();
        let params =
            SlaParams { horizon: 12_000, step_size: 0.04, ..SlaParams::default() };
        let hits: usize = (0..100u64)
            .filter(|&seed| {
                let out = run_sla(&game, &params, seed).unwrap();
                crate::game::is_pure_ne(&game, &out.record.final_profile, crate::game::NE_TOLERANCE)
            })
            .count();
        assert!(hits >= 95, "only {hits}/100 runs ended at an equilibrium");
    }
}
