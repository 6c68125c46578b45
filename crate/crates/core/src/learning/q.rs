//! Stateless (single-state) Q-learning per player, fully uncoupled:
//! Q(a) <- (1 - alpha) Q(a) + alpha * r with epsilon-greedy selection and a
//! decaying exploration schedule eps_k = eps0 / (1 + k / tau).
//!
//! Two drivers share one stage engine:
//! - simultaneous: every player learns at once until the joint greedy
//!   profile has been stable for a window of consecutive periods;
//! - hierarchical: headers learn first on the cluster-aggregate payoff,
//!   then cluster members under the header-channel policy, and finally only
//!   the cells on still-conflicting inter-cluster edges.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, PayoffNormalizer, Realization};
use crate::games::cluster::HierarchicalPlan;
use crate::games::spectrum::SpectrumGame;
use crate::learning::{RunRecord, TraceStep};
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QParams {
    pub horizon: u64,
    /// Learning rate alpha in (0, 1].
    pub alpha: f64,
    pub epsilon0: f64,
    pub epsilon_tau: f64,
    /// Converged once the greedy profile of the learning players is
    /// unchanged for this many consecutive periods. The reported
    /// convergence iteration is the period at which that stable profile
    /// first appeared.
    pub stability_window: u64,
    pub record_trace: bool,
}

impl Default for QParams {
    fn default() -> Self {
        QParams {
            horizon: 4_000,
            alpha: 0.4,
            epsilon0: 0.3,
            epsilon_tau: 100.0,
            stability_window: 20,
            record_trace: false,
        }
    }
}

impl QParams {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha: must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.epsilon0 >= 0.0 && self.epsilon0 <= 1.0) {
            return Err(Error::config(format!("epsilon0: must lie in [0, 1], got {}", self.epsilon0)));
        }
        if !(self.epsilon_tau > 0.0) {
            return Err(Error::config(format!("epsilon_tau: must be > 0, got {}", self.epsilon_tau)));
        }
        Ok(())
    }

    fn epsilon(&self, k: u64) -> f64 {
        self.epsilon0 / (1.0 + k as f64 / self.epsilon_tau)
    }
}

#[derive(Debug, Clone)]
pub struct QOutcome {
    pub record: RunRecord,
    /// Per-player Q tables over their full action sets.
    pub q_tables: Vec<Vec<f64>>,
    /// Periods spent per executed stage (one entry for the simultaneous
    /// driver).
    pub stage_iterations: Vec<u64>,
}

/// One independently converging group of learners within a stage (a whole
/// network, one cluster, one residual conflict component). A group freezes
/// on its own once its greedy profile has been stable for the window.
struct LearnerGroup {
    /// Players that learn in this group.
    learners: Vec<usize>,
    /// Allowed action subset per learner (indices into the player's full
    /// action set), aligned with `learners`.
    allowed: Vec<Vec<usize>>,
}

/// Per-stage bookkeeping shared by both drivers.
struct Stage<'a> {
    groups: Vec<LearnerGroup>,
    /// Maps a raw realization to a learner's normalized payoff.
    payoff: &'a dyn Fn(usize, &Realization) -> Result<f64>,
}

struct StageResult {
    /// Periods executed (confirmation windows included).
    iterations: u64,
    converged: bool,
    /// 1-based period at which the last group's stable greedy profile
    /// first appeared; set iff converged.
    stabilized_at: Option<u64>,
    /// Whether the stage had any learners at all.
    executed: bool,
}

fn greedy_allowed(q: &[f64], allowed: &[usize]) -> usize {
    let mut best = allowed[0];
    for &a in allowed {
        if q[a] > q[best] {
            best = a;
        }
    }
    best
}

/// Runs one stage: per period every unfrozen learner picks
/// epsilon-greedily among its allowed actions, the environment realizes
/// payoffs for the full profile, and observing learners update their Q
/// values. Each group freezes at its greedy actions once its own greedy
/// profile has been stable for the window; the stage ends when every group
/// froze (or the horizon ran out).
fn run_stage(
    realize: &dyn Fn(&ActionProfile, &mut ChaCha8Rng) -> Realization,
    stage: &Stage<'_>,
    q: &mut [Vec<f64>],
    profile: &mut ActionProfile,
    params: &QParams,
    rng: &mut ChaCha8Rng,
    trace: &mut Vec<TraceStep>,
) -> Result<StageResult> {
    let groups: Vec<&LearnerGroup> =
        stage.groups.iter().filter(|g| !g.learners.is_empty()).collect();
    if groups.is_empty() {
        return Ok(StageResult { iterations: 0, converged: true, stabilized_at: None, executed: false });
    }
    let mut frozen = vec![false; groups.len()];
    let mut stable = vec![0u64; groups.len()];
    let mut last_greedy: Vec<Option<Vec<usize>>> = vec![None; groups.len()];
    let mut stabilized = vec![0u64; groups.len()];
    let mut iterations = 0;
    for k in 0..params.horizon {
        let eps = params.epsilon(k);
        for (gi, group) in groups.iter().enumerate() {
            if frozen[gi] {
                continue;
            }
            for (li, &p) in group.learners.iter().enumerate() {
                let allowed = &group.allowed[li];
                let a = if rng.gen::<f64>() < eps {
                    allowed[rng.gen_range(0..allowed.len())]
                } else {
                    greedy_allowed(&q[p], allowed)
                };
                profile.set(p, a);
            }
        }
        let realization = realize(profile, rng);
        for (gi, group) in groups.iter().enumerate() {
            if frozen[gi] {
                continue;
            }
            for &p in &group.learners {
                if !realization.active[p] {
                    continue;
                }
                let r = (stage.payoff)(p, &realization)?;
                let a = profile.action(p);
                q[p][a] = (1.0 - params.alpha) * q[p][a] + params.alpha * r;
            }
        }
        if params.record_trace {
            trace.push(TraceStep {
                actions: profile.as_slice().to_vec(),
                payoffs: realization.payoffs.clone(),
                active: realization.active.clone(),
            });
        }
        iterations = k + 1;
        for (gi, group) in groups.iter().enumerate() {
            if frozen[gi] {
                continue;
            }
            let greedy: Vec<usize> = group
                .learners
                .iter()
                .enumerate()
                .map(|(li, &p)| greedy_allowed(&q[p], &group.allowed[li]))
                .collect();
            if last_greedy[gi].as_ref() == Some(&greedy) {
                stable[gi] += 1;
            } else {
                stable[gi] = 0;
                last_greedy[gi] = Some(greedy);
            }
            if stable[gi] + 1 >= params.stability_window {
                for (li, &p) in group.learners.iter().enumerate() {
                    profile.set(p, greedy_allowed(&q[p], &group.allowed[li]));
                }
                frozen[gi] = true;
                stabilized[gi] = iterations + 1 - params.stability_window;
            }
        }
        if frozen.iter().all(|&f| f) {
            return Ok(StageResult {
                iterations,
                converged: true,
                stabilized_at: Some(stabilized.iter().copied().max().unwrap_or(0)),
                executed: true,
            });
        }
    }
    for (gi, group) in groups.iter().enumerate() {
        if !frozen[gi] {
            for (li, &p) in group.learners.iter().enumerate() {
                profile.set(p, greedy_allowed(&q[p], &group.allowed[li]));
            }
        }
    }
    Ok(StageResult { iterations, converged: false, stabilized_at: None, executed: true })
}

fn own_normalized_payoff<'a>(
    normalizer: &'a PayoffNormalizer,
) -> impl Fn(usize, &Realization) -> Result<f64> + 'a {
    move |p, realization| normalizer.normalize(p, realization.payoffs[p])
}

/// All players learn simultaneously on their own normalized payoffs.
pub fn run_q_learning_simultaneous(
    game: &dyn Game,
    params: &QParams,
    seed: u64,
) -> Result<QOutcome> {
    params.validate()?;
    let start = Instant::now();
    let n = game.num_players();
    let mut rng = rng_from_seed(seed);
    let mut profile =
        ActionProfile::new((0..n).map(|p| rng.gen_range(0..game.num_actions(p))).collect());
    let mut q: Vec<Vec<f64>> = (0..n).map(|p| vec![0.0; game.num_actions(p)]).collect();
    let normalizer = game.payoff_normalizer();
    let payoff = own_normalized_payoff(&normalizer);
    let stage = Stage {
        groups: vec![LearnerGroup {
            learners: (0..n).collect(),
            allowed: (0..n).map(|p| (0..game.num_actions(p)).collect()).collect(),
        }],
        payoff: &payoff,
    };
    let mut trace = Vec::new();
    let realize = |prof: &ActionProfile, rng: &mut ChaCha8Rng| game.realize(prof, rng);
    let result = run_stage(&realize, &stage, &mut q, &mut profile, params, &mut rng, &mut trace)?;
    Ok(QOutcome {
        record: RunRecord {
            seed,
            iterations_run: result.iterations,
            convergence_iteration: result.converged.then(|| result.stabilized_at.unwrap_or(0)),
            final_profile: profile,
            trace,
            wall_clock: start.elapsed(),
        },
        q_tables: q,
        stage_iterations: vec![result.iterations],
    })
}

/// Per-stage horizons for the staged run; every stage otherwise shares the
/// base Q parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HierarchicalQParams {
    pub base: QParams,
    pub stage_horizon: u64,
}

impl Default for HierarchicalQParams {
    fn default() -> Self {
        HierarchicalQParams { base: QParams::default(), stage_horizon: 1_500 }
    }
}

/// Staged hierarchical Q-learning on a spectrum game.
///
/// Stage 1: cluster headers learn, members frozen, each header paid the
/// mean normalized payoff of its cluster. Stage 2: members learn under the
/// policy that forbids their header's channel. Stage 3: only cells on
/// inter-cluster edges that still share a channel keep learning (members
/// still policy-masked). When every executed stage converged within its
/// horizon, `convergence_iteration` is the total elapsed period at which
/// the last executed stage's stable profile first appeared.
pub fn run_hierarchical_q(
    game: &SpectrumGame,
    plan: &HierarchicalPlan,
    params: &HierarchicalQParams,
    seed: u64,
) -> Result<QOutcome> {
    params.base.validate()?;
    let start = Instant::now();
    let n = game.num_players();
    let n_channels = game.topology().num_channels();
    let mut rng = rng_from_seed(seed);
    let mut profile =
        ActionProfile::new((0..n).map(|_| rng.gen_range(0..n_channels)).collect());
    let mut q: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0; n_channels]).collect();
    let normalizer = game.payoff_normalizer();
    let stage_params = QParams { horizon: params.stage_horizon, ..params.base.clone() };
    let realize = |prof: &ActionProfile, rng: &mut ChaCha8Rng| game.realize(prof, rng);
    let mut trace = Vec::new();
    let mut total = 0;
    let mut all_converged = true;
    // Total periods elapsed when the last executed stage stabilized.
    let mut stabilized_total: Option<u64> = None;
    let mut stage_iterations = Vec::new();

    // Stage 1: headers on the cluster-aggregate payoff.
    let cluster_of = plan.cluster_of().to_vec();
    let clusters = plan.clusters.clusters.clone();
    let header_payoff = {
        let normalizer = &normalizer;
        let clusters = &clusters;
        let cluster_of = &cluster_of;
        move |p: usize, realization: &Realization| -> Result<f64> {
            let members = &clusters[cluster_of[p]].members;
            let mut sum = 0.0;
            for &m in members {
                sum += normalizer.normalize(m, realization.payoffs[m])?;
            }
            Ok(sum / members.len() as f64)
        }
    };
    let stage1 = Stage {
        groups: vec![LearnerGroup {
            learners: plan.headers().to_vec(),
            allowed: vec![(0..n_channels).collect(); plan.headers().len()],
        }],
        payoff: &header_payoff,
    };
    let r1 = run_stage(&realize, &stage1, &mut q, &mut profile, &stage_params, &mut rng, &mut trace)?;
    if r1.executed {
        stabilized_total = r1.stabilized_at.map(|s| total + s);
        stage_iterations.push(r1.iterations);
    }
    total += r1.iterations;
    all_converged &= r1.converged;

    // Stage 2: members under the header-channel policy. Each cluster's
    // member game converges (and freezes) on its own.
    let own_payoff = own_normalized_payoff(&normalizer);
    let stage2_groups: Vec<LearnerGroup> = (0..clusters.len())
        .map(|ci| {
            let header_channel = profile.action(plan.headers()[ci]);
            let members = plan.members_of(ci);
            let allowed = vec![plan.allowed_channels(header_channel); members.len()];
            LearnerGroup { learners: members, allowed }
        })
        .collect();
    let stage2 = Stage { groups: stage2_groups, payoff: &own_payoff };
    let r2 = run_stage(&realize, &stage2, &mut q, &mut profile, &stage_params, &mut rng, &mut trace)?;
    if r2.executed {
        stabilized_total = r2.stabilized_at.map(|s| total + s);
        stage_iterations.push(r2.iterations);
    }
    total += r2.iterations;
    all_converged &= r2.converged;

    // Stage 3: residual inter-cluster conflict cells, policies still on.
    // Each connected component of the residual conflict graph is its own
    // group.
    let components = plan.stage3_components(&profile);
    if !components.is_empty() {
        let stage3_groups: Vec<LearnerGroup> = components
            .into_iter()
            .map(|learners| {
                let allowed = learners
                    .iter()
                    .map(|&c| {
                        let ci = cluster_of[c];
                        if plan.headers()[ci] == c {
                            (0..n_channels).collect()
                        } else {
                            plan.allowed_channels(profile.action(plan.headers()[ci]))
                        }
                    })
                    .collect();
                LearnerGroup { learners, allowed }
            })
            .collect();
        let stage3 = Stage { groups: stage3_groups, payoff: &own_payoff };
        let r3 =
            run_stage(&realize, &stage3, &mut q, &mut profile, &stage_params, &mut rng, &mut trace)?;
        if r3.executed {
            stabilized_total = r3.stabilized_at.map(|s| total + s);
            stage_iterations.push(r3.iterations);
        }
        total += r3.iterations;
        all_converged &= r3.converged;
    }

    Ok(QOutcome {
        record: RunRecord {
            seed,
            iterations_run: total,
            convergence_iteration: if all_converged { stabilized_total.or(Some(0)) } else { None },
            final_profile: profile,
            trace,
            wall_clock: start.elapsed(),
        },
        q_tables: q,
        stage_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TableGame;
    use crate::games::cluster::{build_hierarchical_stages, cluster_topology};
    use crate::games::spectrum::{build_spectrum_game, SatisfactionKind, SpectrumAccessGameSpec};
    use crate::net::{Cell, Channel, NetworkTopology, Point, Region};

    #[test]
    fn q_update_arithmetic() {
        // Q = 0, r = 1, alpha = 0.5 -> Q = 0.5; the engine's update is the
        // same expression, checked through a 1-player run of one period.
        let g = TableGame::from_fn(vec![1], |_, _| 1.0);
        let params = QParams {
            horizon: 1,
            alpha: 0.5,
            epsilon0: 0.0,
            stability_window: 100,
            ..QParams::default()
        };
        let out = run_q_learning_simultaneous(&g, &params, 0).unwrap();
        assert!((out.q_tables[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn greedy_action_tracks_argmax_payoff_when_exploration_dies() {
        let g = TableGame::from_fn(vec![3], |_, prof| match prof.action(0) {
            0 => 0.2,
            1 => 0.9,
            _ => 0.4,
        });
        let params = QParams { horizon: 2_000, ..QParams::default() };
        let out = run_q_learning_simultaneous(&g, &params, 7).unwrap();
        assert_eq!(out.record.final_profile.action(0), 1);
        assert!(out.record.convergence_iteration.is_some());
    }

    fn six_cell_two_clique_topo() -> NetworkTopology {
        let pts =
            [(10.0, 10.0), (20.0, 10.0), (15.0, 18.0), (80.0, 80.0), (90.0, 80.0), (85.0, 88.0)];
        let cells = pts
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Cell {
                id,
                position: Point::new(x, y),
                tx_power_dbm: 20.0,
                active_prob: 1.0,
            })
            .collect();
        let channels = (0..3).map(|id| Channel { id, bandwidth_hz: 1e6 }).collect();
        NetworkTopology::from_cells(cells, Region::new(100.0, 100.0), channels, 15.0).unwrap()
    }

    #[test]
    fn disconnected_cliques_skip_stage_three() {
        let topo = six_cell_two_clique_topo();
        let game = build_spectrum_game(SpectrumAccessGameSpec::new(
            topo.clone(),
            SatisfactionKind::RawRate,
        ))
        .unwrap();
        let plan = build_hierarchical_stages(&topo, cluster_topology(&topo)).unwrap();
        assert!(plan.cut_edges().is_empty());
        let out = run_hierarchical_q(&game, &plan, &HierarchicalQParams::default(), 3).unwrap();
        assert!(out.record.convergence_iteration.is_some());
        // With no cut edges, any final profile has no residual conflicts.
        assert!(plan.residual_conflicts(&out.record.final_profile).is_empty());
    }

    #[test]
    fn singleton_plan_matches_simultaneous_run_exactly() {
        // Every cell isolated: all clusters are singletons, stage 1 is the
        // whole game with the cluster-mean payoff equal to the own payoff,
        // stages 2 and 3 are empty. The staged driver must reproduce the
        // simultaneous driver bit for bit on the same seed.
        let pts = [(10.0, 10.0), (50.0, 50.0), (90.0, 90.0)];
        let cells = pts
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Cell {
                id,
                position: Point::new(x, y),
                tx_power_dbm: 20.0,
                active_prob: 1.0,
            })
            .collect();
        let channels = (0..2).map(|id| Channel { id, bandwidth_hz: 1e6 }).collect();
        let topo =
            NetworkTopology::from_cells(cells, Region::new(100.0, 100.0), channels, 5.0).unwrap();
        let game = build_spectrum_game(SpectrumAccessGameSpec::new(
            topo.clone(),
            SatisfactionKind::RawRate,
        ))
        .unwrap();
        let plan = build_hierarchical_stages(&topo, cluster_topology(&topo)).unwrap();
        for c in 0..3 {
            assert!(plan.members_of(c).is_empty());
        }
        let q = QParams { horizon: 800, record_trace: true, ..QParams::default() };
        let simultaneous = run_q_learning_simultaneous(&game, &q, 13).unwrap();
        let hp = HierarchicalQParams { base: q, stage_horizon: 800 };
        let staged = run_hierarchical_q(&game, &plan, &hp, 13).unwrap();
        assert_eq!(simultaneous.record, staged.record);
        assert_eq!(simultaneous.q_tables, staged.q_tables);
    }

    #[test]
    fn stage_two_respects_header_policy_in_final_profile() {
        // A star: one cluster, hub header. After the run, no member may sit
        // on the header's channel.
        let pts = [(50.0, 50.0), (50.0, 72.0), (50.0, 28.0), (28.0, 50.0), (72.0, 50.0)];
        let cells = pts
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Cell {
                id,
                position: Point::new(x, y),
                tx_power_dbm: 20.0,
                active_prob: 1.0,
            })
            .collect();
        let channels = (0..3).map(|id| Channel { id, bandwidth_hz: 1e6 }).collect();
        let topo =
            NetworkTopology::from_cells(cells, Region::new(100.0, 100.0), channels, 25.0).unwrap();
        let game = build_spectrum_game(SpectrumAccessGameSpec::new(
            topo.clone(),
            SatisfactionKind::RawRate,
        ))
        .unwrap();
        let structure = cluster_topology(&topo);
        assert_eq!(structure.clusters.len(), 1);
        let plan = build_hierarchical_stages(&topo, structure).unwrap();
        let out = run_hierarchical_q(&game, &plan, &HierarchicalQParams::default(), 21).unwrap();
        let header_channel = out.record.final_profile.action(0);
        for m in 1..5 {
            assert_ne!(out.record.final_profile.action(m), header_channel);
        }
    }

    #[test]
    fn identical_seeds_reproduce_q_runs() {
        let topo = six_cell_two_clique_topo();
        let game = build_spectrum_game(SpectrumAccessGameSpec::new(
            topo.clone(),
            SatisfactionKind::RawRate,
        ))
        .unwrap();
        let params = QParams { horizon: 500, ..QParams::default() };
        let a = run_q_learning_simultaneous(&game, &params, 9).unwrap();
        let b = run_q_learning_simultaneous(&game, &params, 9).unwrap();
        assert_eq!(a.record, b.record);
        let plan = build_hierarchical_stages(&topo, cluster_topology(&topo)).unwrap();
        let hp = HierarchicalQParams::default();
        let c = run_hierarchical_q(&game, &plan, &hp, 9).unwrap();
        let d = run_hierarchical_q(&game, &plan, &hp, 9).unwrap();
        assert_eq!(c.record, d.record);
    }

    #[test]
    fn invalid_alpha_is_rejected() {
        let g = TableGame::from_fn(vec![2], |_, _| 0.5);
        for alpha in [0.0, -0.5, 1.5] {
            let params = QParams { alpha, ..QParams::default() };
            assert!(run_q_learning_simultaneous(&g, &params, 1).is_err());
        }
    }
}
