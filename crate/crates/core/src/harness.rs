//! Experiment orchestration: named experiment configurations, seed
//! fan-out across replications, parallel execution, and persistence of
//! configs, per-run records, summaries, and plot-ready data files.
//!
//! Reproducibility contract: replication `i` uses seed `base + i`;
//! topology and dynamics streams are decorrelated from it with salted
//! sub-seeds. Re-running a configuration reproduces every persisted
//! artifact byte for byte, independent of the worker count.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    good_or_better, ne_gap_report, ArmSummary, ExperimentSummary, MetricSummary, OracleBaselines,
};
use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, Welfare, ENUMERATION_CAP, NE_TOLERANCE};
use crate::games::association::{build_association_game, AssociationGame, AssociationGameSpec, AssociationUtilityKind};
use crate::games::cluster::{build_hierarchical_stages, cluster_topology};
use crate::games::spectrum::{build_spectrum_game, SatisfactionKind, SpectrumAccessGameSpec, SpectrumGame};
use crate::learning::{
    run_best_response, run_hierarchical_q, run_q_learning_simultaneous, run_sla, BrParams,
    HierarchicalQParams, QParams, RunRecord, SlaParams,
};
use crate::net::{generate_topology, Sap, SapUserTopology, TopologyParams, User};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::utility::TrafficClass;

const SALT_TOPOLOGY: u64 = 0x746F_706F;
const SALT_RUN: u64 = 0x0072_756E;
const SALT_TRAFFIC: u64 = 0x7472_6166;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub base: u64,
    pub replications: u32,
}

/// Random SAP/user deployment for association experiments: SAPs on a grid,
/// fixed users drawn onto single SAPs, flexible users onto pairs of
/// grid-adjacent SAPs, classes drawn uniformly from the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SapUserConfig {
    pub n_saps: usize,
    pub sap_capacity_bps: f64,
    pub n_fixed_users: usize,
    pub n_flexible_users: usize,
    pub classes: Vec<TrafficClass>,
    /// Fixed topology seed; when absent each replication draws its own
    /// deployment.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTopologyConfig {
    pub params: TopologyParams,
    /// Fixed topology seed; when absent each replication draws its own
    /// deployment.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologyConfig {
    Cells(CellTopologyConfig),
    SapUsers(SapUserConfig),
}

/// How spectrum-game traffic classes are assigned to cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TrafficAssignment {
    /// No classes (rate/interference payoffs).
    None,
    /// Each cell draws uniformly from the catalog, seeded per topology.
    SeededUniform { catalog: Vec<TrafficClass> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GameConfig {
    Spectrum {
        satisfaction: SatisfactionKind,
        robust: bool,
        radio: crate::utility::RadioParams,
        traffic: TrafficAssignment,
    },
    Association {
        utility_kind: AssociationUtilityKind,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    Sla(SlaParams),
    BestResponse(BrParams),
    QSimultaneous(QParams),
    QHierarchical(HierarchicalQParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub label: String,
    pub topology: TopologyConfig,
    pub game: GameConfig,
    pub algorithm: AlgorithmConfig,
    /// Compute exhaustive optimum and NE baselines for this arm (requires
    /// a fixed topology seed and a desk-scale profile space).
    #[serde(default)]
    pub compute_oracles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seeds: SeedPlan,
    /// Threshold on the satisfaction utility for the satisfied-user ratio.
    pub satisfied_threshold: f64,
    pub arms: Vec<ArmConfig>,
}

impl ExperimentConfig {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 of the canonical (compact) JSON encoding.
    pub fn digest(&self) -> Result<String> {
        let canonical = serde_json::to_string(self)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    /// Full validation: structural checks plus a dry resolution of every
    /// arm at replication 0, so errors carry the offending field names.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.seeds.replications < 1 {
            issues.push("seeds.replications: must be >= 1".to_string());
        }
        if self.arms.is_empty() {
            issues.push("arms: at least one arm is required".to_string());
        }
        if !(self.satisfied_threshold > 0.0 && self.satisfied_threshold <= 1.0) {
            issues.push(format!(
                "satisfied_threshold: must lie in (0, 1], got {}",
                self.satisfied_threshold
            ));
        }
        let mut labels = std::collections::BTreeSet::new();
        for arm in &self.arms {
            if !labels.insert(&arm.label) {
                issues.push(format!("arms: duplicate label `{}`", arm.label));
            }
        }
        for arm in &self.arms {
            if let Err(e) = resolve_arm(self, arm, 0) {
                issues.push(format!("arms[{}]: {}", arm.label, e));
            }
            if arm.compute_oracles {
                let fixed = match &arm.topology {
                    TopologyConfig::Cells(c) => c.seed.is_some(),
                    TopologyConfig::SapUsers(s) => s.seed.is_some(),
                };
                if !fixed {
                    issues.push(format!(
                        "arms[{}].compute_oracles: needs a fixed topology seed",
                        arm.label
                    ));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { issues })
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution: config -> built game
// ---------------------------------------------------------------------------

pub fn generate_sap_user_topology(seed: u64, cfg: &SapUserConfig) -> Result<SapUserTopology> {
    let mut issues = Vec::new();
    if cfg.n_saps == 0 {
        issues.push("n_saps: must be >= 1".to_string());
    }
    if !(cfg.sap_capacity_bps > 0.0) {
        issues.push(format!("sap_capacity_bps: must be > 0, got {}", cfg.sap_capacity_bps));
    }
    if cfg.classes.is_empty() {
        issues.push("classes: catalog must not be empty".to_string());
    }
    if !issues.is_empty() {
        return Err(Error::InvalidConfig { issues });
    }
    for c in &cfg.classes {
        c.validate()?;
    }
    let mut rng = rng_from_seed(seed);
    let saps: Vec<Sap> =
        (0..cfg.n_saps).map(|id| Sap { id, capacity_bps: cfg.sap_capacity_bps }).collect();
    // Grid adjacency for the overlap structure of flexible users.
    let cols = (cfg.n_saps as f64).sqrt().ceil() as usize;
    let grid_neighbors = |s: usize| -> Vec<usize> {
        let (r, c) = (s / cols, s % cols);
        let mut out = Vec::new();
        for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr >= 0 && nc >= 0 && nc < cols as i64 {
                let t = nr as usize * cols + nc as usize;
                if t < cfg.n_saps {
                    out.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    };
    let mut users = Vec::new();
    for id in 0..cfg.n_fixed_users {
        let class = cfg.classes[rng.gen_range(0..cfg.classes.len())].clone();
        let sap = rng.gen_range(0..cfg.n_saps);
        users.push(User { id, class, candidate_saps: [sap].into_iter().collect() });
    }
    for k in 0..cfg.n_flexible_users {
        let id = cfg.n_fixed_users + k;
        let class = cfg.classes[rng.gen_range(0..cfg.classes.len())].clone();
        let s = rng.gen_range(0..cfg.n_saps);
        let ns = grid_neighbors(s);
        let t = if ns.is_empty() {
            (s + 1) % cfg.n_saps.max(2)
        } else {
            ns[rng.gen_range(0..ns.len())]
        };
        users.push(User { id, class, candidate_saps: [s, t].into_iter().collect() });
    }
    SapUserTopology::new(saps, users)
}

/// A game built for one (arm, replication) pair.
enum BuiltGame {
    Spectrum(SpectrumGame),
    Association(AssociationGame),
}

impl BuiltGame {
    fn as_game(&self) -> &dyn Game {
        match self {
            BuiltGame::Spectrum(g) => g,
            BuiltGame::Association(g) => g,
        }
    }
}

fn resolve_topology_seed(cfg_seed: Option<u64>, rep_seed: u64) -> u64 {
    cfg_seed.unwrap_or_else(|| derive_seed(rep_seed, SALT_TOPOLOGY))
}

fn resolve_arm(exp: &ExperimentConfig, arm: &ArmConfig, replication: u32) -> Result<BuiltGame> {
    let rep_seed = exp.seeds.base.wrapping_add(replication as u64);
    match (&arm.topology, &arm.game) {
        (TopologyConfig::Cells(tc), GameConfig::Spectrum { satisfaction, robust, radio, traffic }) => {
            let topo_seed = resolve_topology_seed(tc.seed, rep_seed);
            let topo = generate_topology(topo_seed, &tc.params)?;
            let traffic_vec = match traffic {
                TrafficAssignment::None => Vec::new(),
                TrafficAssignment::SeededUniform { catalog } => {
                    if catalog.is_empty() {
                        return Err(Error::config("traffic.catalog: must not be empty"));
                    }
                    let mut rng = rng_from_seed(derive_seed(topo_seed, SALT_TRAFFIC));
                    (0..topo.num_cells())
                        .map(|_| catalog[rng.gen_range(0..catalog.len())].clone())
                        .collect()
                }
            };
            let spec = SpectrumAccessGameSpec {
                topo,
                satisfaction: *satisfaction,
                traffic: traffic_vec,
                robust: *robust,
                radio: *radio,
                exact_expectation_max_neighbors: 20,
                mc_samples: 20_000,
                mc_seed: derive_seed(rep_seed, SALT_RUN),
            };
            Ok(BuiltGame::Spectrum(build_spectrum_game(spec)?))
        }
        (TopologyConfig::SapUsers(sc), GameConfig::Association { utility_kind }) => {
            let topo_seed = resolve_topology_seed(sc.seed, rep_seed);
            let topo = generate_sap_user_topology(topo_seed, sc)?;
            Ok(BuiltGame::Association(build_association_game(AssociationGameSpec {
                topo,
                utility_kind: *utility_kind,
            })?))
        }
        _ => Err(Error::config("topology kind does not match game kind")),
    }
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// One run's persisted line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub replication: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub iterations_run: u64,
    pub convergence_iteration: Option<u64>,
    pub final_profile: Vec<usize>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub summary: ExperimentSummary,
    /// Per-arm run results, in replication order.
    pub runs: BTreeMap<String, Vec<RunResult>>,
}

fn run_algorithm(game: &BuiltGame, alg: &AlgorithmConfig, run_seed: u64) -> Result<RunRecord> {
    match (game, alg) {
        (_, AlgorithmConfig::Sla(params)) => {
            Ok(run_sla(game.as_game(), params, run_seed)?.record)
        }
        (_, AlgorithmConfig::BestResponse(params)) => {
            run_best_response(game.as_game(), params, run_seed)
        }
        (_, AlgorithmConfig::QSimultaneous(params)) => {
            Ok(run_q_learning_simultaneous(game.as_game(), params, run_seed)?.record)
        }
        (BuiltGame::Spectrum(sg), AlgorithmConfig::QHierarchical(params)) => {
            let plan = build_hierarchical_stages(sg.topology(), cluster_topology(sg.topology()))?;
            Ok(run_hierarchical_q(sg, &plan, params, run_seed)?.record)
        }
        (BuiltGame::Association(_), AlgorithmConfig::QHierarchical(_)) => Err(Error::config(
            "q-hierarchical requires a spectrum game (clusters come from the cell graph)",
        )),
    }
}

fn run_metrics(
    exp: &ExperimentConfig,
    game: &BuiltGame,
    record: &RunRecord,
) -> Result<BTreeMap<String, f64>> {
    let mut metrics = BTreeMap::new();
    metrics.insert("converged".to_string(), record.convergence_iteration.is_some() as u8 as f64);
    metrics.insert(
        "convergence_iterations".to_string(),
        record.convergence_iteration.map(|i| i as f64).unwrap_or(-1.0),
    );
    metrics.insert("iterations_run".to_string(), record.iterations_run as f64);
    match game {
        BuiltGame::Spectrum(sg) => {
            metrics.insert(
                "welfare_expected_capacity_bps".to_string(),
                sg.expected_capacity_welfare(&record.final_profile),
            );
            if sg.kind().is_satisfaction() {
                metrics.insert(
                    "satisfied_ratio".to_string(),
                    crate::analysis::satisfied_ratio(record, sg, exp.satisfied_threshold)?,
                );
            }
        }
        BuiltGame::Association(ag) => {
            let hist = crate::analysis::qoe_histogram(record, ag);
            for (i, label) in ["bad", "poor", "fair", "good", "excellent"].iter().enumerate() {
                metrics.insert(format!("qoe_{label}"), hist[i] as f64);
            }
            metrics.insert("good_or_better".to_string(), good_or_better(&hist) as f64);
        }
    }
    Ok(metrics)
}

fn arm_oracles(exp: &ExperimentConfig, arm: &ArmConfig) -> Result<Option<OracleBaselines>> {
    if !arm.compute_oracles {
        return Ok(None);
    }
    let game = resolve_arm(exp, arm, 0)?;
    let report = match &game {
        BuiltGame::Spectrum(sg) => {
            let welfare_fn = |p: &ActionProfile| sg.expected_capacity_welfare(p);
            let welfare = Welfare::Profile(&welfare_fn);
            let report = ne_gap_report(sg, &welfare, NE_TOLERANCE, ENUMERATION_CAP, Vec::new());
            OracleBaselines::from_report("welfare_expected_capacity_bps", &report)
        }
        BuiltGame::Association(ag) => {
            let game: &dyn Game = ag;
            let report =
                ne_gap_report(game, &Welfare::SumUtilities, NE_TOLERANCE, ENUMERATION_CAP, Vec::new());
            OracleBaselines::from_report("sum_utility", &report)
        }
    };
    Ok(Some(report))
}

/// Executes every arm x replication, optionally on a dedicated thread
/// pool of `jobs` workers. Results are deterministic and independent of
/// the worker count.
pub fn run_experiment(exp: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutput> {
    exp.validate()?;
    let reps = exp.seeds.replications;
    let tasks: Vec<(usize, u32)> = (0..exp.arms.len())
        .flat_map(|a| (0..reps).map(move |r| (a, r)))
        .collect();

    let execute = || -> Vec<(usize, u32, RunResult)> {
        tasks
            .par_iter()
            .map(|&(arm_idx, rep)| {
                let arm = &exp.arms[arm_idx];
                let rep_seed = exp.seeds.base.wrapping_add(rep as u64);
                let run_seed = derive_seed(rep_seed, SALT_RUN);
                let outcome = resolve_arm(exp, arm, rep).and_then(|game| {
                    let record = run_algorithm(&game, &arm.algorithm, run_seed)?;
                    let metrics = run_metrics(exp, &game, &record)?;
                    Ok((record, metrics))
                });
                let result = match outcome {
                    Ok((record, metrics)) => RunResult {
                        replication: rep,
                        seed: rep_seed,
                        error: None,
                        iterations_run: record.iterations_run,
                        convergence_iteration: record.convergence_iteration,
                        final_profile: record.final_profile.as_slice().to_vec(),
                        metrics,
                    },
                    Err(e) => RunResult {
                        replication: rep,
                        seed: rep_seed,
                        error: Some(e.to_string()),
                        iterations_run: 0,
                        convergence_iteration: None,
                        final_profile: Vec::new(),
                        metrics: BTreeMap::new(),
                    },
                };
                (arm_idx, rep, result)
            })
            .collect()
    };

    let mut flat = match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::config(format!("jobs: {e}")))?;
            pool.install(execute)
        }
        None => execute(),
    };
    flat.sort_by_key(|&(a, r, _)| (a, r));

    let mut runs: BTreeMap<String, Vec<RunResult>> = BTreeMap::new();
    for arm in &exp.arms {
        runs.insert(arm.label.clone(), Vec::with_capacity(reps as usize));
    }
    for (arm_idx, _, result) in flat {
        runs.get_mut(&exp.arms[arm_idx].label).unwrap().push(result);
    }

    // Aggregate, in arm order.
    let mut arms = Vec::new();
    for arm in &exp.arms {
        let results = &runs[&arm.label];
        let mut metric_names: Vec<String> = Vec::new();
        for r in results {
            for k in r.metrics.keys() {
                if !metric_names.contains(k) {
                    metric_names.push(k.clone());
                }
            }
        }
        metric_names.sort_unstable();
        let mut metrics = BTreeMap::new();
        for name in metric_names {
            let values: Vec<f64> = results
                .iter()
                .map(|r| r.metrics.get(&name).copied().unwrap_or(-1.0))
                .collect();
            metrics.insert(name, MetricSummary::from_values(values));
        }
        let failed = results.iter().filter(|r| r.error.is_some()).count();
        if failed > 0 {
            metrics.insert(
                "failed_runs".to_string(),
                MetricSummary::from_values(vec![failed as f64]),
            );
        }
        arms.push(ArmSummary { label: arm.label.clone(), metrics, oracles: arm_oracles(exp, arm)? });
    }

    let summary = ExperimentSummary {
        experiment: exp.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: exp.digest()?,
        base_seed: exp.seeds.base,
        replications: reps,
        arms,
    };
    Ok(ExperimentOutput { config: exp.clone(), summary, runs })
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// Runs the experiment and writes `config.json`, `summary.json`,
/// `summary.csv`, `runs/<arm>.jsonl`, and `plots/*.csv` under `out_dir`.
pub fn run_experiment_to_dir(
    exp: &ExperimentConfig,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<ExperimentOutput> {
    let output = run_experiment(exp, jobs)?;
    persist(&output, out_dir)?;
    Ok(output)
}

fn persist(output: &ExperimentOutput, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::create_dir_all(out_dir.join("runs"))?;
    std::fs::create_dir_all(out_dir.join("plots"))?;

    std::fs::write(out_dir.join("config.json"), output.config.to_json()?)?;
    std::fs::write(out_dir.join("summary.json"), output.summary.to_json()?)?;

    // Long-format CSV: one row per arm x replication x metric.
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    w.write_record(["experiment", "arm", "replication", "seed", "metric", "value"])?;
    for arm in &output.config.arms {
        for run in &output.runs[&arm.label] {
            for (metric, value) in &run.metrics {
                w.write_record([
                    output.config.name.as_str(),
                    arm.label.as_str(),
                    &run.replication.to_string(),
                    &run.seed.to_string(),
                    metric,
                    &format!("{value}"),
                ])?;
            }
        }
    }
    w.flush()?;

    for arm in &output.config.arms {
        let mut f = std::fs::File::create(out_dir.join("runs").join(format!("{}.jsonl", arm.label)))?;
        for run in &output.runs[&arm.label] {
            writeln!(f, "{}", serde_json::to_string(run)?)?;
        }
    }

    // Plot-ready two-column files: per-metric arm means, and per-arm
    // convergence CDFs where available.
    let mut metric_names: Vec<String> = Vec::new();
    for arm in &output.summary.arms {
        for k in arm.metrics.keys() {
            if !metric_names.contains(k) {
                metric_names.push(k.clone());
            }
        }
    }
    metric_names.sort_unstable();
    for metric in &metric_names {
        let mut f = std::fs::File::create(out_dir.join("plots").join(format!("{metric}.csv")))?;
        writeln!(f, "arm,mean")?;
        for arm in &output.summary.arms {
            if let Some(m) = arm.metrics.get(metric) {
                writeln!(f, "{},{}", arm.label, m.mean)?;
            }
        }
    }
    for arm in &output.summary.arms {
        if let Some(m) = arm.metrics.get("convergence_iterations") {
            let converged: Vec<u64> =
                m.values.iter().filter(|v| **v >= 0.0).map(|v| *v as u64).collect();
            if converged.is_empty() {
                continue;
            }
            let mut f = std::fs::File::create(
                out_dir.join("plots").join(format!("cdf_{}.csv", arm.label)),
            )?;
            writeln!(f, "iterations,cumulative_fraction")?;
            for (x, frac) in crate::analysis::cdf_points(&converged, m.values.len()) {
                writeln!(f, "{x},{frac}")?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", "satisfied-user ratio of linear / sigmoid / concave satisfaction, n in {10, 20, 30}"),
    ("fig5", "QoE-level user counts of discrete-QoE vs continuous vs raw-throughput association"),
    ("fig7", "convergence CDF of hierarchical staged vs simultaneous Q-learning, n in {50, 80}"),
    ("fig8", "robust 9-cell spectrum game: SLA welfare vs best/worst NE vs exhaustive optimum"),
];

fn preset_alias(name: &str) -> &str {
    match name {
        "fig3-satisfaction" => "fig3",
        "fig5-qoe-association" => "fig5",
        "fig7-hierarchical" => "fig7",
        "fig8-robust-9cell" => "fig8",
        other => other,
    }
}

/// Shipped desk-scale experiment configurations.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match preset_alias(name) {
        "fig3" => Ok(fig3_preset()),
        "fig5" => Ok(fig5_preset()),
        "fig7" => Ok(fig7_preset()),
        "fig8" => Ok(fig8_preset()),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

fn spectrum_radio() -> crate::utility::RadioParams {
    crate::utility::RadioParams { noise_dbm: -100.0, pathloss_exponent: 3.5, rx_distance_m: 15.0 }
}

fn fig3_preset() -> ExperimentConfig {
    let mut arms = Vec::new();
    for &n in &[10usize, 20, 30] {
        for kind in
            [SatisfactionKind::Linear, SatisfactionKind::Sigmoid, SatisfactionKind::Concave]
        {
            let label = format!(
                "{}-n{n}",
                match kind {
                    SatisfactionKind::Linear => "linear",
                    SatisfactionKind::Sigmoid => "sigmoid",
                    SatisfactionKind::Concave => "concave",
                    _ => unreachable!(),
                }
            );
            arms.push(ArmConfig {
                label,
                topology: TopologyConfig::Cells(CellTopologyConfig {
                    params: TopologyParams {
                        n_cells: n,
                        n_channels: 3,
                        channel_bandwidth_hz: 180.0e3,
                        interference_radius_m: 40.0,
                        ..TopologyParams::default()
                    },
                    seed: None,
                }),
                game: GameConfig::Spectrum {
                    satisfaction: kind,
                    robust: false,
                    radio: spectrum_radio(),
                    traffic: TrafficAssignment::SeededUniform {
                        catalog: TrafficClass::codec_catalog(),
                    },
                },
                algorithm: AlgorithmConfig::Sla(SlaParams {
                    horizon: 3_000,
                    step_size: 0.1,
                    convergence_threshold: 0.99,
                    record_trace: false,
                }),
                compute_oracles: false,
            });
        }
    }
    ExperimentConfig {
        name: "fig3".to_string(),
        seeds: SeedPlan { base: 3_000, replications: 100 },
        // A user counts as satisfied at half satisfaction: the sigmoid
        // crosses 0.5 exactly where the demand is met.
        satisfied_threshold: 0.5,
        arms,
    }
}

fn fig5_preset() -> ExperimentConfig {
    let arms = [
        ("discrete-qoe", AssociationUtilityKind::DiscreteQoe),
        ("continuous", AssociationUtilityKind::ContinuousThroughput),
        ("raw-throughput", AssociationUtilityKind::RawThroughputMax),
    ]
    .into_iter()
    .map(|(label, kind)| ArmConfig {
        label: label.to_string(),
        topology: TopologyConfig::SapUsers(SapUserConfig {
            n_saps: 10,
            sap_capacity_bps: 10.2e6,
            n_fixed_users: 78,
            n_flexible_users: 20,
            classes: TrafficClass::skype_catalog(),
            seed: None,
        }),
        game: GameConfig::Association { utility_kind: kind },
        algorithm: AlgorithmConfig::BestResponse(BrParams {
            horizon: 60,
            ..BrParams::default()
        }),
        compute_oracles: false,
    })
    .collect();
    ExperimentConfig {
        name: "fig5".to_string(),
        seeds: SeedPlan { base: 5_000, replications: 100 },
        satisfied_threshold: 0.95,
        arms,
    }
}

fn fig7_preset() -> ExperimentConfig {
    let q = QParams {
        horizon: 6_000,
        alpha: 0.4,
        epsilon0: 0.3,
        epsilon_tau: 50.0,
        stability_window: 20,
        record_trace: false,
    };
    let mut arms = Vec::new();
    for &n in &[50usize, 80] {
        let topo = TopologyConfig::Cells(CellTopologyConfig {
            params: TopologyParams {
                n_cells: n,
                n_channels: 4,
                channel_bandwidth_hz: 180.0e3,
                interference_radius_m: 26.0,
                ..TopologyParams::default()
            },
            seed: None,
        });
        let game = GameConfig::Spectrum {
            satisfaction: SatisfactionKind::RawRate,
            robust: false,
            radio: spectrum_radio(),
            traffic: TrafficAssignment::None,
        };
        arms.push(ArmConfig {
            label: format!("simultaneous-n{n}"),
            topology: topo.clone(),
            game: game.clone(),
            algorithm: AlgorithmConfig::QSimultaneous(q.clone()),
            compute_oracles: false,
        });
        arms.push(ArmConfig {
            label: format!("hierarchical-n{n}"),
            topology: topo,
            game,
            algorithm: AlgorithmConfig::QHierarchical(HierarchicalQParams {
                base: q.clone(),
                stage_horizon: 2_000,
            }),
            compute_oracles: false,
        });
    }
    ExperimentConfig {
        name: "fig7".to_string(),
        seeds: SeedPlan { base: 7_000, replications: 100 },
        satisfied_threshold: 0.95,
        arms,
    }
}

fn fig8_preset() -> ExperimentConfig {
    let arms = [0.3, 0.5, 0.8, 1.0]
        .into_iter()
        .map(|lambda| ArmConfig {
            label: format!("lambda-{lambda}"),
            topology: TopologyConfig::Cells(CellTopologyConfig {
                params: TopologyParams {
                    n_cells: 9,
                    n_channels: 3,
                    channel_bandwidth_hz: 1.0e6,
                    active_prob: crate::net::PerCell::Scalar(lambda),
                    ..TopologyParams::default()
                },
                seed: Some(12),
            }),
            game: GameConfig::Spectrum {
                satisfaction: SatisfactionKind::InterferenceCost,
                robust: true,
                radio: spectrum_radio(),
                traffic: TrafficAssignment::None,
            },
            algorithm: AlgorithmConfig::Sla(SlaParams {
                horizon: 12_000,
                step_size: 0.04,
                convergence_threshold: 0.99,
                record_trace: false,
            }),
            compute_oracles: true,
        })
        .collect();
    ExperimentConfig {
        name: "fig8".to_string(),
        seeds: SeedPlan { base: 8_000, replications: 100 },
        satisfied_threshold: 0.95,
        arms,
    }
}
