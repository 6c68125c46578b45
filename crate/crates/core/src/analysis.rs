//! Turns run records and oracle outputs into reported quantities:
//! satisfied-user ratios, QoE histograms, convergence CDFs, and
//! optimum/best-NE/worst-NE gap reports, plus the summary document the
//! experiment harness persists.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::game::{enumerate_pure_ne, exhaustive_optimum, Game, Welfare};
use crate::games::association::AssociationGame;
use crate::games::spectrum::SpectrumGame;
use crate::learning::RunRecord;
use crate::utility::QoeLevel;

// ---------------------------------------------------------------------------
// Per-run metrics
// ---------------------------------------------------------------------------

/// Fraction of players whose satisfaction utility at the final profile is
/// at least `threshold`. Only defined for satisfaction-kind spectrum games.
pub fn satisfied_ratio(record: &RunRecord, game: &SpectrumGame, threshold: f64) -> Result<f64> {
    let n = game.num_players();
    let mut satisfied = 0usize;
    for p in 0..n {
        if game.satisfaction(p, &record.final_profile)? >= threshold {
            satisfied += 1;
        }
    }
    Ok(satisfied as f64 / n as f64)
}

/// QoE-level counts over all users (fixed and flexible) at the final
/// profile; the counts always partition the user set.
pub fn qoe_histogram(record: &RunRecord, game: &AssociationGame) -> [u64; 5] {
    let mut counts = [0u64; 5];
    for level in game.user_levels(&record.final_profile) {
        counts[(level.ordinal() - 1) as usize] += 1;
    }
    counts
}

/// Users at `Good` or better.
pub fn good_or_better(histogram: &[u64; 5]) -> u64 {
    histogram[(QoeLevel::Good.ordinal() - 1) as usize]
        + histogram[(QoeLevel::Excellent.ordinal() - 1) as usize]
}

/// Empirical CDF of convergence iterations: (x, fraction of runs converged
/// within x iterations), non-decreasing, ending at the converged fraction.
pub fn convergence_cdf(records: &[RunRecord]) -> Vec<(u64, f64)> {
    assert!(!records.is_empty(), "convergence_cdf needs at least one record");
    let iters: Vec<u64> = records.iter().filter_map(|r| r.convergence_iteration).collect();
    cdf_points(&iters, records.len())
}

pub(crate) fn cdf_points(converged_iters: &[u64], total: usize) -> Vec<(u64, f64)> {
    let mut iters = converged_iters.to_vec();
    iters.sort_unstable();
    let mut out: Vec<(u64, f64)> = Vec::new();
    for (rank, x) in iters.iter().enumerate() {
        let frac = (rank + 1) as f64 / total as f64;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = frac,
            _ => out.push((*x, frac)),
        }
    }
    out
}

/// Optimum / best-NE / worst-NE welfare oracle report for a desk-scale
/// game, with the learned welfares appended. When the profile space
/// exceeds `cap`, the report is generated without the oracle fields and
/// flagged instead of failing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeGapReport {
    pub optimum: Option<f64>,
    pub best_ne: Option<f64>,
    pub worst_ne: Option<f64>,
    pub ne_count: Option<u64>,
    pub learned: Vec<f64>,
    pub enumeration_capped: bool,
}

impl NeGapReport {
    pub fn learned_mean(&self) -> Option<f64> {
        if self.learned.is_empty() {
            None
        } else {
            Some(self.learned.iter().sum::<f64>() / self.learned.len() as f64)
        }
    }
}

pub fn ne_gap_report(
    game: &dyn Game,
    welfare: &Welfare<'_>,
    ne_tolerance: f64,
    cap: u128,
    learned: Vec<f64>,
) -> NeGapReport {
    let optimum = exhaustive_optimum(game, welfare, cap);
    let nes = enumerate_pure_ne(game, ne_tolerance, cap);
    match (optimum, nes) {
        (Ok((_, opt)), Ok(nes)) => {
            let ne_welfares: Vec<f64> = nes.iter().map(|p| welfare.evaluate(game, p)).collect();
            let best = ne_welfares.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let worst = ne_welfares.iter().cloned().fold(f64::INFINITY, f64::min);
            NeGapReport {
                optimum: Some(opt),
                best_ne: (!nes.is_empty()).then_some(best),
                worst_ne: (!nes.is_empty()).then_some(worst),
                ne_count: Some(nes.len() as u64),
                learned,
                enumeration_capped: false,
            }
        }
        _ => NeGapReport {
            optimum: None,
            best_ne: None,
            worst_ne: None,
            ne_count: None,
            learned,
            enumeration_capped: true,
        },
    }
}

// ---------------------------------------------------------------------------
// Statistics over seeds
// ---------------------------------------------------------------------------

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sided 95% t confidence interval for the mean.
pub fn ci95(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let m = mean(xs);
    let s = sample_std(xs);
    if s == 0.0 {
        return Some((m, m));
    }
    let t = StudentsT::new(0.0, 1.0, n - 1.0).ok()?.inverse_cdf(0.975);
    let half = t * s / n.sqrt();
    Some((m - half, m + half))
}

/// One-sided paired t-test of H1: mean(xs - ys) > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub mean_diff: f64,
    pub t: f64,
    /// One-sided p-value for the "greater" alternative.
    pub p_greater: f64,
}

pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Result<PairedTest> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain(
            "paired_t_test",
            format!("need two equal-length samples of size >= 2, got {} and {}", xs.len(), ys.len()),
        ));
    }
    let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let s = sample_std(&d);
    let n = d.len() as f64;
    if s == 0.0 {
        // Degenerate: all differences equal.
        let p = if m > 0.0 { 0.0 } else { 1.0 };
        return Ok(PairedTest { mean_diff: m, t: f64::INFINITY * m.signum(), p_greater: p });
    }
    let t = m / (s / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::domain("paired_t_test", e.to_string()))?;
    Ok(PairedTest { mean_diff: m, t, p_greater: 1.0 - dist.cdf(t) })
}

// ---------------------------------------------------------------------------
// Summary document
// ---------------------------------------------------------------------------

/// Aggregate of one metric across replications. `values` keeps the raw
/// per-seed numbers in replication order; non-applicable replications use
/// the sentinel -1 (e.g. iterations of a run that never converged) and are
/// excluded from the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub ci95: Option<(f64, f64)>,
    /// Set when fewer than 30 replications back the interval.
    pub ci_insufficient: bool,
    pub values: Vec<f64>,
}

impl MetricSummary {
    pub fn from_values(values: Vec<f64>) -> Self {
        let clean: Vec<f64> = values.iter().copied().filter(|v| *v >= 0.0).collect();
        let (m, md, sd, ci) = if clean.is_empty() {
            (-1.0, -1.0, 0.0, None)
        } else {
            (mean(&clean), median(&clean), sample_std(&clean), ci95(&clean))
        };
        MetricSummary {
            mean: m,
            median: md,
            std: sd,
            ci95: ci,
            ci_insufficient: clean.len() < 30,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleBaselines {
    pub welfare_metric: String,
    pub optimum: Option<f64>,
    pub best_ne: Option<f64>,
    pub worst_ne: Option<f64>,
    pub ne_count: Option<u64>,
    pub enumeration_capped: bool,
}

impl OracleBaselines {
    pub fn from_report(metric: &str, report: &NeGapReport) -> Self {
        OracleBaselines {
            welfare_metric: metric.to_string(),
            optimum: report.optimum,
            best_ne: report.best_ne,
            worst_ne: report.worst_ne,
            ne_count: report.ne_count,
            enumeration_capped: report.enumeration_capped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub label: String,
    pub metrics: BTreeMap<String, MetricSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracles: Option<OracleBaselines>,
}

/// The persisted experiment summary. Byte-identical across re-runs of the
/// same configuration: no timestamps, no machine identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub version: String,
    pub config_digest: String,
    pub base_seed: u64,
    pub replications: u32,
    pub arms: Vec<ArmSummary>,
}

impl ExperimentSummary {
    pub fn arm(&self, label: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

// ---------------------------------------------------------------------------
// Tables (shared by the CLI `report` subcommand and library callers)
// ---------------------------------------------------------------------------

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4e}"),
        None => "-".to_string(),
    }
}

/// Optimum / best-NE / worst-NE / learned-mean table, one row per arm.
pub fn format_ne_gap_table(summary: &ExperimentSummary, welfare_metric: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<18} {:>12} {:>12} {:>12} {:>12} {:>9}\n",
        "arm", "optimum", "best_ne", "worst_ne", "learned", "lrn/opt"
    ));
    for arm in &summary.arms {
        let learned = arm.metrics.get(welfare_metric).map(|m| m.mean);
        let (opt, best, worst) = match &arm.oracles {
            Some(o) => (o.optimum, o.best_ne, o.worst_ne),
            None => (None, None, None),
        };
        let ratio = match (learned, opt) {
            (Some(l), Some(o)) if o != 0.0 => format!("{:.4}", l / o),
            _ => "-".to_string(),
        };
        out.push_str(&format!(
            "{:<18} {:>12} {:>12} {:>12} {:>12} {:>9}\n",
            arm.label,
            fmt_opt(opt),
            fmt_opt(best),
            fmt_opt(worst),
            fmt_opt(learned),
            ratio
        ));
    }
    out
}

/// Mean/median/std/CI table of one metric, one row per arm.
pub fn format_metric_table(summary: &ExperimentSummary, metric: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>12} {:>12} {:>12} {:>26}\n",
        "arm", "mean", "median", "std", "ci95"
    ));
    for arm in &summary.arms {
        if let Some(m) = arm.metrics.get(metric) {
            let ci = match m.ci95 {
                Some((lo, hi)) => {
                    let mark = if m.ci_insufficient { " (n<30)" } else { "" };
                    format!("[{lo:.4}, {hi:.4}]{mark}")
                }
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "{:<24} {:>12.4} {:>12.4} {:>12.4} {:>26}\n",
                arm.label, m.mean, m.median, m.std, ci
            ));
        }
    }
    out
}

/// Mean per-level user counts, one row per arm.
pub fn format_qoe_table(summary: &ExperimentSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>9} {:>9} {:>9} {:>9} {:>10} {:>15}\n",
        "arm", "bad", "poor", "fair", "good", "excellent", "good-or-better"
    ));
    for arm in &summary.arms {
        let get =
            |lvl: &str| arm.metrics.get(&format!("qoe_{lvl}")).map(|m| m.mean).unwrap_or(f64::NAN);
        let gob = arm.metrics.get("good_or_better").map(|m| m.mean).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{:<28} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>10.2} {:>15.2}\n",
            arm.label,
            get("bad"),
            get("poor"),
            get("fair"),
            get("good"),
            get("excellent"),
            gob
        ));
    }
    out
}

/// Convergence-iteration CDF per arm, from the stored per-seed values.
pub fn format_cdf_table(summary: &ExperimentSummary) -> String {
    let mut out = String::new();
    for arm in &summary.arms {
        let Some(m) = arm.metrics.get("convergence_iterations") else { continue };
        out.push_str(&format!("# {}\n", arm.label));
        let converged: Vec<u64> =
            m.values.iter().filter(|v| **v >= 0.0).map(|v| *v as u64).collect();
        for (x, frac) in cdf_points(&converged, m.values.len()) {
            out.push_str(&format!("{x} {frac:.4}\n"));
        }
    }
    out
}
