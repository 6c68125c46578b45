//! Distributed spectrum-access (channel selection) games over a
//! [`NetworkTopology`]: every cell is a player, the action set is the
//! channel list, and utilities depend only on interference-graph neighbors.
//!
//! Payoff kinds:
//! - `Linear` / `Sigmoid` / `Concave`: demand-aware satisfaction of the
//!   achieved Shannon rate.
//! - `RawRate`: the Shannon rate itself.
//! - `InterferenceCost`: the negative of the experienced-plus-caused
//!   co-channel interference power. The pairwise weights are symmetric, so
//!   this kind is an exact potential game (also in robust mode, where the
//!   weights pick up both cells' activity probabilities); its equilibria
//!   are the profiles that are local minima of the total network
//!   interference.
//!
//! In robust mode the utility is the expectation of the same quantity over
//! random active cell sets, computed exactly by enumerating the co-channel
//! neighborhood's activity patterns whenever it is small enough, and by
//! seeded Monte Carlo otherwise.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, PayoffNormalizer, Realization};
use crate::net::NetworkTopology;
use crate::utility::{dbm_to_mw, received_power_dbm, RadioParams, TrafficClass};

/// How a cell's achieved rate (or interference) maps into its payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SatisfactionKind {
    Linear,
    Sigmoid,
    Concave,
    RawRate,
    InterferenceCost,
}

impl SatisfactionKind {
    pub fn is_satisfaction(self) -> bool {
        matches!(self, SatisfactionKind::Linear | SatisfactionKind::Sigmoid | SatisfactionKind::Concave)
    }
}

/// Specification of a spectrum-access game instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumAccessGameSpec {
    pub topo: NetworkTopology,
    pub satisfaction: SatisfactionKind,
    /// Per-cell traffic classes; required for the satisfaction kinds.
    #[serde(default)]
    pub traffic: Vec<TrafficClass>,
    /// Use the expectation over random active cell sets as the utility.
    pub robust: bool,
    pub radio: RadioParams,
    /// Exact expectation whenever the co-channel neighborhood has at most
    /// this many cells; Monte Carlo above it.
    #[serde(default = "default_exact_cap")]
    pub exact_expectation_max_neighbors: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub mc_seed: u64,
}

fn default_exact_cap() -> usize {
    20
}

fn default_mc_samples() -> usize {
    20_000
}

impl SpectrumAccessGameSpec {
    pub fn new(topo: NetworkTopology, satisfaction: SatisfactionKind) -> Self {
        SpectrumAccessGameSpec {
            topo,
            satisfaction,
            traffic: Vec::new(),
            robust: false,
            radio: RadioParams::default(),
            exact_expectation_max_neighbors: default_exact_cap(),
            mc_samples: default_mc_samples(),
            mc_seed: 0,
        }
    }
}

/// A built spectrum-access game with precomputed link powers.
#[derive(Debug)]
pub struct SpectrumGame {
    spec: SpectrumAccessGameSpec,
    neighbors: Vec<Vec<usize>>,
    neighbor_sets: Vec<BTreeSet<usize>>,
    /// rx_power[n][k]: received power (mW) at cell n from its k-th neighbor.
    rx_power: Vec<Vec<f64>>,
    /// pair_weight[n][k]: symmetric experienced+caused interference weight
    /// between n and its k-th neighbor, globally rescaled to O(1).
    pair_weight: Vec<Vec<f64>>,
    self_power_mw: Vec<f64>,
    noise_mw: f64,
    lambda: Vec<f64>,
    /// solo_rate[n][ch]: interference-free Shannon rate of cell n on
    /// channel ch.
    solo_rate: Vec<Vec<f64>>,
}

/// Builds the game, validating the spec.
pub fn build_spectrum_game(spec: SpectrumAccessGameSpec) -> Result<SpectrumGame> {
    let n = spec.topo.num_cells();
    if spec.satisfaction.is_satisfaction() {
        if spec.traffic.len() != n {
            return Err(Error::config(format!(
                "traffic: satisfaction kind {:?} needs one traffic class per cell, got {} for {n} cells",
                spec.satisfaction,
                spec.traffic.len()
            )));
        }
        for tc in &spec.traffic {
            tc.validate()?;
        }
    }

    let gamma = spec.radio.pathloss_exponent;
    let noise_mw = dbm_to_mw(spec.radio.noise_dbm);
    let cells = spec.topo.cells();

    let mut neighbors = Vec::with_capacity(n);
    let mut neighbor_sets = Vec::with_capacity(n);
    let mut rx_power = Vec::with_capacity(n);
    for i in 0..n {
        let ns: Vec<usize> = spec.topo.neighbors(i)?.iter().copied().collect();
        let rx: Vec<f64> = ns
            .iter()
            .map(|&m| {
                let dist = cells[i].position.distance(&cells[m].position);
                dbm_to_mw(received_power_dbm(cells[m].tx_power_dbm, dist, gamma))
            })
            .collect();
        neighbor_sets.push(spec.topo.neighbors(i)?.clone());
        neighbors.push(ns);
        rx_power.push(rx);
    }

    // Symmetric pairwise weights, rescaled so the largest is 1. The global
    // scale keeps exact-potential cycle sums well inside f64 precision and
    // does not change best responses or equilibria.
    let mut raw_weight: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut w_max = 0.0f64;
    for i in 0..n {
        let row: Vec<f64> = neighbors[i]
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let back = neighbors[m].iter().position(|&x| x == i).expect("graph symmetry");
                let w = rx_power[i][k] + rx_power[m][back];
                w_max = w_max.max(w);
                w
            })
            .collect();
        raw_weight.push(row);
    }
    let scale = if w_max > 0.0 { w_max } else { 1.0 };
    let pair_weight: Vec<Vec<f64>> =
        raw_weight.into_iter().map(|row| row.into_iter().map(|w| w / scale).collect()).collect();

    let self_power_mw: Vec<f64> = cells
        .iter()
        .map(|c| dbm_to_mw(received_power_dbm(c.tx_power_dbm, spec.radio.rx_distance_m, gamma)))
        .collect();
    let lambda: Vec<f64> = cells.iter().map(|c| c.active_prob).collect();
    let solo_rate: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            spec.topo
                .channels()
                .iter()
                .map(|ch| crate::utility::shannon_rate(ch.bandwidth_hz, self_power_mw[i] / noise_mw))
                .collect()
        })
        .collect();

    Ok(SpectrumGame {
        spec,
        neighbors,
        neighbor_sets,
        rx_power,
        pair_weight,
        self_power_mw,
        noise_mw,
        lambda,
        solo_rate,
    })
}

impl SpectrumGame {
    pub fn topology(&self) -> &NetworkTopology {
        &self.spec.topo
    }

    pub fn kind(&self) -> SatisfactionKind {
        self.spec.satisfaction
    }

    pub fn is_robust(&self) -> bool {
        self.spec.robust
    }

    pub fn traffic(&self) -> &[TrafficClass] {
        &self.spec.traffic
    }

    fn num_cells(&self) -> usize {
        self.spec.topo.num_cells()
    }

    /// Shannon rate of `cell` given the channel assignment and an active
    /// mask; 0 when the cell itself is inactive.
    pub fn rate(&self, cell: usize, assignment: &[usize], active: &[bool]) -> f64 {
        if !active[cell] {
            return 0.0;
        }
        let ch = assignment[cell];
        let mut interference = 0.0;
        for (k, &m) in self.neighbors[cell].iter().enumerate() {
            if active[m] && assignment[m] == ch {
                interference += self.rx_power[cell][k];
            }
        }
        let sinr = self.self_power_mw[cell] / (self.noise_mw + interference);
        crate::utility::shannon_rate(self.spec.topo.channels()[ch].bandwidth_hz, sinr)
    }

    /// Experienced + caused co-channel interference of `cell` (rescaled
    /// units); 0 when inactive.
    pub fn interference_cost(&self, cell: usize, assignment: &[usize], active: &[bool]) -> f64 {
        if !active[cell] {
            return 0.0;
        }
        let ch = assignment[cell];
        let mut cost = 0.0;
        for (k, &m) in self.neighbors[cell].iter().enumerate() {
            if active[m] && assignment[m] == ch {
                cost += self.pair_weight[cell][k];
            }
        }
        cost
    }

    fn quantity_of_rate(&self, cell: usize, rate: f64) -> f64 {
        match self.spec.satisfaction {
            SatisfactionKind::Linear => {
                let d = self.spec.traffic[cell].demand_bps;
                (rate / d).min(1.0)
            }
            SatisfactionKind::Sigmoid => {
                let tc = &self.spec.traffic[cell];
                crate::utility::satisfaction_sigmoid(rate, tc.demand_bps, tc.sigmoid_slope)
            }
            SatisfactionKind::Concave => {
                let tc = &self.spec.traffic[cell];
                if rate <= 0.0 {
                    0.0
                } else {
                    (2.0 * (rate * tc.demand_bps).sqrt() / (tc.demand_bps + rate))
                        .powf(tc.concave_alpha)
                }
            }
            SatisfactionKind::RawRate => rate,
            SatisfactionKind::InterferenceCost => {
                unreachable!("interference kind does not go through rates")
            }
        }
    }

    /// Co-channel neighbor slots of `cell` under `assignment`.
    fn cochannel_slots(&self, cell: usize, assignment: &[usize]) -> Vec<usize> {
        let ch = assignment[cell];
        self.neighbors[cell]
            .iter()
            .enumerate()
            .filter_map(|(k, &m)| (assignment[m] == ch).then_some(k))
            .collect()
    }

    /// Deterministic utility: the all-active quantity, or its exact (or
    /// Monte-Carlo) expectation over active sets in robust mode.
    fn utility_impl(&self, cell: usize, assignment: &[usize]) -> f64 {
        if !self.spec.robust {
            let active = vec![true; self.num_cells()];
            return match self.spec.satisfaction {
                SatisfactionKind::InterferenceCost => {
                    -self.interference_cost(cell, assignment, &active)
                }
                _ => self.quantity_of_rate(cell, self.rate(cell, assignment, &active)),
            };
        }
        match self.spec.satisfaction {
            SatisfactionKind::InterferenceCost => {
                // Expectation is linear in the independent activity
                // indicators: closed form, no enumeration needed.
                let ch = assignment[cell];
                let mut expected = 0.0;
                for (k, &m) in self.neighbors[cell].iter().enumerate() {
                    if assignment[m] == ch {
                        expected += self.lambda[m] * self.pair_weight[cell][k];
                    }
                }
                -self.lambda[cell] * expected
            }
            _ => self.expected_quantity(cell, assignment).0,
        }
    }

    /// Expected rate-derived quantity over random active sets, with the
    /// Monte-Carlo standard error when that path was taken.
    pub fn expected_quantity(&self, cell: usize, assignment: &[usize]) -> (f64, Option<f64>) {
        let slots = self.cochannel_slots(cell, assignment);
        let q_inactive = self.quantity_of_rate(cell, 0.0);
        let lam = self.lambda[cell];
        if slots.len() <= self.spec.exact_expectation_max_neighbors {
            let mut cond = 0.0;
            for mask in 0u64..(1u64 << slots.len()) {
                let mut p = 1.0;
                let mut interference = 0.0;
                for (bit, &k) in slots.iter().enumerate() {
                    let m = self.neighbors[cell][k];
                    if mask >> bit & 1 == 1 {
                        p *= self.lambda[m];
                        interference += self.rx_power[cell][k];
                    } else {
                        p *= 1.0 - self.lambda[m];
                    }
                }
                let sinr = self.self_power_mw[cell] / (self.noise_mw + interference);
                let rate = crate::utility::shannon_rate(
                    self.spec.topo.channels()[assignment[cell]].bandwidth_hz,
                    sinr,
                );
                cond += p * self.quantity_of_rate(cell, rate);
            }
            (lam * cond + (1.0 - lam) * q_inactive, None)
        } else {
            // Seeded Monte Carlo over the co-channel neighborhood only.
            use std::hash::{Hash, Hasher};
            let mut h = std::collections::hash_map::DefaultHasher::new();
            self.spec.mc_seed.hash(&mut h);
            cell.hash(&mut h);
            assignment.hash(&mut h);
            let mut rng = crate::seeding::rng_from_seed(h.finish());
            let samples = self.spec.mc_samples.max(1);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let mut interference = 0.0;
                for &k in &slots {
                    let m = self.neighbors[cell][k];
                    if rng.gen::<f64>() < self.lambda[m] {
                        interference += self.rx_power[cell][k];
                    }
                }
                let sinr = self.self_power_mw[cell] / (self.noise_mw + interference);
                let rate = crate::utility::shannon_rate(
                    self.spec.topo.channels()[assignment[cell]].bandwidth_hz,
                    sinr,
                );
                let q = self.quantity_of_rate(cell, rate);
                sum += q;
                sum_sq += q * q;
            }
            let mean = sum / samples as f64;
            let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
            let se = lam * (var / samples as f64).sqrt();
            (lam * mean + (1.0 - lam) * q_inactive, Some(se))
        }
    }

    /// Expected Shannon capacity of `cell` (its activity included), the
    /// reporting metric for robust-game experiments. Exact enumeration over
    /// the co-channel neighborhood.
    pub fn expected_capacity(&self, cell: usize, assignment: &[usize]) -> f64 {
        let slots = self.cochannel_slots(cell, assignment);
        let mut cond = 0.0;
        for mask in 0u64..(1u64 << slots.len().min(63)) {
            let mut p = 1.0;
            let mut interference = 0.0;
            for (bit, &k) in slots.iter().enumerate() {
                let m = self.neighbors[cell][k];
                if mask >> bit & 1 == 1 {
                    p *= self.lambda[m];
                    interference += self.rx_power[cell][k];
                } else {
                    p *= 1.0 - self.lambda[m];
                }
            }
            let sinr = self.self_power_mw[cell] / (self.noise_mw + interference);
            cond += p
                * crate::utility::shannon_rate(
                    self.spec.topo.channels()[assignment[cell]].bandwidth_hz,
                    sinr,
                );
        }
        self.lambda[cell] * cond
    }

    /// Network welfare: the sum of expected Shannon capacities.
    pub fn expected_capacity_welfare(&self, profile: &ActionProfile) -> f64 {
        (0..self.num_cells()).map(|c| self.expected_capacity(c, profile.as_slice())).sum()
    }

    /// Satisfaction utility at a profile; only defined for the
    /// satisfaction kinds.
    pub fn satisfaction(&self, cell: usize, profile: &ActionProfile) -> Result<f64> {
        if !self.spec.satisfaction.is_satisfaction() {
            return Err(Error::MetricUnavailable {
                metric: "satisfaction",
                msg: format!("game payoff kind is {:?}", self.spec.satisfaction),
            });
        }
        Ok(self.utility_impl(cell, profile.as_slice()))
    }
}

impl Game for SpectrumGame {
    fn num_players(&self) -> usize {
        self.num_cells()
    }

    fn num_actions(&self, _player: usize) -> usize {
        self.spec.topo.num_channels()
    }

    fn utility(&self, player: usize, profile: &ActionProfile) -> f64 {
        self.utility_impl(player, profile.as_slice())
    }

    fn neighbor_set(&self, player: usize) -> Option<&BTreeSet<usize>> {
        Some(&self.neighbor_sets[player])
    }

    fn realize(&self, profile: &ActionProfile, rng: &mut dyn RngCore) -> Realization {
        if !self.spec.robust {
            let n = self.num_cells();
            let active = vec![true; n];
            let payoffs = (0..n)
                .map(|c| match self.spec.satisfaction {
                    SatisfactionKind::InterferenceCost => {
                        -self.interference_cost(c, profile.as_slice(), &active)
                    }
                    _ => self.quantity_of_rate(c, self.rate(c, profile.as_slice(), &active)),
                })
                .collect();
            return Realization { payoffs, active };
        }
        // One decision period: draw the active cell set, then hand every
        // active cell its realized quantity. Inactive cells observe nothing.
        let active = self.spec.topo.sample_active_mask(&mut &mut *rng);
        let payoffs = (0..self.num_cells())
            .map(|c| {
                if !active[c] {
                    return match self.spec.satisfaction {
                        SatisfactionKind::InterferenceCost => 0.0,
                        _ => self.quantity_of_rate(c, 0.0),
                    };
                }
                match self.spec.satisfaction {
                    SatisfactionKind::InterferenceCost => {
                        -self.interference_cost(c, profile.as_slice(), &active)
                    }
                    _ => self.quantity_of_rate(c, self.rate(c, profile.as_slice(), &active)),
                }
            })
            .collect();
        Realization { payoffs, active }
    }

    fn payoff_normalizer(&self) -> PayoffNormalizer {
        let n = self.num_cells();
        match self.spec.satisfaction {
            SatisfactionKind::Linear | SatisfactionKind::Sigmoid | SatisfactionKind::Concave => {
                PayoffNormalizer::identity(n)
            }
            SatisfactionKind::RawRate => {
                let hi = (0..n)
                    .map(|c| self.solo_rate[c].iter().cloned().fold(0.0, f64::max))
                    .collect();
                PayoffNormalizer::from_bounds(vec![0.0; n], hi)
            }
            SatisfactionKind::InterferenceCost => {
                // Worst case: every neighbor active on the same channel.
                let lo = (0..n)
                    .map(|c| {
                        let worst: f64 = self.pair_weight[c].iter().sum();
                        -worst.max(f64::MIN_POSITIVE)
                    })
                    .collect();
                PayoffNormalizer::from_bounds(lo, vec![0.0; n])
            }
        }
    }
}
