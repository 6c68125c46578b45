//! Distributed user-association game: users in overlapping coverage pick
//! one SAP to associate with; a SAP's capacity is shared equally by
//! everyone on it (fixed single-candidate users included).
//!
//! Utility kinds:
//! - `DiscreteQoe`: the ordinal QoE level (1..5) of the achieved rate. Its
//!   plateaus expand the equilibrium set: moves that change the rate but
//!   not the level are not improvements.
//! - `ContinuousThroughput`: the linear satisfaction of the rate capped at
//!   the class's recommended throughput, the continuous demand-aware
//!   counterpart the discrete game is compared against. Users below the
//!   recommended rate chase throughput; users at or above it stop
//!   competing.
//! - `RawThroughputMax`: the rate itself; demand is ignored.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, PayoffNormalizer};
use crate::net::SapUserTopology;
use crate::utility::{qoe_level, satisfaction_linear, QoeLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationUtilityKind {
    DiscreteQoe,
    ContinuousThroughput,
    RawThroughputMax,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssociationGameSpec {
    pub topo: SapUserTopology,
    pub utility_kind: AssociationUtilityKind,
}

/// A built association game. Players are the users with two or more
/// candidate SAPs; fixed users contribute static load.
#[derive(Debug)]
pub struct AssociationGame {
    topo: SapUserTopology,
    kind: AssociationUtilityKind,
    /// player index -> user id
    players: Vec<usize>,
    /// player index -> sorted candidate sap ids (the action set)
    actions: Vec<Vec<usize>>,
    /// sap id -> load from fixed users
    fixed_load: Vec<usize>,
    /// player index -> player indices whose candidate sets overlap
    neighbor_sets: Vec<BTreeSet<usize>>,
}

pub fn build_association_game(spec: AssociationGameSpec) -> Result<AssociationGame> {
    // SapUserTopology::new already validates non-empty candidate sets; a
    // hand-constructed topology is re-checked here.
    for u in &spec.topo.users {
        if u.candidate_saps.is_empty() {
            return Err(Error::config(format!("users[{}].candidate_saps: must not be empty", u.id)));
        }
        u.class.validate()?;
    }
    let n_saps = spec.topo.saps.len();
    let mut fixed_load = vec![0usize; n_saps];
    for u in spec.topo.fixed_users() {
        fixed_load[*u.candidate_saps.iter().next().unwrap()] += 1;
    }
    let players: Vec<usize> = spec.topo.flexible_users().map(|u| u.id).collect();
    let actions: Vec<Vec<usize>> = players
        .iter()
        .map(|&uid| spec.topo.users[uid].candidate_saps.iter().copied().collect())
        .collect();
    let mut neighbor_sets = vec![BTreeSet::new(); players.len()];
    for i in 0..players.len() {
        for j in (i + 1)..players.len() {
            let a: &BTreeSet<usize> = &spec.topo.users[players[i]].candidate_saps;
            let b = &spec.topo.users[players[j]].candidate_saps;
            if a.intersection(b).next().is_some() {
                neighbor_sets[i].insert(j);
                neighbor_sets[j].insert(i);
            }
        }
    }
    Ok(AssociationGame { topo: spec.topo, kind: spec.utility_kind, players, actions, fixed_load, neighbor_sets })
}

impl AssociationGame {
    pub fn topology(&self) -> &SapUserTopology {
        &self.topo
    }

    pub fn kind(&self) -> AssociationUtilityKind {
        self.kind
    }

    /// User ids of the players, in player-index order.
    pub fn player_users(&self) -> &[usize] {
        &self.players
    }

    pub fn action_sap(&self, player: usize, action: usize) -> usize {
        self.actions[player][action]
    }

    /// Per-SAP load (fixed + flexible) under a profile.
    pub fn loads(&self, profile: &ActionProfile) -> Vec<usize> {
        let mut load = self.fixed_load.clone();
        for p in 0..self.players.len() {
            load[self.actions[p][profile.action(p)]] += 1;
        }
        load
    }

    /// Equal-share rate of every user (fixed and flexible) under a profile.
    pub fn user_rates(&self, profile: &ActionProfile) -> Vec<f64> {
        let load = self.loads(profile);
        self.topo
            .users
            .iter()
            .map(|u| {
                let sap = if u.is_fixed() {
                    *u.candidate_saps.iter().next().unwrap()
                } else {
                    let p = self.players.iter().position(|&id| id == u.id).unwrap();
                    self.actions[p][profile.action(p)]
                };
                self.topo.saps[sap].capacity_bps / load[sap].max(1) as f64
            })
            .collect()
    }

    /// QoE level of every user under a profile.
    pub fn user_levels(&self, profile: &ActionProfile) -> Vec<QoeLevel> {
        self.user_rates(profile)
            .iter()
            .zip(&self.topo.users)
            .map(|(&r, u)| qoe_level(r, &u.class))
            .collect()
    }

    fn rate_of_player(&self, player: usize, profile: &ActionProfile) -> f64 {
        let sap = self.actions[player][profile.action(player)];
        let mut load = self.fixed_load[sap];
        for p in 0..self.players.len() {
            if self.actions[p][profile.action(p)] == sap {
                load += 1;
            }
        }
        self.topo.saps[sap].capacity_bps / load as f64
    }

    fn value_of_rate(&self, user: usize, r: f64) -> f64 {
        let class = &self.topo.users[user].class;
        match self.kind {
            AssociationUtilityKind::DiscreteQoe => qoe_level(r, class).ordinal() as f64,
            AssociationUtilityKind::ContinuousThroughput => {
                satisfaction_linear(r, class.r_rec_bps).unwrap_or(0.0)
            }
            AssociationUtilityKind::RawThroughputMax => r,
        }
    }
}

impl Game for AssociationGame {
    fn num_players(&self) -> usize {
        self.players.len()
    }

    fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    fn utility(&self, player: usize, profile: &ActionProfile) -> f64 {
        let r = self.rate_of_player(player, profile);
        self.value_of_rate(self.players[player], r)
    }

    fn neighbor_set(&self, player: usize) -> Option<&BTreeSet<usize>> {
        Some(&self.neighbor_sets[player])
    }

    fn payoff_normalizer(&self) -> PayoffNormalizer {
        let n = self.players.len();
        match self.kind {
            AssociationUtilityKind::DiscreteQoe => {
                PayoffNormalizer::from_bounds(vec![1.0; n], vec![5.0; n])
            }
            AssociationUtilityKind::ContinuousThroughput => PayoffNormalizer::identity(n),
            AssociationUtilityKind::RawThroughputMax => {
                let hi = (0..n)
                    .map(|p| {
                        self.actions[p]
                            .iter()
                            .map(|&s| self.topo.saps[s].capacity_bps)
                            .fold(0.0, f64::max)
                    })
                    .collect();
                PayoffNormalizer::from_bounds(vec![0.0; n], hi)
            }
        }
    }
}
