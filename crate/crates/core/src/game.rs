//! Abstract finite-game machinery: profiles, the game oracle trait,
//! Nash-equilibrium checks and enumeration, exhaustive welfare optimization,
//! and the exact-potential 4-cycle verifier.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for equilibrium checks on deterministic utilities.
pub const NE_TOLERANCE: f64 = 1e-9;
/// Default cap on the joint profile-space size for exhaustive operations.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// A pure joint action assignment: one action index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionProfile(Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn action(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn set(&mut self, player: usize, action: usize) {
        self.0[player] = action;
    }

    /// Copy of this profile with one player's action replaced.
    pub fn with(&self, player: usize, action: usize) -> Self {
        let mut next = self.clone();
        next.set(player, action);
        next
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(v: Vec<usize>) -> Self {
        ActionProfile(v)
    }
}

/// One period of realized payoffs. `active[n]` is false when player `n`
/// made no observation this period (e.g. an inactive cell); such players
/// must not update their learners.
#[derive(Debug, Clone)]
pub struct Realization {
    pub payoffs: Vec<f64>,
    pub active: Vec<bool>,
}

impl Realization {
    pub fn deterministic(payoffs: Vec<f64>) -> Self {
        let n = payoffs.len();
        Realization { payoffs, active: vec![true; n] }
    }
}

/// Static per-player affine map taking raw payoffs into [0, 1] for the
/// learning dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffNormalizer {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PayoffNormalizer {
    pub fn identity(num_players: usize) -> Self {
        PayoffNormalizer { lo: vec![0.0; num_players], hi: vec![1.0; num_players] }
    }

    /// Per-player bounds; payoffs are mapped as (x - lo) / (hi - lo).
    pub fn from_bounds(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        PayoffNormalizer { lo, hi }
    }

    pub fn normalize(&self, player: usize, raw: f64) -> Result<f64> {
        let span = self.hi[player] - self.lo[player];
        let v = if span > 0.0 { (raw - self.lo[player]) / span } else { 0.0 };
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::PayoffOutOfRange { player, value: v });
        }
        Ok(v)
    }
}

/// A finite game given as an oracle.
///
/// `utility` is the deterministic (possibly expectation-valued) utility that
/// equilibrium analysis runs on; `realize` draws one period of realized
/// payoffs for the learning dynamics and defaults to the deterministic
/// utilities.
pub trait Game: Send + Sync {
    fn num_players(&self) -> usize;

    fn num_actions(&self, player: usize) -> usize;

    fn utility(&self, player: usize, profile: &ActionProfile) -> f64;

    /// Dependency neighborhoods, when the game is graphical.
    fn neighbor_set(&self, _player: usize) -> Option<&BTreeSet<usize>> {
        None
    }

    fn realize(&self, profile: &ActionProfile, _rng: &mut dyn RngCore) -> Realization {
        Realization::deterministic(
            (0..self.num_players()).map(|p| self.utility(p, profile)).collect(),
        )
    }

    fn payoff_normalizer(&self) -> PayoffNormalizer {
        PayoffNormalizer::identity(self.num_players())
    }
}

/// Joint profile-space size, or None on overflow.
pub fn profile_space_size(game: &dyn Game) -> Option<u128> {
    let mut size: u128 = 1;
    for p in 0..game.num_players() {
        size = size.checked_mul(game.num_actions(p) as u128)?;
    }
    Some(size)
}

pub fn validate_profile(game: &dyn Game, profile: &ActionProfile) -> Result<()> {
    if profile.len() != game.num_players() {
        return Err(Error::InvalidProfile(format!(
            "expected {} players, got {}",
            game.num_players(),
            profile.len()
        )));
    }
    for p in 0..profile.len() {
        if profile.action(p) >= game.num_actions(p) {
            return Err(Error::InvalidProfile(format!(
                "player {p}: action {} out of range (has {} actions)",
                profile.action(p),
                game.num_actions(p)
            )));
        }
    }
    Ok(())
}

/// Decodes a flat index into a profile (mixed-radix, player 0 slowest).
fn decode_profile(game: &dyn Game, mut index: u128) -> ActionProfile {
    let n = game.num_players();
    let mut actions = vec![0usize; n];
    for p in (0..n).rev() {
        let k = game.num_actions(p) as u128;
        actions[p] = (index % k) as usize;
        index /= k;
    }
    ActionProfile(actions)
}

/// Argmax tie-breaking rule. `LowestIndex` is the reproducible default;
/// `Seeded` picks uniformly among maximizers with a generator derived from
/// the seed, the player, and the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    LowestIndex,
    Seeded(u64),
}

/// Best response of `player` to `profile`: the utility-maximizing own
/// action, deterministic under the configured tie-break.
pub fn best_response(
    game: &dyn Game,
    profile: &ActionProfile,
    player: usize,
    tie_break: TieBreak,
) -> usize {
    debug_assert!(validate_profile(game, profile).is_ok());
    let mut best_value = f64::NEG_INFINITY;
    let mut best_actions: Vec<usize> = Vec::new();
    let mut scratch = profile.clone();
    for a in 0..game.num_actions(player) {
        scratch.set(player, a);
        let u = game.utility(player, &scratch);
        if u > best_value {
            best_value = u;
            best_actions.clear();
            best_actions.push(a);
        } else if u == best_value {
            best_actions.push(a);
        }
    }
    match tie_break {
        TieBreak::LowestIndex => best_actions[0],
        TieBreak::Seeded(seed) => {
            use std::hash::{Hash, Hasher};
            let mut h = std::collections::hash_map::DefaultHasher::new();
            seed.hash(&mut h);
            player.hash(&mut h);
            profile.as_slice().hash(&mut h);
            let mut rng = crate::seeding::rng_from_seed(h.finish());
            best_actions[rng.gen_range(0..best_actions.len())]
        }
    }
}

/// True iff no unilateral deviation gains more than `tolerance`.
pub fn is_pure_ne(game: &dyn Game, profile: &ActionProfile, tolerance: f64) -> bool {
    debug_assert!(validate_profile(game, profile).is_ok());
    let mut scratch = profile.clone();
    for p in 0..game.num_players() {
        let current = game.utility(p, profile);
        let own = profile.action(p);
        for a in 0..game.num_actions(p) {
            if a == own {
                continue;
            }
            scratch.set(p, a);
            if game.utility(p, &scratch) > current + tolerance {
                return false;
            }
        }
        scratch.set(p, own);
    }
    true
}

/// Exhaustively enumerates all pure Nash equilibria, in lexicographic
/// profile order. Errors when the profile space exceeds `cap`.
pub fn enumerate_pure_ne(
    game: &dyn Game,
    tolerance: f64,
    cap: u128,
) -> Result<Vec<ActionProfile>> {
    let size = profile_space_size(game).ok_or(Error::CapacityExceeded { size: u128::MAX, cap })?;
    if size > cap {
        return Err(Error::CapacityExceeded { size, cap });
    }
    let total = size as u64;
    let hits: Vec<ActionProfile> = (0..total)
        .into_par_iter()
        .filter_map(|i| {
            let profile = decode_profile(game, i as u128);
            is_pure_ne(game, &profile, tolerance).then_some(profile)
        })
        .collect();
    Ok(hits)
}

/// Welfare aggregate over per-player utilities, or a custom profile-valued
/// objective (used e.g. to rank equilibria by a metric other than the game
/// utility itself).
pub enum Welfare<'a> {
    SumUtilities,
    MinUtility,
    Profile(&'a (dyn Fn(&ActionProfile) -> f64 + Sync)),
}

impl Welfare<'_> {
    pub fn evaluate(&self, game: &dyn Game, profile: &ActionProfile) -> f64 {
        match self {
            Welfare::SumUtilities => {
                (0..game.num_players()).map(|p| game.utility(p, profile)).sum()
            }
            Welfare::MinUtility => (0..game.num_players())
                .map(|p| game.utility(p, profile))
                .fold(f64::INFINITY, f64::min),
            Welfare::Profile(f) => f(profile),
        }
    }
}

/// Exhaustive welfare maximization over the whole profile space. Ties go to
/// the lexicographically smallest profile. Errors when the space exceeds
/// `cap`.
pub fn exhaustive_optimum(
    game: &dyn Game,
    welfare: &Welfare<'_>,
    cap: u128,
) -> Result<(ActionProfile, f64)> {
    let size = profile_space_size(game).ok_or(Error::CapacityExceeded { size: u128::MAX, cap })?;
    if size > cap {
        return Err(Error::CapacityExceeded { size, cap });
    }
    let total = size as u64;
    let best = (0..total)
        .into_par_iter()
        .map(|i| {
            let profile = decode_profile(game, i as u128);
            let w = welfare.evaluate(game, &profile);
            (i, w)
        })
        .reduce(
            || (u64::MAX, f64::NEG_INFINITY),
            |a, b| {
                // Strictly better welfare wins; equal welfare goes to the
                // smaller index so the result is worker-count independent.
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    Ok((decode_profile(game, best.0 as u128), best.1))
}

/// Report from the exact-potential cycle verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub trials: usize,
    pub violations: usize,
    pub max_gap: f64,
}

/// Samples random two-player 4-cycles of unilateral deviations and checks
/// that the utility changes sum to zero around each cycle, the
/// finite-improvement characterization of an exact potential game.
///
/// Games without two multi-action players admit no 4-cycles; the report is
/// then trivially clean.
pub fn verify_potential_cycles(
    game: &dyn Game,
    trials: usize,
    rng: &mut impl Rng,
    tolerance: f64,
) -> CycleReport {
    let n = game.num_players();
    let movable: Vec<usize> = (0..n).filter(|&p| game.num_actions(p) >= 2).collect();
    if movable.len() < 2 {
        return CycleReport { trials, violations: 0, max_gap: 0.0 };
    }
    let mut violations = 0usize;
    let mut max_gap = 0.0f64;
    for _ in 0..trials {
        let actions: Vec<usize> = (0..n).map(|p| rng.gen_range(0..game.num_actions(p))).collect();
        let base = ActionProfile::new(actions);
        let i = movable[rng.gen_range(0..movable.len())];
        let j = loop {
            let j = movable[rng.gen_range(0..movable.len())];
            if j != i {
                break j;
            }
        };
        let ai = base.action(i);
        let aj = base.action(j);
        let ai2 = alternative_action(game, i, ai, rng);
        let aj2 = alternative_action(game, j, aj, rng);

        // Cycle (ai,aj) -> (ai2,aj) -> (ai2,aj2) -> (ai,aj2) -> (ai,aj),
        // each step a unilateral deviation by the named player.
        let p00 = base.clone();
        let p10 = base.with(i, ai2);
        let p11 = p10.with(j, aj2);
        let p01 = base.with(j, aj2);
        let sum = (game.utility(i, &p10) - game.utility(i, &p00))
            + (game.utility(j, &p11) - game.utility(j, &p10))
            + (game.utility(i, &p01) - game.utility(i, &p11))
            + (game.utility(j, &p00) - game.utility(j, &p01));
        let gap = sum.abs();
        if gap > tolerance {
            violations += 1;
        }
        max_gap = max_gap.max(gap);
    }
    CycleReport { trials, violations, max_gap }
}

fn alternative_action(game: &dyn Game, player: usize, current: usize, rng: &mut impl Rng) -> usize {
    let k = game.num_actions(player);
    debug_assert!(k >= 2);
    let pick = rng.gen_range(0..k - 1);
    if pick >= current {
        pick + 1
    } else {
        pick
    }
}

// ---------------------------------------------------------------------------
// Mixed profiles
// ---------------------------------------------------------------------------

/// Per-player probability vectors over actions; the learning-automata state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile(Vec<Vec<f64>>);

impl MixedProfile {
    pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

    pub fn uniform(game: &dyn Game) -> Self {
        MixedProfile(
            (0..game.num_players())
                .map(|p| {
                    let k = game.num_actions(p);
                    vec![1.0 / k as f64; k]
                })
                .collect(),
        )
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mp = MixedProfile(rows);
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        for (p, row) in self.0.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidProfile(format!("player {p}: empty action set")));
            }
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidProfile(format!(
                    "player {p}: negative or non-finite probability"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::SIMPLEX_TOLERANCE {
                return Err(Error::InvalidProfile(format!(
                    "player {p}: probabilities sum to {sum}"
                )));
            }
        }
        Ok(())
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn row(&self, player: usize) -> &[f64] {
        &self.0[player]
    }

    pub fn row_mut(&mut self, player: usize) -> &mut Vec<f64> {
        &mut self.0[player]
    }

    /// Samples one action per player.
    pub fn sample(&self, rng: &mut impl Rng) -> ActionProfile {
        ActionProfile(
            self.0
                .iter()
                .map(|row| {
                    let x: f64 = rng.gen();
                    let mut acc = 0.0;
                    for (a, &p) in row.iter().enumerate() {
                        acc += p;
                        if x < acc {
                            return a;
                        }
                    }
                    row.len() - 1
                })
                .collect(),
        )
    }

    /// Highest-probability action per player, lowest index on ties.
    pub fn greedy(&self) -> ActionProfile {
        ActionProfile(
            self.0
                .iter()
                .map(|row| {
                    let mut best = 0;
                    for (a, &p) in row.iter().enumerate() {
                        if p > row[best] {
                            best = a;
                        }
                    }
                    best
                })
                .collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Table games (tests, benchmarks, small fixtures)
// ---------------------------------------------------------------------------

/// A finite game with explicitly tabulated utilities.
pub struct TableGame {
    action_counts: Vec<usize>,
    /// utilities[player][flat profile index]
    utilities: Vec<Vec<f64>>,
}

impl TableGame {
    pub fn from_fn(
        action_counts: Vec<usize>,
        mut utility: impl FnMut(usize, &ActionProfile) -> f64,
    ) -> Self {
        let size: usize = action_counts.iter().product();
        let n = action_counts.len();
        let mut utilities = vec![vec![0.0; size]; n];
        for flat in 0..size {
            let profile = Self::decode(&action_counts, flat);
            for (p, table) in utilities.iter_mut().enumerate() {
                table[flat] = utility(p, &profile);
            }
        }
        TableGame { action_counts, utilities }
    }

    pub fn random(action_counts: Vec<usize>, rng: &mut impl Rng) -> Self {
        Self::from_fn(action_counts, |_, _| rng.gen::<f64>())
    }

    fn decode(counts: &[usize], mut flat: usize) -> ActionProfile {
        let mut actions = vec![0usize; counts.len()];
        for p in (0..counts.len()).rev() {
            actions[p] = flat % counts[p];
            flat /= counts[p];
        }
        ActionProfile(actions)
    }

    fn encode(&self, profile: &ActionProfile) -> usize {
        let mut flat = 0usize;
        for p in 0..self.action_counts.len() {
            flat = flat * self.action_counts[p] + profile.action(p);
        }
        flat
    }
}

impl Game for TableGame {
    fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    fn num_actions(&self, player: usize) -> usize {
        self.action_counts[player]
    }

    fn utility(&self, player: usize, profile: &ActionProfile) -> f64 {
        self.utilities[player][self.encode(profile)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    /// 2-player anti-coordination over `k` channels: payoff 1 when apart,
    /// 0 on collision.
    fn anti_coordination(k: usize) -> TableGame {
        TableGame::from_fn(vec![k, k], |_, prof| {
            if prof.action(0) == prof.action(1) {
                0.0
            } else {
                1.0
            }
        })
    }

    fn matching_pennies() -> TableGame {
        TableGame::from_fn(vec![2, 2], |p, prof| {
            let matched = prof.action(0) == prof.action(1);
            match (p, matched) {
                (0, true) | (1, false) => 1.0,
                _ => -1.0,
            }
        })
    }

    #[test]
    fn best_response_single_action_player() {
        let g = TableGame::from_fn(vec![1, 3], |_, _| 0.0);
        let prof = ActionProfile::new(vec![0, 1]);
        assert_eq!(best_response(&g, &prof, 0, TieBreak::LowestIndex), 0);
    }

    #[test]
    fn best_response_avoids_collision_in_anti_coordination() {
        let g = anti_coordination(2);
        let prof = ActionProfile::new(vec![0, 0]);
        assert_eq!(best_response(&g, &prof, 1, TieBreak::LowestIndex), 1);
        let prof = ActionProfile::new(vec![1, 1]);
        assert_eq!(best_response(&g, &prof, 1, TieBreak::LowestIndex), 0);
    }

    #[test]
    fn best_response_matches_exhaustive_scan_on_random_games() {
        let mut rng = rng_from_seed(5);
        for _ in 0..20 {
            let g = TableGame::random(vec![3, 3, 3], &mut rng);
            let prof = ActionProfile::new(vec![
                rng.gen_range(0..3),
                rng.gen_range(0..3),
                rng.gen_range(0..3),
            ]);
            for p in 0..3 {
                let br = best_response(&g, &prof, p, TieBreak::LowestIndex);
                let mut best = 0usize;
                let mut best_u = f64::NEG_INFINITY;
                for a in 0..3 {
                    let u = g.utility(p, &prof.with(p, a));
                    if u > best_u {
                        best_u = u;
                        best = a;
                    }
                }
                assert_eq!(br, best);
            }
        }
    }

    #[test]
    fn best_response_never_strictly_worse_than_current() {
        let mut rng = rng_from_seed(17);
        for _ in 0..50 {
            let g = TableGame::random(vec![2, 4, 3], &mut rng);
            let prof = ActionProfile::new(vec![
                rng.gen_range(0..2),
                rng.gen_range(0..4),
                rng.gen_range(0..3),
            ]);
            for p in 0..3 {
                let br = best_response(&g, &prof, p, TieBreak::LowestIndex);
                assert!(g.utility(p, &prof.with(p, br)) >= g.utility(p, &prof));
            }
        }
    }

    #[test]
    fn single_action_game_is_trivially_ne() {
        let g = TableGame::from_fn(vec![1, 1, 1], |_, _| 1.0);
        assert!(is_pure_ne(&g, &ActionProfile::new(vec![0, 0, 0]), NE_TOLERANCE));
    }

    #[test]
    fn anti_coordination_ne_set_is_exact() {
        let g = anti_coordination(2);
        let nes = enumerate_pure_ne(&g, NE_TOLERANCE, ENUMERATION_CAP).unwrap();
        assert_eq!(
            nes,
            vec![ActionProfile::new(vec![0, 1]), ActionProfile::new(vec![1, 0])]
        );
        assert!(is_pure_ne(&g, &ActionProfile::new(vec![0, 1]), NE_TOLERANCE));
        assert!(!is_pure_ne(&g, &ActionProfile::new(vec![0, 0]), NE_TOLERANCE));
    }

    #[test]
    fn ne_agrees_with_deviation_enumeration_on_random_games() {
        let mut rng = rng_from_seed(23);
        for _ in 0..30 {
            let g = TableGame::random(vec![2, 2, 2], &mut rng);
            let nes = enumerate_pure_ne(&g, NE_TOLERANCE, ENUMERATION_CAP).unwrap();
            // Independent double-loop check.
            let mut expect = Vec::new();
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let prof = ActionProfile::new(vec![a, b, c]);
                        let mut ne = true;
                        for p in 0..3 {
                            let cur = g.utility(p, &prof);
                            for alt in 0..2 {
                                if g.utility(p, &prof.with(p, alt)) > cur + NE_TOLERANCE {
                                    ne = false;
                                }
                            }
                        }
                        if ne {
                            expect.push(prof);
                        }
                    }
                }
            }
            assert_eq!(nes, expect);
        }
    }

    #[test]
    fn enumeration_cap_is_enforced_with_size_in_error() {
        let g = TableGame::from_fn(vec![4, 4], |_, _| 0.0);
        let err = enumerate_pure_ne(&g, NE_TOLERANCE, 10).unwrap_err();
        match err {
            Error::CapacityExceeded { size, cap } => {
                assert_eq!(size, 16);
                assert_eq!(cap, 10);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn optimum_single_player_is_argmax() {
        let g = TableGame::from_fn(vec![4], |_, prof| prof.action(0) as f64 * 0.5);
        let (prof, w) = exhaustive_optimum(&g, &Welfare::SumUtilities, ENUMERATION_CAP).unwrap();
        assert_eq!(prof, ActionProfile::new(vec![3]));
        assert!((w - 1.5).abs() < 1e-12);
    }

    #[test]
    fn optimum_anti_coordination_pair() {
        let g = anti_coordination(2);
        let (prof, w) = exhaustive_optimum(&g, &Welfare::SumUtilities, ENUMERATION_CAP).unwrap();
        assert_ne!(prof.action(0), prof.action(1));
        assert!((w - 2.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_dominates_every_ne() {
        let mut rng = rng_from_seed(31);
        for _ in 0..10 {
            let g = TableGame::random(vec![3, 3, 2], &mut rng);
            let (_, opt) = exhaustive_optimum(&g, &Welfare::SumUtilities, ENUMERATION_CAP).unwrap();
            for ne in enumerate_pure_ne(&g, NE_TOLERANCE, ENUMERATION_CAP).unwrap() {
                let w = Welfare::SumUtilities.evaluate(&g, &ne);
                assert!(opt >= w - 1e-12);
            }
        }
    }

    #[test]
    fn shared_global_utility_has_no_cycle_violations() {
        let mut rng = rng_from_seed(99);
        // Every player gets the same global function: an identical-interest
        // game is an exact potential game.
        let shared = TableGame::random(vec![3, 3, 3], &mut rng);
        let g = TableGame::from_fn(vec![3, 3, 3], |_, prof| shared.utility(0, prof));
        let report = verify_potential_cycles(&g, 2000, &mut rng, 1e-9);
        assert_eq!(report.violations, 0);
        assert!(report.max_gap <= 1e-9);
    }

    #[test]
    fn matching_pennies_violates_cycles() {
        // Every step of the 4-cycle in matching pennies changes the
        // deviator's utility by -2 or +2 with a common sign, so the cycle
        // sum is +-8 by hand.
        let g = matching_pennies();
        let mut rng = rng_from_seed(7);
        let report = verify_potential_cycles(&g, 500, &mut rng, 1e-6);
        assert_eq!(report.violations, 500);
        assert!((report.max_gap - 8.0).abs() < 1e-12);
    }

    #[test]
    fn potential_game_has_nonempty_ne_set() {
        // Congestion-style identical-interest game: exhaustively verified
        // potential => at least one pure NE.
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let shared = TableGame::random(vec![2, 3, 2], &mut rng);
            let g = TableGame::from_fn(vec![2, 3, 2], |_, prof| shared.utility(0, prof));
            let report = verify_potential_cycles(&g, 1000, &mut rng, 1e-9);
            assert_eq!(report.violations, 0);
            assert!(!enumerate_pure_ne(&g, NE_TOLERANCE, ENUMERATION_CAP).unwrap().is_empty());
        }
    }

    #[test]
    fn mixed_profile_sampling_and_greedy() {
        let g = TableGame::from_fn(vec![2, 3], |_, _| 0.0);
        let mp = MixedProfile::from_rows(vec![vec![1.0, 0.0], vec![0.1, 0.2, 0.7]]).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..50 {
            let s = mp.sample(&mut rng);
            assert_eq!(s.action(0), 0);
            assert!(s.action(1) < 3);
        }
        assert_eq!(mp.greedy(), ActionProfile::new(vec![0, 2]));
        assert!(MixedProfile::uniform(&g).validate().is_ok());
        assert!(MixedProfile::from_rows(vec![vec![0.5, 0.4]]).is_err());
        assert!(MixedProfile::from_rows(vec![vec![-0.1, 1.1]]).is_err());
    }

    #[test]
    fn normalizer_maps_bounds_and_flags_violations() {
        let norm = PayoffNormalizer::from_bounds(vec![-2.0], vec![0.0]);
        assert_eq!(norm.normalize(0, -2.0).unwrap(), 0.0);
        assert_eq!(norm.normalize(0, 0.0).unwrap(), 1.0);
        assert!((norm.normalize(0, -1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(norm.normalize(0, 0.5), Err(Error::PayoffOutOfRange { .. })));
    }

    proptest! {
        #[test]
        fn enumerated_nes_and_membership_check_agree(seed in 0u64..200) {
            let mut rng = rng_from_seed(seed);
            let g = TableGame::random(vec![2, 3, 2], &mut rng);
            let nes = enumerate_pure_ne(&g, NE_TOLERANCE, ENUMERATION_CAP).unwrap();
            let ne_set: std::collections::HashSet<_> = nes.iter().cloned().collect();
            for flat in 0..12usize {
                let prof = TableGame::decode(&[2, 3, 2], flat);
                prop_assert_eq!(ne_set.contains(&prof), is_pure_ne(&g, &prof, NE_TOLERANCE));
            }
        }
    }
}
