//! Cluster formation and the staged ("divide-and-conquer") decomposition
//! of a spectrum game: headers decide first for their clusters, members
//! adapt under the header's policy, and residual inter-cluster conflict
//! pairs clean up last.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, PayoffNormalizer};
use crate::games::spectrum::SpectrumGame;
use crate::net::NetworkTopology;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub header: usize,
    /// Sorted member cell ids, header included.
    pub members: Vec<usize>,
}

/// Disjoint clusters covering all cells, one header each; every member is
/// adjacent to its header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStructure {
    pub clusters: Vec<Cluster>,
}

impl ClusterStructure {
    pub fn validate(&self, topo: &NetworkTopology) -> Result<()> {
        let n = topo.num_cells();
        let mut seen = vec![false; n];
        for (ci, c) in self.clusters.iter().enumerate() {
            if !c.members.contains(&c.header) {
                return Err(Error::config(format!(
                    "clusters[{ci}]: header {} is not a member of its own cluster",
                    c.header
                )));
            }
            for &m in &c.members {
                if m >= n {
                    return Err(Error::config(format!("clusters[{ci}]: unknown cell {m}")));
                }
                if seen[m] {
                    return Err(Error::config(format!("clusters[{ci}]: cell {m} assigned twice")));
                }
                seen[m] = true;
                if m != c.header && !topo.neighbors(c.header)?.contains(&m) {
                    return Err(Error::config(format!(
                        "clusters[{ci}]: member {m} is not adjacent to header {}",
                        c.header
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::config(format!("cell {missing} is not assigned to any cluster")));
        }
        Ok(())
    }

    pub fn headers(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.header).collect()
    }

    /// cell id -> cluster index.
    pub fn cluster_of(&self, n_cells: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n_cells];
        for (ci, c) in self.clusters.iter().enumerate() {
            for &m in &c.members {
                out[m] = ci;
            }
        }
        out
    }
}

/// Greedy max-residual-degree clustering: repeatedly elect the unassigned
/// cell with the most unassigned neighbors as a header (ties to the lowest
/// id) and absorb those neighbors as its cluster.
pub fn cluster_topology(topo: &NetworkTopology) -> ClusterStructure {
    let n = topo.num_cells();
    let mut unassigned: BTreeSet<usize> = (0..n).collect();
    let mut clusters = Vec::new();
    while !unassigned.is_empty() {
        let header = *unassigned
            .iter()
            .max_by_key(|&&c| {
                let deg = topo.neighbors(c).unwrap().intersection(&unassigned).count();
                (deg, std::cmp::Reverse(c))
            })
            .unwrap();
        let mut members: Vec<usize> = topo
            .neighbors(header)
            .unwrap()
            .intersection(&unassigned)
            .copied()
            .collect();
        members.push(header);
        members.sort_unstable();
        for &m in &members {
            unassigned.remove(&m);
        }
        clusters.push(Cluster { header, members });
    }
    clusters.sort_by_key(|c| c.header);
    let structure = ClusterStructure { clusters };
    debug_assert!(structure.validate(topo).is_ok());
    structure
}

/// The staged plan: the header game of stage 1, the per-cluster member
/// stage under header policies, and the inter-cluster edges that stage 3
/// has to re-examine once channels are known.
#[derive(Debug, Clone)]
pub struct HierarchicalPlan {
    pub clusters: ClusterStructure,
    headers: Vec<usize>,
    cluster_of: Vec<usize>,
    /// Inter-cluster interference edges (i < j); the stage-3 candidates.
    cut_edges: Vec<(usize, usize)>,
    /// Cluster-level adjacency, indexed like `clusters`.
    header_adjacency: Vec<BTreeSet<usize>>,
    n_channels: usize,
}

pub fn build_hierarchical_stages(
    topo: &NetworkTopology,
    clusters: ClusterStructure,
) -> Result<HierarchicalPlan> {
    clusters.validate(topo)?;
    let n = topo.num_cells();
    let cluster_of = clusters.cluster_of(n);
    let headers = clusters.headers();
    let mut cut_edges = Vec::new();
    let mut header_adjacency = vec![BTreeSet::new(); clusters.clusters.len()];
    for (i, j) in topo.edges() {
        let (ci, cj) = (cluster_of[i], cluster_of[j]);
        if ci != cj {
            cut_edges.push((i, j));
            header_adjacency[ci].insert(cj);
            header_adjacency[cj].insert(ci);
        }
    }
    Ok(HierarchicalPlan {
        clusters,
        headers,
        cluster_of,
        cut_edges,
        header_adjacency,
        n_channels: topo.num_channels(),
    })
}

impl HierarchicalPlan {
    pub fn headers(&self) -> &[usize] {
        &self.headers
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    /// Non-header members per cluster.
    pub fn members_of(&self, cluster: usize) -> Vec<usize> {
        self.clusters.clusters[cluster]
            .members
            .iter()
            .copied()
            .filter(|&m| m != self.headers[cluster])
            .collect()
    }

    pub fn cut_edges(&self) -> &[(usize, usize)] {
        &self.cut_edges
    }

    /// Stage-2 policy: a member may not pick its header's channel (all
    /// members interfere with their header by construction) unless the
    /// network only has one channel.
    pub fn allowed_channels(&self, header_channel: usize) -> Vec<usize> {
        if self.n_channels <= 1 {
            return (0..self.n_channels).collect();
        }
        (0..self.n_channels).filter(|&ch| ch != header_channel).collect()
    }

    /// The inter-cluster pairs still interfering under `profile`: cut edges
    /// whose endpoints share a channel.
    pub fn residual_conflicts(&self, profile: &ActionProfile) -> Vec<(usize, usize)> {
        self.cut_edges
            .iter()
            .copied()
            .filter(|&(i, j)| profile.action(i) == profile.action(j))
            .collect()
    }

    /// Cells that keep learning in stage 3 under `profile`.
    pub fn stage3_learners(&self, profile: &ActionProfile) -> BTreeSet<usize> {
        self.residual_conflicts(profile).into_iter().flat_map(|(i, j)| [i, j]).collect()
    }

    /// Connected components of the residual conflict graph, each sorted;
    /// components ordered by their smallest cell.
    pub fn stage3_components(&self, profile: &ActionProfile) -> Vec<Vec<usize>> {
        let conflicts = self.residual_conflicts(profile);
        let cells: Vec<usize> = conflicts.iter().flat_map(|&(i, j)| [i, j]).collect();
        let mut repr: std::collections::BTreeMap<usize, usize> =
            cells.iter().map(|&c| (c, c)).collect();
        fn find(repr: &mut std::collections::BTreeMap<usize, usize>, c: usize) -> usize {
            let parent = repr[&c];
            if parent == c {
                return c;
            }
            let root = find(repr, parent);
            repr.insert(c, root);
            root
        }
        for &(i, j) in &conflicts {
            let (ri, rj) = (find(&mut repr, i), find(&mut repr, j));
            if ri != rj {
                let (lo, hi) = (ri.min(rj), ri.max(rj));
                repr.insert(hi, lo);
            }
        }
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        let keys: Vec<usize> = repr.keys().copied().collect();
        for c in keys {
            let root = find(&mut repr, c);
            by_root.entry(root).or_default().push(c);
        }
        by_root.into_values().collect()
    }

    /// The stage-1 game: headers pick channels to maximize their cluster's
    /// aggregate utility, members' channels frozen at `context`.
    pub fn header_game<'a>(&'a self, base: &'a SpectrumGame, context: ActionProfile) -> HeaderGame<'a> {
        HeaderGame { base, plan: self, context }
    }

    /// The stage-2 game of one cluster: its non-header members pick among
    /// the policy-allowed channels, everything else frozen at `context`.
    pub fn member_game<'a>(
        &'a self,
        base: &'a SpectrumGame,
        cluster: usize,
        context: ActionProfile,
    ) -> MemberGame<'a> {
        let members = self.members_of(cluster);
        let allowed = self.allowed_channels(context.action(self.headers[cluster]));
        MemberGame { base, members, allowed, context }
    }
}

/// Stage-1 game over cluster headers.
pub struct HeaderGame<'a> {
    base: &'a SpectrumGame,
    plan: &'a HierarchicalPlan,
    context: ActionProfile,
}

impl HeaderGame<'_> {
    /// Full-network profile implied by a header profile.
    pub fn assemble(&self, header_profile: &ActionProfile) -> ActionProfile {
        let mut full = self.context.clone();
        for (h_idx, &cell) in self.plan.headers.iter().enumerate() {
            full.set(cell, header_profile.action(h_idx));
        }
        full
    }
}

impl Game for HeaderGame<'_> {
    fn num_players(&self) -> usize {
        self.plan.headers.len()
    }

    fn num_actions(&self, _player: usize) -> usize {
        self.plan.n_channels
    }

    fn utility(&self, player: usize, profile: &ActionProfile) -> f64 {
        let full = self.assemble(profile);
        self.plan.clusters.clusters[player]
            .members
            .iter()
            .map(|&m| self.base.utility(m, &full))
            .sum()
    }

    fn neighbor_set(&self, player: usize) -> Option<&BTreeSet<usize>> {
        Some(&self.plan.header_adjacency[player])
    }

    fn payoff_normalizer(&self) -> PayoffNormalizer {
        PayoffNormalizer::identity(self.plan.headers.len())
    }
}

/// Stage-2 game over one cluster's non-header members.
pub struct MemberGame<'a> {
    base: &'a SpectrumGame,
    members: Vec<usize>,
    /// Action index -> channel id, the policy-allowed channels.
    allowed: Vec<usize>,
    context: ActionProfile,
}

impl MemberGame<'_> {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn allowed(&self) -> &[usize] {
        &self.allowed
    }

    pub fn assemble(&self, member_profile: &ActionProfile) -> ActionProfile {
        let mut full = self.context.clone();
        for (idx, &cell) in self.members.iter().enumerate() {
            full.set(cell, self.allowed[member_profile.action(idx)]);
        }
        full
    }
}

impl Game for MemberGame<'_> {
    fn num_players(&self) -> usize {
        self.members.len()
    }

    fn num_actions(&self, _player: usize) -> usize {
        self.allowed.len()
    }

    fn utility(&self, player: usize, profile: &ActionProfile) -> f64 {
        let full = self.assemble(profile);
        self.base.utility(self.members[player], &full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::spectrum::{build_spectrum_game, SatisfactionKind, SpectrumAccessGameSpec};
    use crate::net::{generate_topology, Cell, Channel, Point, Region, TopologyParams};

    fn topo_from_positions(points: &[(f64, f64)], radius: f64, channels: usize) -> NetworkTopology {
        let cells = points
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Cell {
                id,
                position: Point::new(x, y),
                tx_power_dbm: 20.0,
                active_prob: 1.0,
            })
            .collect();
        let chans = (0..channels).map(|id| Channel { id, bandwidth_hz: 1e6 }).collect();
        NetworkTopology::from_cells(cells, Region::new(100.0, 100.0), chans, radius).unwrap()
    }

    #[test]
    fn edgeless_graph_yields_singleton_clusters() {
        let topo = topo_from_positions(&[(5.0, 5.0), (50.0, 50.0), (95.0, 95.0)], 10.0, 2);
        let cs = cluster_topology(&topo);
        assert_eq!(cs.clusters.len(), 3);
        for (i, c) in cs.clusters.iter().enumerate() {
            assert_eq!(c.header, i);
            assert_eq!(c.members, vec![i]);
        }
    }

    #[test]
    fn star_graph_forms_one_cluster_with_hub_header() {
        // Hub at center, 4 leaves within radius of the hub but not of each
        // other.
        let topo = topo_from_positions(
            &[(50.0, 50.0), (50.0, 75.0), (50.0, 25.0), (25.0, 50.0), (75.0, 50.0)],
            26.0,
            2,
        );
        assert_eq!(topo.degree(0).unwrap(), 4);
        let cs = cluster_topology(&topo);
        assert_eq!(cs.clusters.len(), 1);
        assert_eq!(cs.clusters[0].header, 0);
        assert_eq!(cs.clusters[0].members, vec![0, 1, 2, 3, 4]);
    }

    /// The shipped 8-cell fixture: two chains meeting in the middle, with
    /// exactly one inter-cluster edge (3, 4) left after clustering.
    #[test]
    fn eight_cell_fixture_forms_two_clusters_with_max_degree_headers() {
        let json = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/cluster8.json"
        ))
        .unwrap();
        let topo = NetworkTopology::from_json(&json).unwrap();
        let cs = cluster_topology(&topo);
        cs.validate(&topo).unwrap();
        assert_eq!(cs.clusters.len(), 2);
        assert_eq!(cs.headers(), vec![2, 5]);
        assert_eq!(cs.clusters[0].members, vec![0, 1, 2, 3]);
        assert_eq!(cs.clusters[1].members, vec![4, 5, 6, 7]);
        // Headers have locally maximal degree within their clusters.
        for c in &cs.clusters {
            let hd = topo.degree(c.header).unwrap();
            for &m in &c.members {
                assert!(topo.degree(m).unwrap() <= hd);
            }
        }
        let plan = build_hierarchical_stages(&topo, cs).unwrap();
        assert_eq!(plan.cut_edges(), &[(3, 4)]);
        // Same channel on the cut pair -> residual conflict; different ->
        // clean.
        let conflicted = ActionProfile::new(vec![0, 1, 0, 1, 1, 0, 1, 1]);
        assert_eq!(plan.residual_conflicts(&conflicted), vec![(3, 4)]);
        assert_eq!(
            plan.stage3_learners(&conflicted).into_iter().collect::<Vec<_>>(),
            vec![3, 4]
        );
        let clean = ActionProfile::new(vec![0, 1, 0, 1, 2, 0, 1, 1]);
        assert!(plan.residual_conflicts(&clean).is_empty());
    }

    #[test]
    fn disconnected_cliques_have_no_cut_edges() {
        let topo = topo_from_positions(
            &[(10.0, 10.0), (20.0, 10.0), (15.0, 18.0), (80.0, 80.0), (90.0, 80.0), (85.0, 88.0)],
            15.0,
            2,
        );
        let cs = cluster_topology(&topo);
        assert_eq!(cs.clusters.len(), 2);
        let plan = build_hierarchical_stages(&topo, cs).unwrap();
        assert!(plan.cut_edges().is_empty());
        let any = ActionProfile::new(vec![0; 6]);
        assert!(plan.residual_conflicts(&any).is_empty());
    }

    #[test]
    fn seeded_topology_cut_edges_match_independent_recomputation() {
        let params = TopologyParams { n_cells: 20, ..TopologyParams::default() };
        let topo = generate_topology(77, &params).unwrap();
        let cs = cluster_topology(&topo);
        cs.validate(&topo).unwrap();
        let plan = build_hierarchical_stages(&topo, cs.clone()).unwrap();
        let cluster_of = cs.cluster_of(20);
        let mut expect = Vec::new();
        for i in 0..20 {
            for j in (i + 1)..20 {
                let adjacent = topo.neighbors(i).unwrap().contains(&j);
                if adjacent && cluster_of[i] != cluster_of[j] {
                    expect.push((i, j));
                }
            }
        }
        assert_eq!(plan.cut_edges(), expect.as_slice());

        // Residual conflicts under a concrete profile: recompute with the
        // channel filter.
        let profile = ActionProfile::new((0..20).map(|i| i % 3).collect());
        let expect_res: Vec<(usize, usize)> = expect
            .iter()
            .copied()
            .filter(|&(i, j)| profile.action(i) == profile.action(j))
            .collect();
        assert_eq!(plan.residual_conflicts(&profile), expect_res);
    }

    #[test]
    fn singleton_clusters_degenerate_to_the_flat_game() {
        let topo = topo_from_positions(&[(5.0, 5.0), (50.0, 50.0), (95.0, 95.0)], 10.0, 3);
        let game = build_spectrum_game(SpectrumAccessGameSpec::new(
            topo.clone(),
            SatisfactionKind::RawRate,
        ))
        .unwrap();
        let cs = cluster_topology(&topo);
        let plan = build_hierarchical_stages(&topo, cs).unwrap();
        // Stage 2 is empty everywhere.
        for c in 0..3 {
            assert!(plan.members_of(c).is_empty());
        }
        // The header game is the flat game: same players, same utilities.
        let context = ActionProfile::new(vec![0, 0, 0]);
        let hg = plan.header_game(&game, context);
        assert_eq!(hg.num_players(), 3);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let prof = ActionProfile::new(vec![a, b, c]);
                    for p in 0..3 {
                        assert_eq!(
                            hg.utility(p, &prof).to_bits(),
                            game.utility(p, &prof).to_bits()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn member_game_respects_header_policy() {
        let json = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/cluster8.json"
        ))
        .unwrap();
        let topo = NetworkTopology::from_json(&json).unwrap();
        let game =
            build_spectrum_game(SpectrumAccessGameSpec::new(topo.clone(), SatisfactionKind::RawRate))
                .unwrap();
        let cs = cluster_topology(&topo);
        let plan = build_hierarchical_stages(&topo, cs).unwrap();
        let mut context = ActionProfile::new(vec![0; 8]);
        context.set(2, 1); // header of cluster 0 on channel 1
        let mg = plan.member_game(&game, 0, context.clone());
        assert_eq!(mg.members(), &[0, 1, 3]);
        assert_eq!(mg.allowed(), &[0, 2], "header channel 1 masked out");
        // Assembly maps action indices through the allowed list.
        let assembled = mg.assemble(&ActionProfile::new(vec![1, 0, 1]));
        assert_eq!(assembled.action(0), 2);
        assert_eq!(assembled.action(1), 0);
        assert_eq!(assembled.action(3), 2);
        assert_eq!(assembled.action(2), 1, "header untouched");
    }
}
