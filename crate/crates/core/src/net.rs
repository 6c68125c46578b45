//! Physical deployment model: cell positions, channels, activity
//! probabilities, and the derived interference graph.
//!
//! The interference model is a protocol (disk) model: two cells are graph
//! neighbors iff their distance is at most `interference_radius_m`. Whether
//! a neighbor actually interferes additionally depends on it being active
//! and on the same channel; both of those are decided at utility-evaluation
//! time, so the graph itself is purely geometric.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

/// 2-D position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Deployment region, width x height in meters, anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width_m: f64,
    pub height_m: f64,
}

impl Region {
    pub fn new(width_m: f64, height_m: f64) -> Self {
        Region { width_m, height_m }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= 0.0 && p.x <= self.width_m && p.y >= 0.0 && p.y <= self.height_m
    }
}

/// A radio channel available to every cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub id: usize,
    pub bandwidth_hz: f64,
}

/// One small cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub position: Point,
    pub tx_power_dbm: f64,
    /// Per-period spectrum-access probability, in (0, 1].
    pub active_prob: f64,
}

/// Serialized form of a topology: the graph is derived, not stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyDoc {
    cells: Vec<Cell>,
    region: Region,
    channels: Vec<Channel>,
    interference_radius_m: f64,
}

/// An immutable small-cell deployment plus its interference graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    cells: Vec<Cell>,
    region: Region,
    channels: Vec<Channel>,
    interference_radius_m: f64,
    graph: Vec<BTreeSet<usize>>,
}

impl NetworkTopology {
    /// Builds a topology from explicit cells, validating every invariant
    /// and deriving the interference graph.
    pub fn from_cells(
        cells: Vec<Cell>,
        region: Region,
        channels: Vec<Channel>,
        interference_radius_m: f64,
    ) -> Result<Self> {
        let mut issues = Vec::new();
        if cells.is_empty() {
            issues.push("cells: at least one cell is required".to_string());
        }
        if channels.is_empty() {
            issues.push("channels: at least one channel is required".to_string());
        }
        if !(interference_radius_m > 0.0) {
            issues.push(format!(
                "interference_radius_m: must be > 0, got {interference_radius_m}"
            ));
        }
        if !(region.width_m > 0.0 && region.height_m > 0.0) {
            issues.push(format!(
                "region: dimensions must be positive, got {} x {}",
                region.width_m, region.height_m
            ));
        }
        for (i, c) in cells.iter().enumerate() {
            if c.id != i {
                issues.push(format!("cells[{i}].id: expected {i}, got {}", c.id));
            }
            if !(c.active_prob > 0.0 && c.active_prob <= 1.0) {
                issues.push(format!(
                    "cells[{i}].active_prob: must be in (0, 1], got {}",
                    c.active_prob
                ));
            }
            if !region.contains(&c.position) {
                issues.push(format!(
                    "cells[{i}].position: ({}, {}) lies outside the region",
                    c.position.x, c.position.y
                ));
            }
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.id != i {
                issues.push(format!("channels[{i}].id: expected {i}, got {}", ch.id));
            }
            if !(ch.bandwidth_hz > 0.0) {
                issues.push(format!(
                    "channels[{i}].bandwidth_hz: must be > 0, got {}",
                    ch.bandwidth_hz
                ));
            }
        }
        if !issues.is_empty() {
            return Err(Error::InvalidConfig { issues });
        }

        let n = cells.len();
        let mut graph = vec![BTreeSet::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if cells[i].position.distance(&cells[j].position) <= interference_radius_m {
                    graph[i].insert(j);
                    graph[j].insert(i);
                }
            }
        }
        Ok(NetworkTopology { cells, region, channels, interference_radius_m, graph })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn interference_radius_m(&self) -> f64 {
        self.interference_radius_m
    }

    pub fn cell(&self, id: usize) -> Result<&Cell> {
        self.cells.get(id).ok_or(Error::UnknownCell(id))
    }

    /// Interference-graph neighbors of `cell`. The cell itself is never in
    /// the result.
    pub fn neighbors(&self, cell: usize) -> Result<&BTreeSet<usize>> {
        self.graph.get(cell).ok_or(Error::UnknownCell(cell))
    }

    pub fn degree(&self, cell: usize) -> Result<usize> {
        Ok(self.neighbors(cell)?.len())
    }

    /// Edge list with i < j.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, ns) in self.graph.iter().enumerate() {
            for &j in ns.iter().filter(|&&j| j > i) {
                out.push((i, j));
            }
        }
        out
    }

    /// Draws one random active cell set: each cell is included
    /// independently with its own `active_prob`.
    pub fn sample_active_set(&self, rng: &mut impl Rng) -> BTreeSet<usize> {
        self.sample_active_mask(rng)
            .into_iter()
            .enumerate()
            .filter_map(|(i, on)| on.then_some(i))
            .collect()
    }

    /// Mask form of [`Self::sample_active_set`]; used by hot loops.
    pub fn sample_active_mask(&self, rng: &mut impl Rng) -> Vec<bool> {
        self.cells
            .iter()
            .map(|c| rng.gen::<f64>() < c.active_prob)
            .collect()
    }

    /// Returns a copy with every cell's `active_prob` replaced.
    pub fn with_uniform_active_prob(&self, lambda: f64) -> Result<Self> {
        let mut cells = self.cells.clone();
        for c in &mut cells {
            c.active_prob = lambda;
        }
        NetworkTopology::from_cells(cells, self.region, self.channels.clone(), self.interference_radius_m)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TopologyDoc {
            cells: self.cells.clone(),
            region: self.region,
            channels: self.channels.clone(),
            interference_radius_m: self.interference_radius_m,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TopologyDoc = serde_json::from_str(text)?;
        NetworkTopology::from_cells(doc.cells, doc.region, doc.channels, doc.interference_radius_m)
    }
}

impl Serialize for NetworkTopology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TopologyDoc {
            cells: self.cells.clone(),
            region: self.region,
            channels: self.channels.clone(),
            interference_radius_m: self.interference_radius_m,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NetworkTopology {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TopologyDoc::deserialize(d)?;
        NetworkTopology::from_cells(doc.cells, doc.region, doc.channels, doc.interference_radius_m)
            .map_err(serde::de::Error::custom)
    }
}

/// Per-cell value that may be given as one scalar for all cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerCell {
    Scalar(f64),
    Each(Vec<f64>),
}

impl PerCell {
    pub fn resolve(&self, n: usize, field: &str) -> Result<Vec<f64>> {
        match self {
            PerCell::Scalar(v) => Ok(vec![*v; n]),
            PerCell::Each(vs) if vs.len() == n => Ok(vs.clone()),
            PerCell::Each(vs) => Err(Error::config(format!(
                "{field}: expected {n} entries, got {}",
                vs.len()
            ))),
        }
    }
}

/// Parameters for random topology generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub n_cells: usize,
    pub region: Region,
    pub interference_radius_m: f64,
    /// Number of channels; all get `channel_bandwidth_hz`.
    pub n_channels: usize,
    pub channel_bandwidth_hz: f64,
    pub tx_power_dbm: PerCell,
    pub active_prob: PerCell,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            n_cells: 9,
            region: Region::new(100.0, 100.0),
            interference_radius_m: 30.0,
            n_channels: 3,
            channel_bandwidth_hz: 1.0e6,
            tx_power_dbm: PerCell::Scalar(20.0),
            active_prob: PerCell::Scalar(1.0),
        }
    }
}

/// Generates a topology with cell positions i.i.d. uniform over the region.
/// Identical `(seed, params)` produce an identical topology.
pub fn generate_topology(seed: u64, params: &TopologyParams) -> Result<NetworkTopology> {
    let mut issues = Vec::new();
    if params.n_cells == 0 {
        issues.push("n_cells: must be >= 1".to_string());
    }
    if params.n_channels == 0 {
        issues.push("n_channels: must be >= 1".to_string());
    }
    if !issues.is_empty() {
        return Err(Error::InvalidConfig { issues });
    }
    let tx = params.tx_power_dbm.resolve(params.n_cells, "tx_power_dbm")?;
    let lambda = params.active_prob.resolve(params.n_cells, "active_prob")?;

    let mut rng = rng_from_seed(seed);
    let cells = (0..params.n_cells)
        .map(|id| {
            let x = rng.gen::<f64>() * params.region.width_m;
            let y = rng.gen::<f64>() * params.region.height_m;
            Cell { id, position: Point::new(x, y), tx_power_dbm: tx[id], active_prob: lambda[id] }
        })
        .collect();
    let channels = (0..params.n_channels)
        .map(|id| Channel { id, bandwidth_hz: params.channel_bandwidth_hz })
        .collect();
    NetworkTopology::from_cells(cells, params.region, channels, params.interference_radius_m)
}

// ---------------------------------------------------------------------------
// SAP / user topologies for the association game
// ---------------------------------------------------------------------------

/// A small-cell access point with a fixed downlink capacity shared equally
/// by its associated users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sap {
    pub id: usize,
    pub capacity_bps: f64,
}

/// A user with a traffic class and the set of SAPs it can reach. Users with
/// exactly one candidate are "fixed"; the rest are the association-game
/// players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub class: crate::utility::TrafficClass,
    pub candidate_saps: BTreeSet<usize>,
}

impl User {
    pub fn is_fixed(&self) -> bool {
        self.candidate_saps.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SapUserTopology {
    pub saps: Vec<Sap>,
    pub users: Vec<User>,
}

impl SapUserTopology {
    pub fn new(saps: Vec<Sap>, users: Vec<User>) -> Result<Self> {
        let mut issues = Vec::new();
        if saps.is_empty() {
            issues.push("saps: at least one SAP is required".to_string());
        }
        for (i, s) in saps.iter().enumerate() {
            if s.id != i {
                issues.push(format!("saps[{i}].id: expected {i}, got {}", s.id));
            }
            if !(s.capacity_bps > 0.0) {
                issues.push(format!("saps[{i}].capacity_bps: must be > 0, got {}", s.capacity_bps));
            }
        }
        for (i, u) in users.iter().enumerate() {
            if u.id != i {
                issues.push(format!("users[{i}].id: expected {i}, got {}", u.id));
            }
            if u.candidate_saps.is_empty() {
                issues.push(format!("users[{i}].candidate_saps: must not be empty"));
            }
            for &s in &u.candidate_saps {
                if s >= saps.len() {
                    issues.push(format!("users[{i}].candidate_saps: unknown sap id {s}"));
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::InvalidConfig { issues });
        }
        Ok(SapUserTopology { saps, users })
    }

    pub fn flexible_users(&self) -> impl Iterator<Item = &User> {
        self.users.iter().filter(|u| !u.is_fixed())
    }

    pub fn fixed_users(&self) -> impl Iterator<Item = &User> {
        self.users.iter().filter(|u| u.is_fixed())
    }
}
