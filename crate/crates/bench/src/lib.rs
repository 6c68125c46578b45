//! Shared fixtures for the workspace benchmarks.

use cellgame_core::games::spectrum::{
    build_spectrum_game, SatisfactionKind, SpectrumAccessGameSpec, SpectrumGame,
};
use cellgame_core::net::{generate_topology, PerCell, TopologyParams};

/// The 9-cell robust interference game the desk-scale experiments run on.
pub fn robust_nine_cell() -> SpectrumGame {
    let params = TopologyParams {
        n_cells: 9,
        active_prob: PerCell::Scalar(0.5),
        ..TopologyParams::default()
    };
    let topo = generate_topology(12, &params).unwrap();
    let mut spec = SpectrumAccessGameSpec::new(topo, SatisfactionKind::InterferenceCost);
    spec.robust = true;
    build_spectrum_game(spec).unwrap()
}

pub fn dense_topology_params(n_cells: usize) -> TopologyParams {
    TopologyParams {
        n_cells,
        n_channels: 4,
        channel_bandwidth_hz: 180.0e3,
        interference_radius_m: 26.0,
        ..TopologyParams::default()
    }
}
