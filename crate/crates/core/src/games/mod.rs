//! Concrete game instantiations over network topologies.

pub mod association;
pub mod cluster;
pub mod spectrum;

pub use association::{build_association_game, AssociationGame, AssociationGameSpec, AssociationUtilityKind};
pub use cluster::{
    build_hierarchical_stages, cluster_topology, Cluster, ClusterStructure, HeaderGame,
    HierarchicalPlan, MemberGame,
};
pub use spectrum::{build_spectrum_game, SatisfactionKind, SpectrumAccessGameSpec, SpectrumGame};
