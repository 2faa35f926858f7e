//! Blind interference alignment (BIA) for indoor optical wireless networks.
//!
//! The crate is split by concern:
//!
//! * [`geometry`]: room, ceiling AP grid, user placement and detector photodiode layouts.
//! * [`channel`]: line-of-sight gains from each VCSEL/LED to each photodiode mode.
//! * [`supersymbol`]: construction and structural verification of the BIA transmission block.
//! * [`rate`]: achievable per-user rates including interference-subtraction noise and
//!   inter-cluster interference.
//! * [`topology`]: network-centric and user-centric cluster formation.
//! * [`harness`]: configuration, experiment sweeps and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod rate;
pub mod supersymbol;
pub mod topology;

pub use channel::{build_channel_set, los_gain, mode_condition_number, BeamModel, ChannelSet, EmitterModel};
pub use error::{Error, Result};
pub use geometry::{
    place_aps_grid, place_users_uniform, pyramid_orientations, AccessPoint, DetectorConfig, Room, UserTerminal,
};
pub use rate::{bia_user_rate, evaluate_network, ici_power, NoiseModel, RateParams, RateReport};
pub use supersymbol::{
    block_lengths, build_schedule, coherence_feasible, sum_dof, verify_decodability, BlockLengths, ModeSchedule,
    ResourceBlock, VerificationReport,
};
pub use topology::{
    associate_aps, kmeans_users, nc_partition, uc_topology, Cluster, KMeansResult, Topology, TopologyKind,
};
