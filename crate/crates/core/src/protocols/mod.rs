//! Cluster formation, head election (equalized rotation and the LEACH
//! baseline), route planning and the per-round data exchange.

pub mod clustering;
pub mod echerp;
pub mod exchange;
pub mod leach;
pub mod routing;

pub use clustering::{cluster_count, form_clusters, join_nearest_head, Cluster};
pub use echerp::{
    build_equalization_system, elect_head_echerp, equalization_system, member_costs, schedule_from_costs,
    solve_rotation, ElectionError, MemberCosts, RotationSchedule,
};
pub use exchange::{run_round, Network, RoundLedger};
pub use leach::{elect_heads_leach, leach_threshold, LeachHistory};
pub use routing::{plan_routes, plan_routes_with_relays, NextHop, RoutePlan};
