//! Long-term matching between clients and base stations, and the checks that
//! certify its outcome.

mod audit;
mod engine;
mod grid;
pub mod knapsack;
mod offline;
mod preference;
mod trace;
mod verify;

pub use audit::{
    check_coalition_stability, individual_rationality, local_pareto_probe, CoalitionFinding, Deviation, ParetoReport,
};
pub use engine::{negotiate, rank, EngineConfig, NegotiationModel, NegotiationOutcome, ProposalRecord, RoundTrace};
pub use grid::{grid_solutions, ReservePrice, ResourceGrid, Solution};
pub use knapsack::{knapsack_select, Capacity, Item};
pub use offline::{
    default_bid_step, run_offrfw2m, MatchingState, OfflineConfig, OfflineMarket, OfflineOutcome, VmaxEstimate,
    VolunteerEstimate,
};
pub use preference::{build_preference_list, enumerate_feasible, FeasibleSolution};
pub use trace::write_jsonl;
pub use verify::{
    check_rationality, current_utility, find_blocking_pairs, BlockingKind, BlockingPair, RationalityFinding,
    DEFAULT_SEARCH_BUDGET,
};
