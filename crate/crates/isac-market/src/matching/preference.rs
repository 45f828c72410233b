use serde::{Deserialize, Serialize};

use super::engine::{rank, NegotiationModel};
use super::grid::Solution;
use crate::market::ClientId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSolution {
    pub client: ClientId,
    pub solution: Solution,
    pub bid: f64,
    pub expected_utility: f64,
}

/// Bundles acceptable to client `c` at the given bids, unsorted.
pub fn enumerate_feasible<M: NegotiationModel>(m: &M, c: usize, bids: &[f64], q: &[f64]) -> Vec<FeasibleSolution> {
    m.solutions(c)
        .iter()
        .enumerate()
        .filter(|&(s, _)| m.acceptable(c, s, bids[s], q[s]))
        .map(|(s, sol)| FeasibleSolution {
            client: m.client(c),
            solution: *sol,
            bid: bids[s],
            expected_utility: m.client_utility(c, s, bids[s], q[s]),
        })
        .collect()
}

/// Sorted best first; ties go to the lower bid, then lower BS id, less
/// bandwidth, less power.
pub fn build_preference_list(mut feasible: Vec<FeasibleSolution>) -> Vec<FeasibleSolution> {
    feasible.sort_by(|a, b| rank(a.expected_utility, a.bid, &a.solution, b.expected_utility, b.bid, &b.solution));
    feasible
}
