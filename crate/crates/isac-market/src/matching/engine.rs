//! Ascending-bid many-to-one negotiation shared by the long-term and spot markets.
//!
//! Each client bids a common markup over every bundle's reserve price. Every
//! round it proposes the head of its preference list: the bundle with the
//! highest utility at the current markup. Each BS keeps the subset of
//! proposals that maximizes its utility under capacity. A rejected client
//! raises its markup by one step; when the rejected bundle cannot bear a
//! higher price under the client's own constraints, that bundle is parked
//! instead. Whenever a BS's accepted set or its
//! volunteer estimates change, each bundle parked there is checked against
//! the new holders and comes back only if the BS would now take it.
//! The market closes when a round reproduces the previous round's proposals
//! and changes nothing.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use super::grid::Solution;
use super::knapsack::{admits, knapsack_select, Capacity, Item, ValueTable};
use crate::market::ClientId;

pub trait NegotiationModel: Sync {
    fn n_bs(&self) -> usize;
    fn n_clients(&self) -> usize;
    fn client(&self, c: usize) -> ClientId;
    fn solutions(&self, c: usize) -> &[Solution];
    /// Client's utility for solution `s` at `bid`, with conditional volunteer probability `q`.
    fn client_utility(&self, c: usize, s: usize, bid: f64, q: f64) -> f64;
    /// BS's utility from accepting solution `s` of client `c` at `bid`.
    fn bs_value(&self, c: usize, s: usize, bid: f64, q: f64) -> f64;
    /// Whether the client's own constraints hold at `bid`.
    fn acceptable(&self, c: usize, s: usize, bid: f64, q: f64) -> bool;
    fn capacity(&self, bs: usize) -> Capacity;
    /// Participation weight used for expected-demand risk caps.
    fn risk_weight(&self, c: usize) -> f64;
    fn bid_step(&self) -> f64;
    /// Recomputes conditional volunteer probabilities for the accepted set
    /// `(client, solution, bid)` of `bs`. `None` when volunteers play no role.
    fn refresh_volunteers(&self, _bs: usize, _members: &[(usize, usize, f64)], _round: u32) -> Option<Vec<f64>> {
        None
    }
}

/// Total preference order: utility descending, then lower bid, lower BS id,
/// less bandwidth, less power.
pub fn rank(u1: f64, bid1: f64, s1: &Solution, u2: f64, bid2: f64, s2: &Solution) -> Ordering {
    u2.total_cmp(&u1)
        .then(bid1.total_cmp(&bid2))
        .then(s1.bs.cmp(&s2.bs))
        .then(s1.bandwidth.cmp(&s2.bandwidth))
        .then(s1.power_units.cmp(&s2.power_units))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub max_rounds: u32,
    /// Record every proposal in the round traces.
    pub trace_proposals: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { max_rounds: 1_000_000, trace_proposals: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub client: ClientId,
    pub bs: usize,
    pub bandwidth: u32,
    pub power: f64,
    pub bid: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: u32,
    pub proposals: u32,
    pub acceptances: u32,
    pub rejections: u32,
    pub bid_updates: u32,
    pub exhausted: u32,
    /// Client-to-BS messages; one per proposal.
    pub client_to_bs: u64,
    /// BS-to-client messages; one response per proposal.
    pub bs_to_client: u64,
    pub interactions: u64,
    /// Utility of each BS's accepted set.
    pub bs_values: Vec<f64>,
    /// Per BS: every client accepted last round proposed the same bundle and
    /// bid again, and no volunteer estimate at the BS moved.
    pub holders_stable: Vec<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<ProposalRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegotiationOutcome {
    /// Accepted solution index per client.
    pub assignment: Vec<Option<usize>>,
    /// Standing bid per client and solution.
    pub bids: Vec<Vec<f64>>,
    /// Conditional volunteer probability per client and solution used in the last round.
    pub q: Vec<Vec<f64>>,
    pub rounds: u32,
    pub converged: bool,
    pub traces: Vec<RoundTrace>,
}

impl NegotiationOutcome {
    pub fn total_interactions(&self) -> u64 {
        self.traces.iter().map(|t| t.interactions).sum()
    }

    /// Accepted `(client, solution)` pairs per BS.
    pub fn accepted_by_bs(&self, model: &impl NegotiationModel) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); model.n_bs()];
        for (c, a) in self.assignment.iter().enumerate() {
            if let Some(s) = *a {
                out[model.solutions(c)[s].bs].push((c, s));
            }
        }
        out
    }
}

pub(crate) fn item_of<M: NegotiationModel + ?Sized>(m: &M, c: usize, s: usize, bid: f64, q: f64) -> Item {
    let sol = &m.solutions(c)[s];
    let w = m.risk_weight(c);
    Item {
        value: m.bs_value(c, s, bid, q),
        b: sol.bandwidth.0,
        p: sol.power_units,
        rb: w * f64::from(sol.bandwidth.0),
        rp: w * sol.power,
    }
}

pub fn negotiate<M: NegotiationModel>(m: &M, cfg: &EngineConfig) -> NegotiationOutcome {
    let n = m.n_clients();
    let nb = m.n_bs();
    let step = m.bid_step();
    let mut bids: Vec<Vec<f64>> = (0..n).map(|c| m.solutions(c).iter().map(|s| s.p_min).collect()).collect();
    let mut markup = vec![0.0f64; n];
    let mut q: Vec<Vec<f64>> = (0..n).map(|c| vec![0.0; m.solutions(c).len()]).collect();
    let mut parked: Vec<Vec<bool>> = (0..n).map(|c| vec![false; m.solutions(c).len()]).collect();
    let mut parked_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    let mut accepted: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    let mut refresh_due = vec![false; nb];
    let mut head: Vec<Option<usize>> = vec![None; n];
    let mut stale = vec![true; n];
    let mut prev: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut traces = Vec::new();
    let mut converged = false;
    let mut rounds = 0;

    let best = |c: usize, bids: &[f64], q: &[f64], parked: &[bool]| -> Option<usize> {
        let sols = m.solutions(c);
        let mut top: Option<(usize, f64)> = None;
        for (s, sol) in sols.iter().enumerate() {
            if parked[s] || !m.acceptable(c, s, bids[s], q[s]) {
                continue;
            }
            let u = m.client_utility(c, s, bids[s], q[s]);
            let better = match top {
                None => true,
                Some((t, tu)) => rank(u, bids[s], sol, tu, bids[t], &sols[t]) == Ordering::Less,
            };
            if better {
                top = Some((s, u));
            }
        }
        top.map(|(s, _)| s)
    };

    for round in 1..=cfg.max_rounds {
        rounds = round;
        let mut moved = vec![false; nb];
        let mut any_change = false;

        if round >= 2 {
            for j in 0..nb {
                if !std::mem::take(&mut refresh_due[j]) {
                    continue;
                }
                let members: Vec<(usize, usize, f64)> = accepted[j].iter().map(|&(c, s)| (c, s, bids[c][s])).collect();
                if let Some(new_q) = m.refresh_volunteers(j, &members, round) {
                    let mut changed = false;
                    for (&(c, s, _), &nq) in members.iter().zip(&new_q) {
                        if q[c][s] != nq {
                            q[c][s] = nq;
                            stale[c] = true;
                            changed = true;
                        }
                    }
                    if changed {
                        moved[j] = true;
                        any_change = true;
                        revive(m, j, &accepted[j], &bids, &q, &mut parked, &mut parked_at[j], &mut stale);
                    }
                }
            }
        }

        for c in 0..n {
            if stale[c] {
                head[c] = best(c, &bids[c], &q[c], &parked[c]);
                stale[c] = false;
            }
        }
        let props: Vec<Option<(usize, f64)>> = (0..n).map(|c| head[c].map(|s| (s, bids[c][s]))).collect();

        let mut by_bs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
        for (c, p) in props.iter().enumerate() {
            if let Some((s, _)) = *p {
                by_bs[m.solutions(c)[s].bs].push((c, s));
            }
        }

        let mut trace = RoundTrace {
            round,
            proposals: 0,
            acceptances: 0,
            rejections: 0,
            bid_updates: 0,
            exhausted: 0,
            client_to_bs: 0,
            bs_to_client: 0,
            interactions: 0,
            bs_values: vec![0.0; nb],
            holders_stable: vec![true; nb],
            detail: Vec::new(),
        };
        let mut rejected: Vec<(usize, usize, usize)> = Vec::new();
        let mut changed = vec![false; nb];
        for j in 0..nb {
            let prop = &by_bs[j];
            trace.proposals += prop.len() as u32;
            trace.holders_stable[j] = !moved[j] && accepted[j].iter().all(|&(c, s)| props[c] == Some((s, bids[c][s])));
            let items: Vec<Item> = prop.iter().map(|&(c, s)| item_of(m, c, s, bids[c][s], q[c][s])).collect();
            let chosen = knapsack_select(&items, &m.capacity(j));
            let mut keep = vec![false; prop.len()];
            for &k in &chosen {
                keep[k] = true;
                trace.bs_values[j] += items[k].value;
            }
            let new_acc: Vec<(usize, usize)> = chosen.iter().map(|&k| prop[k]).collect();
            for (k, &(c, s)) in prop.iter().enumerate() {
                if cfg.trace_proposals {
                    let sol = &m.solutions(c)[s];
                    trace.detail.push(ProposalRecord {
                        client: m.client(c),
                        bs: j,
                        bandwidth: sol.bandwidth.0,
                        power: sol.power,
                        bid: bids[c][s],
                        accepted: keep[k],
                    });
                }
                if !keep[k] {
                    rejected.push((c, s, j));
                }
            }
            trace.acceptances += new_acc.len() as u32;
            if new_acc != accepted[j] {
                accepted[j] = new_acc;
                changed[j] = true;
                refresh_due[j] = true;
                any_change = true;
            }
        }
        for j in (0..nb).filter(|&j| changed[j]) {
            revive(m, j, &accepted[j], &bids, &q, &mut parked, &mut parked_at[j], &mut stale);
        }
        trace.rejections = rejected.len() as u32;
        for (c, s, j) in rejected {
            stale[c] = true;
            if m.acceptable(c, s, bids[c][s] + step, q[c][s]) {
                markup[c] += step;
                for (b, sol) in bids[c].iter_mut().zip(m.solutions(c)) {
                    *b = sol.p_min + markup[c];
                }
                trace.bid_updates += 1;
            } else {
                parked[c][s] = true;
                parked_at[j].push((c, s));
                trace.exhausted += 1;
            }
        }
        trace.client_to_bs = u64::from(trace.proposals);
        trace.bs_to_client = u64::from(trace.proposals);
        trace.interactions = trace.client_to_bs + trace.bs_to_client;
        let quiet = !any_change && trace.bid_updates == 0 && trace.exhausted == 0;
        traces.push(trace);
        if quiet && props == prev {
            converged = true;
            break;
        }
        prev = props;
    }

    let mut assignment = vec![None; n];
    for acc in &accepted {
        for &(c, s) in acc {
            assignment[c] = Some(s);
        }
    }
    NegotiationOutcome { assignment, bids, q, rounds, converged, traces }
}

/// Re-examines the bundles parked at `bs` against its current holders and
/// releases those the BS would now take.
#[allow(clippy::too_many_arguments)]
fn revive<M: NegotiationModel>(
    m: &M,
    bs: usize,
    held: &[(usize, usize)],
    bids: &[Vec<f64>],
    q: &[Vec<f64>],
    parked: &mut [Vec<bool>],
    at: &mut Vec<(usize, usize)>,
    stale: &mut [bool],
) {
    if at.is_empty() {
        return;
    }
    let cap = m.capacity(bs);
    let items: Vec<Item> = held.iter().map(|&(c, s)| item_of(m, c, s, bids[c][s], q[c][s])).collect();
    let current: f64 = items.iter().map(|i| i.value).sum();
    let table = ValueTable::new(&items, &cap);
    let mut own: Option<(usize, Vec<Item>, ValueTable)> = None;
    at.retain(|&(c, s)| {
        if !parked[c][s] {
            return false;
        }
        let new = item_of(m, c, s, bids[c][s], q[c][s]);
        let ok = if held.iter().any(|h| h.0 == c) {
            if own.as_ref().is_none_or(|o| o.0 != c) {
                let rest: Vec<Item> = held.iter().zip(&items).filter(|(h, _)| h.0 != c).map(|(_, i)| *i).collect();
                let t = ValueTable::new(&rest, &cap);
                own = Some((c, rest, t));
            }
            let (_, rest, t) = own.as_ref().expect("just set");
            admits(rest, t, &new, &cap, current)
        } else {
            admits(&items, &table, &new, &cap, current)
        };
        if ok {
            parked[c][s] = false;
            stale[c] = true;
        }
        !ok
    });
}
