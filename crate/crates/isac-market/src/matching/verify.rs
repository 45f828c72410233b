//! Executable stability checks for a finished negotiation.
//!
//! Alternatives are priced at the client's standing bid for each bundle: the
//! price the negotiation settled on for that bundle, or the reserve price if
//! the client never had to raise it. Both sides are scored with the same
//! utilities and volunteer estimates the negotiation used in its last round.

use serde::{Deserialize, Serialize};

use super::engine::{item_of, NegotiationModel, NegotiationOutcome};
use super::knapsack::{gains, Capacity, Item};
use crate::error::{Error, Result};
use crate::market::ClientId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingKind {
    /// The BS must drop some current clients to take the newcomer.
    Eviction,
    /// The BS can add the newcomer while keeping everyone.
    Addition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockingPair {
    pub kind: BlockingKind,
    pub client: ClientId,
    pub bs: usize,
    pub bandwidth: u32,
    pub power: f64,
    pub bid: f64,
    pub client_gain: f64,
    pub bs_gain: f64,
    pub evicted: Vec<ClientId>,
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

fn fits(items: &[&Item], cap: &Capacity) -> bool {
    let b: u64 = items.iter().map(|i| u64::from(i.b)).sum();
    let p: u64 = items.iter().map(|i| u64::from(i.p)).sum();
    if b > u64::from(cap.b) || p > u64::from(cap.p) {
        return false;
    }
    match cap.risk {
        None => true,
        Some((rb, rp)) => {
            let sb: f64 = items.iter().map(|i| i.rb).sum();
            let sp: f64 = items.iter().map(|i| i.rp).sum();
            sb <= rb + 1e-9 * rb.max(1.0) && sp <= rp + 1e-9 * rp.max(1.0)
        }
    }
}

/// Current utility of client `c`: its accepted bundle, or 0 if unmatched.
pub fn current_utility<M: NegotiationModel>(m: &M, out: &NegotiationOutcome, c: usize) -> f64 {
    out.assignment[c].map_or(0.0, |s| m.client_utility(c, s, out.bids[c][s], out.q[c][s]))
}

/// Exhaustive search for client-BS pairs that would both rather deal with
/// each other than keep the outcome.
pub fn find_blocking_pairs<M: NegotiationModel>(
    m: &M,
    out: &NegotiationOutcome,
    kinds: &[BlockingKind],
    budget: u64,
) -> Result<Vec<BlockingPair>> {
    let accepted = out.accepted_by_bs(m);
    let mut spent = 0u64;
    let mut found = Vec::new();
    let want_evict = kinds.contains(&BlockingKind::Eviction);
    let want_add = kinds.contains(&BlockingKind::Addition);
    for c in 0..m.n_clients() {
        let u0 = current_utility(m, out, c);
        for (s, sol) in m.solutions(c).iter().enumerate() {
            if out.assignment[c] == Some(s) {
                continue;
            }
            let bid = out.bids[c][s];
            let q = out.q[c][s];
            if !m.acceptable(c, s, bid, q) {
                continue;
            }
            let u = m.client_utility(c, s, bid, q);
            if u <= u0 {
                continue;
            }
            let j = sol.bs;
            let cap = m.capacity(j);
            let held: Vec<(usize, usize)> = accepted[j].clone();
            let held_items: Vec<Item> =
                held.iter().map(|&(h, hs)| item_of(m, h, hs, out.bids[h][hs], out.q[h][hs])).collect();
            let current: f64 = held_items.iter().map(|i| i.value).sum();
            let others: Vec<usize> = (0..held.len()).filter(|&k| held[k].0 != c).collect();
            let new_item = item_of(m, c, s, bid, q);
            let subsets = 1u64 << others.len().min(62);
            spent += subsets;
            if spent > budget {
                return Err(Error::BudgetExceeded { budget });
            }
            for mask in 0..subsets {
                let evict = mask != 0;
                if (evict && !want_evict) || (!evict && !want_add) {
                    continue;
                }
                let mut set: Vec<&Item> = Vec::with_capacity(others.len() + 1);
                let mut value = 0.0;
                let mut evicted = Vec::new();
                for (bit, &k) in others.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        evicted.push(m.client(held[k].0));
                    } else {
                        set.push(&held_items[k]);
                        value += held_items[k].value;
                    }
                }
                set.push(&new_item);
                value += new_item.value;
                if gains(value, current) && fits(&set, &cap) {
                    found.push(BlockingPair {
                        kind: if evict { BlockingKind::Eviction } else { BlockingKind::Addition },
                        client: m.client(c),
                        bs: j,
                        bandwidth: sol.bandwidth.0,
                        power: sol.power,
                        bid,
                        client_gain: u - u0,
                        bs_gain: value - current,
                        evicted,
                    });
                    break;
                }
            }
        }
    }
    Ok(found)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalityFinding {
    pub client: ClientId,
    pub bs: usize,
    pub detail: String,
}

/// Every matched client's own constraints hold at its final price, and no
/// BS keeps a client that lowers its utility.
pub fn check_rationality<M: NegotiationModel>(m: &M, out: &NegotiationOutcome) -> Vec<RationalityFinding> {
    let mut found = Vec::new();
    for (c, a) in out.assignment.iter().enumerate() {
        let Some(s) = *a else { continue };
        let bid = out.bids[c][s];
        let q = out.q[c][s];
        let bs = m.solutions(c)[s].bs;
        if !m.acceptable(c, s, bid, q) {
            found.push(RationalityFinding {
                client: m.client(c),
                bs,
                detail: format!("client constraints fail at price {bid:.4}"),
            });
        }
        if m.bs_value(c, s, bid, q) <= 0.0 {
            found.push(RationalityFinding {
                client: m.client(c),
                bs,
                detail: "BS gains nothing from this client".into(),
            });
        }
    }
    for (j, held) in out.accepted_by_bs(m).iter().enumerate() {
        let items: Vec<Item> = held.iter().map(|&(c, s)| item_of(m, c, s, out.bids[c][s], out.q[c][s])).collect();
        let refs: Vec<&Item> = items.iter().collect();
        if !fits(&refs, &m.capacity(j)) {
            found.push(RationalityFinding {
                client: m.client(held.first().map_or(0, |h| h.0)),
                bs: j,
                detail: "accepted set exceeds capacity".into(),
            });
        }
    }
    found
}
