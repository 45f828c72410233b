//! Checks specific to long-term contracts: coalition stability and a local
//! welfare probe.

use serde::{Deserialize, Serialize};

use super::engine::{item_of, NegotiationModel, NegotiationOutcome};
use super::knapsack::Item;
use super::offline::OfflineMarket;
use super::verify::current_utility;
use crate::error::Result;
use crate::market::{
    check_individual_rationality, expected_client_utility, expected_contract_welfare, ClientId, FeasibilityContext,
    MuId, Violation,
};
use crate::values::sensing_value;

/// Client-side constraints of every signed contract.
pub fn individual_rationality(om: &OfflineMarket, out: &NegotiationOutcome) -> Vec<Violation> {
    let contracts = om.contracts_of(out);
    let volunteer = om.volunteer_map(out);
    let ctx = FeasibilityContext { bounds: om.cfg.bounds, risk: om.cfg.risk, volunteer: &volunteer };
    check_individual_rationality(om.market, &contracts, &ctx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalitionFinding {
    pub coalition: usize,
    pub member: Option<MuId>,
    pub per_member_utility: f64,
    /// Utility floor, or the member's best stand-alone utility.
    pub reference: f64,
    pub detail: String,
}

/// Each matched coalition must give every member at least the utility
/// floor and at least what the member would get buying the same bundles
/// alone at the prices the market reached for them.
pub fn check_coalition_stability(om: &OfflineMarket, out: &NegotiationOutcome) -> Vec<CoalitionFinding> {
    let market = om.market;
    let floor = om.cfg.risk.map_or(0.0, |r| r.u_min_s);
    let mut found = Vec::new();
    for (c, &client) in om.clients().iter().enumerate() {
        let ClientId::Coalition(k) = client else { continue };
        let Some(s0) = out.assignment[c] else { continue };
        let size = market.coalitions[k].members.len() as f64;
        let per_member = current_utility(om, out, c) / size;
        if per_member < floor - 1e-9 {
            found.push(CoalitionFinding {
                coalition: k,
                member: None,
                per_member_utility: per_member,
                reference: floor,
                detail: "per-member expected utility below the floor".into(),
            });
        }
        let sols = om.solutions(c);
        for &m in &market.coalitions[k].members {
            let user = &market.users[m];
            let mut best_alone = f64::NEG_INFINITY;
            for (s, sol) in sols.iter().enumerate() {
                let kappa = market.link(m, sol.bs).kappa;
                let v = sensing_value(sol.power, sol.bandwidth.hz(market.b0), kappa, &market.weights);
                let accuracy = v / market.weights.omega4.max(f64::MIN_POSITIVE);
                let bid = out.bids[c][s];
                if v < bid || accuracy < user.sensing_req {
                    continue;
                }
                let contract = om.contract(c, s, bid);
                let u = expected_client_utility(&contract, v, user.part_prob, out.q[c][s]);
                best_alone = best_alone.max(u);
            }
            if best_alone > per_member + 1e-9 {
                found.push(CoalitionFinding {
                    coalition: k,
                    member: Some(m),
                    per_member_utility: per_member,
                    reference: best_alone,
                    detail: format!("member does better alone than in the coalition's bundle {s0}"),
                });
            }
        }
    }
    found
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub client: ClientId,
    pub bs: usize,
    pub bandwidth: u32,
    pub power: f64,
    pub evicted: Vec<ClientId>,
    pub welfare_gain: f64,
    /// The mover prefers the new bundle and the BS's utility rises.
    pub voluntary: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub improvements: Vec<Deviation>,
    /// The budget ran out before every deviation was examined.
    pub partial: bool,
    pub examined: u64,
}

fn contract_welfare(om: &OfflineMarket, c: usize, s: usize, q: f64) -> f64 {
    let sol = &om.solutions(c)[s];
    expected_contract_welfare(om.expectation_value(c, s), om.market.weights.omega5 * sol.power, om.participation(c), q)
}

/// Tries every single-client move to another feasible bundle, with any
/// evictions the target BS needs, and reports moves that raise expected
/// social welfare.
pub fn local_pareto_probe(om: &OfflineMarket, out: &NegotiationOutcome, budget: u64) -> Result<ParetoReport> {
    let accepted = out.accepted_by_bs(om);
    let mut rep = ParetoReport::default();
    'outer: for c in 0..om.n_clients() {
        let u0 = current_utility(om, out, c);
        let w0 = out.assignment[c].map_or(0.0, |s| contract_welfare(om, c, s, out.q[c][s]));
        for (s, sol) in om.solutions(c).iter().enumerate() {
            if out.assignment[c] == Some(s) {
                continue;
            }
            let bid = out.bids[c][s];
            let q = out.q[c][s];
            if !om.acceptable(c, s, bid, q) {
                continue;
            }
            let j = sol.bs;
            let cap = om.capacity(j);
            let held = &accepted[j];
            let others: Vec<usize> = (0..held.len()).filter(|&k| held[k].0 != c).collect();
            let items: Vec<Item> =
                held.iter().map(|&(h, hs)| item_of(om, h, hs, out.bids[h][hs], out.q[h][hs])).collect();
            let current_bs: f64 = items.iter().map(|i| i.value).sum();
            let new_item = item_of(om, c, s, bid, q);
            let w_new = contract_welfare(om, c, s, q);
            let subsets = 1u64 << others.len().min(62);
            if rep.examined + subsets > budget {
                rep.partial = true;
                break 'outer;
            }
            rep.examined += subsets;
            for mask in 0..subsets {
                let mut b = u64::from(new_item.b);
                let mut p = u64::from(new_item.p);
                let (mut rb, mut rp) = (new_item.rb, new_item.rp);
                let mut lost = 0.0;
                let mut bs_value = new_item.value;
                let mut evicted = Vec::new();
                for (bit, &k) in others.iter().enumerate() {
                    let (h, hs) = held[k];
                    if mask >> bit & 1 == 1 {
                        lost += contract_welfare(om, h, hs, out.q[h][hs]);
                        evicted.push(om.client(h));
                    } else {
                        b += u64::from(items[k].b);
                        p += u64::from(items[k].p);
                        rb += items[k].rb;
                        rp += items[k].rp;
                        bs_value += items[k].value;
                    }
                }
                let fits = b <= u64::from(cap.b)
                    && p <= u64::from(cap.p)
                    && cap.risk.is_none_or(|(xb, xp)| rb <= xb + 1e-9 * xb.max(1.0) && rp <= xp + 1e-9 * xp.max(1.0));
                if !fits {
                    continue;
                }
                let gain = w_new - w0 - lost;
                if gain > 1e-9 {
                    let u = om.client_utility(c, s, bid, q);
                    rep.improvements.push(Deviation {
                        client: om.client(c),
                        bs: j,
                        bandwidth: sol.bandwidth.0,
                        power: sol.power,
                        evicted,
                        welfare_gain: gain,
                        voluntary: u > u0 && bs_value > current_bs,
                    });
                }
            }
        }
    }
    Ok(rep)
}
