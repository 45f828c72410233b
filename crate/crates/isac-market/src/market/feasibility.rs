//! Audits a set of long-term contracts against every market constraint.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::contract::Contract;
use super::entities::{BsId, ClientId, Market};
use super::risk::{bs_risk, client_risk, RiskThresholds};
use crate::values::Subchannels;

/// Per-contract bandwidth and power limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractBounds {
    pub b_min: Subchannels,
    pub b_max: Subchannels,
    pub p_min: f64,
    pub p_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    UnknownParty,
    SingleContract,
    BandwidthCapacity,
    PowerCapacity,
    BandwidthRisk,
    PowerRisk,
    ValueCoversPay,
    RateRequirement,
    SensingRequirement,
    BandwidthBounds,
    PowerBounds,
    ClientRisk,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::UnknownParty => "unknown-party",
            Constraint::SingleContract => "single-contract",
            Constraint::BandwidthCapacity => "bandwidth-capacity",
            Constraint::PowerCapacity => "power-capacity",
            Constraint::BandwidthRisk => "bandwidth-risk",
            Constraint::PowerRisk => "power-risk",
            Constraint::ValueCoversPay => "value-covers-pay",
            Constraint::RateRequirement => "rate-requirement",
            Constraint::SensingRequirement => "sensing-requirement",
            Constraint::BandwidthBounds => "bandwidth-bounds",
            Constraint::PowerBounds => "power-bounds",
            Constraint::ClientRisk => "client-risk",
        }
    }

    /// Whether the constraint protects the client rather than the BS.
    pub fn is_client_side(self) -> bool {
        matches!(
            self,
            Constraint::ValueCoversPay
                | Constraint::RateRequirement
                | Constraint::SensingRequirement
                | Constraint::BandwidthBounds
                | Constraint::PowerBounds
                | Constraint::ClientRisk
        )
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub client: Option<ClientId>,
    pub bs: Option<BsId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(c) = self.client {
            write!(f, " client={c}")?;
        }
        if let Some(b) = self.bs {
            write!(f, " bs={b}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

pub struct FeasibilityContext<'a> {
    pub bounds: ContractBounds,
    /// `None` disables the four risk constraints.
    pub risk: Option<RiskThresholds>,
    /// Conditional volunteer probability per client; missing entries count as 0.
    pub volunteer: &'a BTreeMap<ClientId, f64>,
}

const EPS: f64 = 1e-9;

pub fn check_feasibility(market: &Market, contracts: &[Contract], ctx: &FeasibilityContext) -> Vec<Violation> {
    let mut out = check_structure(market, contracts);
    if !out.is_empty() {
        return out;
    }
    out.extend(check_bs_side(market, contracts, ctx));
    out.extend(check_client_side(market, contracts, ctx));
    out
}

/// Client-side clauses only: value covers pay, service requirements,
/// resource bounds and client risk.
pub fn check_individual_rationality(
    market: &Market,
    contracts: &[Contract],
    ctx: &FeasibilityContext,
) -> Vec<Violation> {
    let mut out = check_structure(market, contracts);
    if out.is_empty() {
        out.extend(check_client_side(market, contracts, ctx));
    }
    out
}

fn check_structure(market: &Market, contracts: &[Contract]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for c in contracts {
        let known_client = match c.client {
            ClientId::Mu(i) => i < market.users.len(),
            ClientId::Coalition(k) => k < market.coalitions.len(),
        };
        if !known_client || c.bs >= market.base_stations.len() {
            out.push(Violation {
                constraint: Constraint::UnknownParty,
                client: Some(c.client),
                bs: Some(c.bs),
                detail: "contract references a client or base station outside the market".into(),
            });
            continue;
        }
        if !seen.insert(c.client) {
            out.push(Violation {
                constraint: Constraint::SingleContract,
                client: Some(c.client),
                bs: Some(c.bs),
                detail: "client holds more than one contract for the same service".into(),
            });
        }
    }
    out
}

fn check_bs_side(market: &Market, contracts: &[Contract], ctx: &FeasibilityContext) -> Vec<Violation> {
    let mut out = Vec::new();
    for bs in 0..market.base_stations.len() {
        let (cap_b, cap_p) = market.nominal_capacity(bs);
        let (sum_b, sum_p) = contracts
            .iter()
            .filter(|c| c.bs == bs)
            .fold((0u64, 0.0), |(b, p), c| (b + u64::from(c.bandwidth.0), p + c.power));
        if sum_b as f64 > cap_b + EPS {
            out.push(Violation {
                constraint: Constraint::BandwidthCapacity,
                client: None,
                bs: Some(bs),
                detail: format!("{sum_b} subchannels booked, overbooked capacity {cap_b:.3}"),
            });
        }
        if sum_p > cap_p * (1.0 + EPS) {
            out.push(Violation {
                constraint: Constraint::PowerCapacity,
                client: None,
                bs: Some(bs),
                detail: format!("{sum_p:.3} W booked, overbooked capacity {cap_p:.3} W"),
            });
        }
        if let Some(th) = &ctx.risk {
            let r = bs_risk(bs, contracts, market, th);
            if r.bandwidth_bound > th.rho1 + EPS {
                out.push(Violation {
                    constraint: Constraint::BandwidthRisk,
                    client: None,
                    bs: Some(bs),
                    detail: format!("bound {:.4} exceeds {}", r.bandwidth_bound, th.rho1),
                });
            }
            if r.power_bound > th.rho2 + EPS {
                out.push(Violation {
                    constraint: Constraint::PowerRisk,
                    client: None,
                    bs: Some(bs),
                    detail: format!("bound {:.4} exceeds {}", r.power_bound, th.rho2),
                });
            }
        }
    }
    out
}

fn check_client_side(market: &Market, contracts: &[Contract], ctx: &FeasibilityContext) -> Vec<Violation> {
    let mut out = Vec::new();
    let b = &ctx.bounds;
    for c in contracts {
        let v = |constraint, detail: String| Violation { constraint, client: Some(c.client), bs: Some(c.bs), detail };
        let value = market.client_value(c.client, c.bs, c.bandwidth, c.power);
        if c.pay > value + EPS * value.abs().max(1.0) {
            out.push(v(Constraint::ValueCoversPay, format!("pay {:.4} exceeds value {:.4}", c.pay, value)));
        }
        if !market.meets_requirement(c.client, c.bs, c.bandwidth, c.power) {
            let constraint = match c.client {
                ClientId::Mu(_) => Constraint::RateRequirement,
                ClientId::Coalition(_) => Constraint::SensingRequirement,
            };
            out.push(v(constraint, "bundle does not meet the service requirement".into()));
        }
        if c.bandwidth < b.b_min || c.bandwidth > b.b_max {
            out.push(v(
                Constraint::BandwidthBounds,
                format!("{} subchannels outside [{}, {}]", c.bandwidth.0, b.b_min.0, b.b_max.0),
            ));
        }
        if c.power < b.p_min - EPS || c.power > b.p_max + EPS {
            out.push(v(Constraint::PowerBounds, format!("{} W outside [{}, {}]", c.power, b.p_min, b.p_max)));
        }
        if let Some(th) = &ctx.risk {
            let part = market.participation(c.client);
            let q = ctx.volunteer.get(&c.client).copied().unwrap_or(0.0);
            match client_risk(c, market, part, q, th) {
                Ok(r) if r.satisfied => {}
                Ok(r) => out.push(v(Constraint::ClientRisk, format!("bound {:.4} above threshold", r.bound))),
                Err(e) => out.push(v(Constraint::ClientRisk, e.to_string())),
            }
        }
    }
    out
}
