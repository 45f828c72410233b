//! Tractable risk measures derived from Markov's inequality.
//!
//! For a client, `Pr[u < u_min] <= (u_max - E[u]) / (u_max - u_min)`; for a BS,
//! `Pr[demand > supply] <= E[demand] / supply`. Keeping the right-hand sides
//! under a threshold caps the corresponding risk.

use serde::{Deserialize, Serialize};

use super::contract::Contract;
use super::entities::{BsId, ClientId, Market};
use super::utility::expected_client_utility;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskThresholds {
    /// BS bandwidth shortfall risk.
    pub rho1: f64,
    /// BS power shortfall risk.
    pub rho2: f64,
    /// User communication utility risk.
    pub rho3: f64,
    /// Coalition sensing utility risk, applied per member.
    pub rho4: f64,
    pub u_min_c: f64,
    pub u_min_s: f64,
}

impl Default for RiskThresholds {
    fn default() -> Self {
        Self { rho1: 1.0, rho2: 1.0, rho3: 0.3, rho4: 0.6, u_min_c: 0.0, u_min_s: 0.0 }
    }
}

impl RiskThresholds {
    pub fn validate(&self) -> Result<()> {
        for (n, r) in [("rho1", self.rho1), ("rho2", self.rho2), ("rho3", self.rho3), ("rho4", self.rho4)] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::arg(format!("{n} must lie in (0, 1], got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskBound {
    pub bound: f64,
    pub satisfied: bool,
}

const RISK_EPS: f64 = 1e-12;

pub fn client_risk_bound(expected_u: f64, u_max: f64, u_min: f64, rho: f64) -> Result<RiskBound> {
    if !(u_max > u_min) {
        return Err(Error::RiskUndefined { u_max, u_min });
    }
    let bound = (u_max - expected_u) / (u_max - u_min);
    Ok(RiskBound { bound, satisfied: bound <= rho + RISK_EPS })
}

/// Client risk of a contract at participation `part` and conditional
/// volunteer probability `q`. Coalitions are assessed per member.
pub fn client_risk(c: &Contract, market: &Market, part: f64, q: f64, th: &RiskThresholds) -> Result<RiskBound> {
    let value = market.client_value(c.client, c.bs, c.bandwidth, c.power);
    client_risk_at(c, value, market.client_size(c.client), part, q, th)
}

pub fn client_risk_at(
    c: &Contract,
    value: f64,
    size: usize,
    part: f64,
    q: f64,
    th: &RiskThresholds,
) -> Result<RiskBound> {
    let n = size as f64;
    let expected = expected_client_utility(c, value, part, q) / n;
    let u_max = (value - c.pay) / n;
    let (u_min, rho) = match c.client {
        ClientId::Mu(_) => (th.u_min_c, th.rho3),
        ClientId::Coalition(_) => (th.u_min_s, th.rho4),
    };
    client_risk_bound(expected, u_max, u_min, rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsRisk {
    pub bandwidth_bound: f64,
    pub power_bound: f64,
    pub satisfied: bool,
}

/// Expected-demand to supply ratios of the contracts held at `bs`.
pub fn bs_risk(bs: BsId, contracts: &[Contract], market: &Market, th: &RiskThresholds) -> BsRisk {
    let station = &market.base_stations[bs];
    let (mut eb, mut ep) = (0.0, 0.0);
    for c in contracts.iter().filter(|c| c.bs == bs) {
        let a = market.participation(c.client);
        eb += a * f64::from(c.bandwidth.0);
        ep += a * c.power;
    }
    let bandwidth_bound = eb / f64::from(station.bandwidth.0);
    let power_bound = ep / station.power;
    BsRisk {
        bandwidth_bound,
        power_bound,
        satisfied: bandwidth_bound <= th.rho1 + 1e-9 && power_bound <= th.rho2 + 1e-9,
    }
}
