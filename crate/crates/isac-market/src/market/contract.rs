use serde::{Deserialize, Serialize};

use super::entities::{BsId, ClientId, Market};
use crate::values::Subchannels;

/// A long-term contract: resources reserved ahead of time, a price, the
/// penalty the client owes if it does not show up, and the compensation the
/// BS owes if it asks the client to step aside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub client: ClientId,
    pub bs: BsId,
    pub bandwidth: Subchannels,
    pub power: f64,
    pub pay: f64,
    pub pel_u: f64,
    pub pel_s: f64,
}

impl Contract {
    /// Per-member share of the payment for coalition contracts.
    pub fn per_member_pay(&self, market: &Market) -> f64 {
        self.pay / market.client_size(self.client) as f64
    }
}

/// A spot contract formed during a practical transaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TempContract {
    pub client: ClientId,
    pub bs: BsId,
    pub bandwidth: Subchannels,
    pub power: f64,
    pub pay: f64,
}

/// Penalty and compensation as fractions of the price.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerms {
    pub pel_u_frac: f64,
    pub pel_s_frac: f64,
}

impl Default for PenaltyTerms {
    fn default() -> Self {
        Self { pel_u_frac: 0.5, pel_s_frac: 0.3 }
    }
}

impl PenaltyTerms {
    pub fn contract(&self, client: ClientId, bs: BsId, bandwidth: Subchannels, power: f64, pay: f64) -> Contract {
        Contract { client, bs, bandwidth, power, pay, pel_u: self.pel_u_frac * pay, pel_s: self.pel_s_frac * pay }
    }
}

/// One participation draw plus the BS-side volunteer designations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    /// Per user: did it show up.
    pub alpha: Vec<bool>,
    /// Per coalition: did any member show up.
    pub beta: Vec<bool>,
}

impl Realization {
    pub fn from_alpha(market: &Market, alpha: Vec<bool>) -> Self {
        let beta = market.coalitions.iter().map(|c| c.members.iter().any(|&m| alpha[m])).collect();
        Self { alpha, beta }
    }

    pub fn present(&self, client: ClientId) -> bool {
        match client {
            ClientId::Mu(i) => self.alpha[i],
            ClientId::Coalition(k) => self.beta[k],
        }
    }

    /// Whether `beta` agrees with `alpha` for every coalition.
    pub fn is_consistent(&self, market: &Market) -> bool {
        self.alpha.len() == market.users.len()
            && market.coalitions.iter().all(|c| self.beta[c.id] == c.members.iter().any(|&m| self.alpha[m]))
    }
}
