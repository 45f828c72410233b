//! Realized and expected utilities of contract parties.
//!
//! A contract moves money in three ways: the price when the client is served,
//! the client's penalty when it does not show up, and the BS's compensation
//! when it turns a present client away. All three are transfers, so summing
//! both sides of a contract leaves `served value - power cost`.

use std::collections::BTreeMap;

use super::contract::{Contract, TempContract};
use super::entities::{BsId, ClientId, Market};

/// Client utility for one realization. `value` is the client's total value
/// for the contracted bundle (`|c| * V^max` for coalitions).
pub fn client_utility(c: &Contract, value: f64, present: bool, volunteered: bool) -> f64 {
    match (present, volunteered) {
        (false, _) => -c.pel_u,
        (true, true) => c.pel_s,
        (true, false) => value - c.pay,
    }
}

/// BS utility from one contract for one realization.
pub fn bs_contract_utility(c: &Contract, omega5: f64, present: bool, volunteered: bool) -> f64 {
    match (present, volunteered) {
        (false, _) => c.pel_u,
        (true, true) => -c.pel_s,
        (true, false) => c.pay - omega5 * c.power,
    }
}

pub fn mu_comm_utility(c: &Contract, market: &Market, present: bool, volunteered: bool) -> f64 {
    client_utility(c, market.client_value(c.client, c.bs, c.bandwidth, c.power), present, volunteered)
}

pub fn coalition_sensing_utility(c: &Contract, market: &Market, present: bool, volunteered: bool) -> f64 {
    mu_comm_utility(c, market, present, volunteered)
}

/// Sum over the contracts held at `bs`. `outcome(contract)` yields
/// `(present, volunteered)`.
pub fn bs_utility<F>(bs: BsId, contracts: &[Contract], omega5: f64, outcome: F) -> f64
where
    F: Fn(&Contract) -> (bool, bool),
{
    contracts
        .iter()
        .filter(|c| c.bs == bs)
        .map(|c| {
            let (p, v) = outcome(c);
            bs_contract_utility(c, omega5, p, v)
        })
        .sum()
}

/// Expected client utility given the participation probability `part` and
/// the volunteer probability `q` conditional on showing up.
pub fn expected_client_utility(c: &Contract, value: f64, part: f64, q: f64) -> f64 {
    part * q * c.pel_s - (1.0 - part) * c.pel_u + part * (1.0 - q) * (value - c.pay)
}

pub fn expected_mu_comm_utility(c: &Contract, value: f64, e_alpha: f64, e_v: f64) -> f64 {
    expected_client_utility(c, value, e_alpha, e_v)
}

/// Expected coalition utility; `e_vmax` is the per-member representative value.
pub fn expected_coalition_utility(c: &Contract, size: usize, e_beta: f64, e_v: f64, e_vmax: f64) -> f64 {
    expected_client_utility(c, size as f64 * e_vmax, e_beta, e_v)
}

pub fn expected_bs_contract_utility(c: &Contract, omega5: f64, part: f64, q: f64) -> f64 {
    (1.0 - q) * part * (c.pay - omega5 * c.power) + (1.0 - part) * c.pel_u - part * q * c.pel_s
}

/// Expected welfare of one contract: transfers cancel in expectation too.
pub fn expected_contract_welfare(value: f64, cost: f64, part: f64, q: f64) -> f64 {
    part * (1.0 - q) * (value - cost)
}

/// Realized utilities of spot contracts: clients keep `V - pay`, the BS collects `pay`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OnlineUtilities {
    pub clients: BTreeMap<ClientId, f64>,
    pub bss: BTreeMap<BsId, f64>,
}

pub fn online_utilities<F>(temps: &[TempContract], value: F) -> OnlineUtilities
where
    F: Fn(&TempContract) -> f64,
{
    let mut out = OnlineUtilities::default();
    for t in temps {
        *out.clients.entry(t.client).or_default() += value(t) - t.pay;
        *out.bss.entry(t.bs).or_default() += t.pay;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::Subchannels;

    fn contract(pay: f64, pel_u: f64, pel_s: f64, power: f64) -> Contract {
        Contract { client: ClientId::Mu(0), bs: 0, bandwidth: Subchannels(1), power, pay, pel_u, pel_s }
    }

    #[test]
    fn realized_client_cases() {
        assert_eq!(client_utility(&contract(4.0, 3.0, 2.0, 1.0), 10.0, false, false), -3.0);
        assert_eq!(client_utility(&contract(4.0, 3.0, 2.0, 1.0), 10.0, true, false), 6.0);
        assert_eq!(client_utility(&contract(4.0, 3.0, 2.0, 1.0), 10.0, true, true), 2.0);
    }

    #[test]
    fn realized_bs_cases() {
        // omega5 * P = 1
        assert_eq!(bs_contract_utility(&contract(4.0, 3.0, 2.0, 1.0), 1.0, true, false), 3.0);
        assert_eq!(bs_contract_utility(&contract(4.0, 3.0, 2.0, 1.0), 1.0, false, false), 3.0);
        assert_eq!(bs_contract_utility(&contract(4.0, 3.0, 2.0, 1.0), 1.0, true, true), -2.0);
    }

    #[test]
    fn expected_forms() {
        let c = contract(4.0, 3.0, 2.0, 1.0);
        assert_eq!(expected_mu_comm_utility(&c, 10.0, 1.0, 0.0), client_utility(&c, 10.0, true, false));
        let c = contract(5.0, 3.0, 0.0, 1.0);
        assert!((expected_mu_comm_utility(&c, 10.0, 0.8, 0.0) - 3.4).abs() < 1e-12);
        let c = contract(4.0, 2.0, 0.0, 1.0);
        assert!((expected_coalition_utility(&c, 1, 0.75, 0.0, 8.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn online_cases() {
        let t = |pay| TempContract { client: ClientId::Mu(0), bs: 0, bandwidth: Subchannels(1), power: 1.0, pay };
        let u = online_utilities(&[t(10.0)], |_| 10.0);
        assert_eq!(u.clients[&ClientId::Mu(0)], 0.0);
        let u = online_utilities(&[t(4.0)], |_| 10.0);
        assert_eq!(u.clients[&ClientId::Mu(0)], 6.0);
        assert_eq!(u.bss[&0], 4.0);
        let u = online_utilities(&[], |_| 10.0);
        assert!(!u.bss.contains_key(&0));
    }
}
