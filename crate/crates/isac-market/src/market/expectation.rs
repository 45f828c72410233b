//! Participation and volunteer expectations over the Bernoulli presence model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use super::contract::Contract;
use super::entities::{ClientId, Market, MuId};
use super::volunteer::{Demand, VolunteerPolicy};
use crate::error::{Error, Result};

pub const EXACT_ENUMERATION_LIMIT: usize = 20;

/// Probability that at least one member shows up.
pub fn expect_beta(probs: &[f64]) -> f64 {
    1.0 - probs.iter().map(|a| 1.0 - a).product::<f64>()
}

/// Participation-discounted representative value `max(a_i * V_i)`.
pub fn expect_vmax(probs: &[f64], values: &[f64]) -> Result<f64> {
    if probs.is_empty() || probs.len() != values.len() {
        return Err(Error::arg("expect_vmax needs one value per member of a nonempty coalition"));
    }
    Ok(probs.iter().zip(values).map(|(a, v)| a * v).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExpectationMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Presence variables of one base station's contract holders.
struct PresenceModel {
    /// Probability of each independent variable.
    probs: Vec<f64>,
    /// For each contract: the variables whose OR decides presence.
    drivers: Vec<Vec<usize>>,
}

fn presence_model(contracts: &[Contract], market: &Market) -> PresenceModel {
    let mut var_of_mu: BTreeMap<MuId, usize> = BTreeMap::new();
    let mut probs = Vec::new();
    for c in contracts {
        if let ClientId::Mu(i) = c.client {
            var_of_mu.entry(i).or_insert_with(|| {
                probs.push(market.users[i].part_prob);
                probs.len() - 1
            });
        }
    }
    let mut drivers = Vec::with_capacity(contracts.len());
    for c in contracts {
        match c.client {
            ClientId::Mu(i) => drivers.push(vec![var_of_mu[&i]]),
            ClientId::Coalition(k) => {
                let mut d = Vec::new();
                let mut absent_rest = 1.0;
                for &m in &market.coalitions[k].members {
                    match var_of_mu.get(&m) {
                        Some(&v) => d.push(v),
                        None => absent_rest *= 1.0 - market.users[m].part_prob,
                    }
                }
                let rest = 1.0 - absent_rest;
                if rest > 0.0 {
                    probs.push(rest);
                    d.push(probs.len() - 1);
                }
                drivers.push(d);
            }
        }
    }
    PresenceModel { probs, drivers }
}

fn demands_of(contracts: &[Contract]) -> Vec<Demand> {
    contracts
        .iter()
        .map(|c| Demand { client: c.client, bandwidth: c.bandwidth.0, power: c.power, pel_s: c.pel_s })
        .collect()
}

/// Joint probability, per contract holder at `bs`, of showing up and being
/// turned away by `policy`.
pub fn expect_volunteer(
    bs: usize,
    contracts: &[Contract],
    market: &Market,
    policy: &dyn VolunteerPolicy,
    mode: ExpectationMode,
) -> Result<BTreeMap<ClientId, f64>> {
    let contracts: Vec<Contract> = contracts.iter().filter(|c| c.bs == bs).cloned().collect();
    let mut out: BTreeMap<ClientId, f64> = contracts.iter().map(|c| (c.client, 0.0)).collect();
    if contracts.is_empty() {
        return Ok(out);
    }
    let station = &market.base_stations[bs];
    let supply_b = station.bandwidth.0;
    let supply_p = station.power;
    let demands = demands_of(&contracts);
    let total_b: u64 = demands.iter().map(|d| u64::from(d.bandwidth)).sum();
    let total_p: f64 = demands.iter().map(|d| d.power).sum();
    if total_b <= u64::from(supply_b) && total_p <= supply_p * (1.0 + 1e-9) {
        return Ok(out);
    }
    let model = presence_model(&contracts, market);
    let mut present_demands: Vec<Demand> = Vec::with_capacity(demands.len());
    let mut tally = |state: &[bool], weight: f64, out: &mut BTreeMap<ClientId, f64>| {
        present_demands.clear();
        let mut b = 0u64;
        let mut p = 0.0;
        for (idx, drv) in model.drivers.iter().enumerate() {
            if drv.iter().any(|&v| state[v]) {
                present_demands.push(demands[idx]);
                b += u64::from(demands[idx].bandwidth);
                p += demands[idx].power;
            }
        }
        if b <= u64::from(supply_b) && p <= supply_p * (1.0 + 1e-9) {
            return;
        }
        for c in policy.select(supply_b, supply_p, &present_demands) {
            *out.get_mut(&c).expect("volunteer is a contract holder") += weight;
        }
    };
    match mode {
        ExpectationMode::Exact => {
            let n = model.probs.len();
            if n > EXACT_ENUMERATION_LIMIT {
                return Err(Error::EnumerationTooLarge { n, limit: EXACT_ENUMERATION_LIMIT });
            }
            let mut state = vec![false; n];
            for mask in 0u32..(1u32 << n) {
                let mut w = 1.0;
                for (v, s) in state.iter_mut().enumerate() {
                    *s = mask >> v & 1 == 1;
                    w *= if *s { model.probs[v] } else { 1.0 - model.probs[v] };
                }
                if w > 0.0 {
                    tally(&state, w, &mut out);
                }
            }
        }
        ExpectationMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::arg("Monte Carlo needs at least one sample"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = vec![false; model.probs.len()];
            let w = 1.0 / samples as f64;
            for _ in 0..samples {
                for (s, &p) in state.iter_mut().zip(&model.probs) {
                    *s = rng.gen::<f64>() < p;
                }
                tally(&state, w, &mut out);
            }
        }
    }
    Ok(out)
}

/// Volunteer probability conditional on showing up.
pub fn conditional_volunteer(joint: f64, participation: f64) -> f64 {
    if participation > 0.0 {
        (joint / participation).clamp(0.0, 1.0)
    } else {
        0.0
    }
}
