use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::market::{BsId, CheapestCompensation, ClientId, Contract, Demand, Market, Realization, VolunteerPolicy};
use crate::values::Subchannels;

/// Independent Bernoulli draw per user; coalition presence follows.
pub fn sample_realization<R: Rng + ?Sized>(market: &Market, rng: &mut R) -> Realization {
    let alpha = market.users.iter().map(|u| rng.gen::<f64>() < u.part_prob).collect();
    Realization::from_alpha(market, alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolunteerDecision {
    pub bs: BsId,
    /// In removal order.
    pub volunteers: Vec<ClientId>,
    pub compensation_paid: f64,
}

/// Turns away present contract holders at `bs` until what is left fits the
/// station's real supply. `realized` holds the contracts whose clients
/// showed up; contracts at other stations are ignored.
pub fn select_volunteers(market: &Market, bs: BsId, realized: &[Contract]) -> VolunteerDecision {
    select_volunteers_with(market, bs, realized, &CheapestCompensation)
}

pub fn select_volunteers_with(
    market: &Market,
    bs: BsId,
    realized: &[Contract],
    policy: &dyn VolunteerPolicy,
) -> VolunteerDecision {
    let station = &market.base_stations[bs];
    let demands: Vec<Demand> = realized
        .iter()
        .filter(|c| c.bs == bs)
        .map(|c| Demand { client: c.client, bandwidth: c.bandwidth.0, power: c.power, pel_s: c.pel_s })
        .collect();
    let volunteers = policy.select(station.bandwidth.0, station.power, &demands);
    let compensation_paid = demands.iter().filter(|d| volunteers.contains(&d.client)).map(|d| d.pel_s).sum();
    VolunteerDecision { bs, volunteers, compensation_paid }
}

/// What a station can still sell after serving its present, non-volunteer
/// contract holders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSupply {
    pub bs: BsId,
    pub bandwidth_left: Subchannels,
    pub power_left: f64,
}

pub fn residual_supply(market: &Market, bs: BsId, realized: &[Contract], volunteers: &[ClientId]) -> ResidualSupply {
    let station = &market.base_stations[bs];
    let (b, p) = realized
        .iter()
        .filter(|c| c.bs == bs && !volunteers.contains(&c.client))
        .fold((0u64, 0.0), |(b, p), c| (b + u64::from(c.bandwidth.0), p + c.power));
    let left_b = u64::from(station.bandwidth.0).saturating_sub(b);
    ResidualSupply { bs, bandwidth_left: Subchannels(left_b as u32), power_left: (station.power - p).max(0.0) }
}
