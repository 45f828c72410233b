//! Spot trading of residual supply. Same bid escalation as the long-term
//! market, but both sides score realized utilities: the client keeps
//! `V - pay`, the station collects `pay`, and there is no risk control or
//! overbooking.

use serde::{Deserialize, Serialize};

use super::residual::ResidualSupply;
use crate::error::{Error, Result};
use crate::market::{ClientId, Market, Realization, TempContract};
use crate::matching::{
    grid_solutions, negotiate, Capacity, EngineConfig, NegotiationModel, NegotiationOutcome, ReservePrice,
    ResourceGrid, Solution,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub grid: ResourceGrid,
    pub reserve: ReservePrice,
    pub bid_step: f64,
    pub engine: EngineConfig,
}

/// Copy of `market` whose coalitions keep only the members that showed up.
/// Coalitions with nobody present end up empty and cannot trade.
pub fn online_market(market: &Market, realization: &Realization) -> Market {
    let mut m = market.clone();
    for c in &mut m.coalitions {
        c.members.retain(|&i| realization.alpha[i]);
    }
    m
}

pub struct OnlineMarket<'a> {
    pub market: &'a Market,
    pub cfg: &'a OnlineConfig,
    clients: Vec<ClientId>,
    sols: Vec<Vec<Solution>>,
    caps: Vec<Capacity>,
}

impl<'a> OnlineMarket<'a> {
    pub fn new(
        market: &'a Market,
        cfg: &'a OnlineConfig,
        clients: Vec<ClientId>,
        residual: &[ResidualSupply],
    ) -> Result<Self> {
        if !(cfg.bid_step > 0.0) {
            return Err(Error::arg(format!("bid step must be positive, got {}", cfg.bid_step)));
        }
        let mut caps = vec![Capacity { b: 0, p: 0, risk: None }; market.base_stations.len()];
        for r in residual {
            if r.bs >= caps.len() {
                return Err(Error::arg(format!("residual supply names unknown base station {}", r.bs)));
            }
            caps[r.bs] = Capacity {
                b: r.bandwidth_left.0,
                p: (r.power_left / cfg.grid.power_step + 1e-9).floor() as u32,
                risk: None,
            };
        }
        let open: Vec<usize> = (0..caps.len()).filter(|&j| caps[j].b > 0 && caps[j].p > 0).collect();
        let sols = clients
            .iter()
            .map(|&c| {
                let mut s = grid_solutions(market, c, &open, &cfg.grid, &cfg.reserve);
                s.retain(|x| x.bandwidth.0 <= caps[x.bs].b && x.power_units <= caps[x.bs].p);
                s
            })
            .collect();
        Ok(Self { market, cfg, clients, sols, caps })
    }

    pub fn clients(&self) -> &[ClientId] {
        &self.clients
    }

    pub fn temps_of(&self, out: &NegotiationOutcome) -> Vec<TempContract> {
        out.assignment
            .iter()
            .enumerate()
            .filter_map(|(c, a)| {
                a.map(|s| {
                    let sol = &self.sols[c][s];
                    TempContract {
                        client: self.clients[c],
                        bs: sol.bs,
                        bandwidth: sol.bandwidth,
                        power: sol.power,
                        pay: out.bids[c][s],
                    }
                })
            })
            .collect()
    }

    /// `2 + clients * ceil((V_max - p_min) / step)`.
    pub fn round_bound(&self) -> u64 {
        let all = self.sols.iter().flatten();
        let vmax = all.clone().map(|s| s.value).fold(0.0, f64::max);
        let pmin = all.map(|s| s.p_min).fold(f64::INFINITY, f64::min);
        if !pmin.is_finite() {
            return 2;
        }
        2 + self.clients.len() as u64 * ((vmax - pmin) / self.cfg.bid_step).ceil().max(0.0) as u64
    }
}

impl NegotiationModel for OnlineMarket<'_> {
    fn n_bs(&self) -> usize {
        self.caps.len()
    }

    fn n_clients(&self) -> usize {
        self.clients.len()
    }

    fn client(&self, c: usize) -> ClientId {
        self.clients[c]
    }

    fn solutions(&self, c: usize) -> &[Solution] {
        &self.sols[c]
    }

    fn client_utility(&self, c: usize, s: usize, bid: f64, _q: f64) -> f64 {
        self.sols[c][s].value - bid
    }

    fn bs_value(&self, _c: usize, _s: usize, bid: f64, _q: f64) -> f64 {
        bid
    }

    fn acceptable(&self, c: usize, s: usize, bid: f64, _q: f64) -> bool {
        bid <= self.sols[c][s].value * (1.0 + 1e-12)
    }

    fn capacity(&self, bs: usize) -> Capacity {
        self.caps[bs]
    }

    fn risk_weight(&self, _c: usize) -> f64 {
        1.0
    }

    fn bid_step(&self) -> f64 {
        self.cfg.bid_step
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineOutcome {
    pub negotiation: NegotiationOutcome,
    pub temps: Vec<TempContract>,
    pub round_bound: u64,
}

/// Matches `clients` (those left without service) to the residual supply.
/// `market` should already be restricted to who showed up, see [`online_market`].
pub fn run_onebw2m(
    market: &Market,
    clients: Vec<ClientId>,
    residual: &[ResidualSupply],
    cfg: &OnlineConfig,
) -> Result<OnlineOutcome> {
    let om = OnlineMarket::new(market, cfg, clients, residual)?;
    let negotiation = negotiate(&om, &cfg.engine);
    let temps = om.temps_of(&negotiation);
    Ok(OnlineOutcome { round_bound: om.round_bound(), negotiation, temps })
}
