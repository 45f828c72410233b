//! Long-term contract matching with overbooking and risk control.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::engine::{negotiate, EngineConfig, NegotiationModel, NegotiationOutcome};
use super::grid::{grid_solutions, ReservePrice, ResourceGrid, Solution};
use super::knapsack::Capacity;
use crate::error::{Error, Result};
use crate::market::{
    client_risk_at, conditional_volunteer, expect_volunteer, expected_bs_contract_utility, expected_client_utility,
    BsId, CheapestCompensation, ClientId, CoalitionId, Contract, ContractBounds, ExpectationMode, Market, MuId,
    PenaltyTerms, RiskThresholds, EXACT_ENUMERATION_LIMIT,
};

/// How a coalition's expected representative value is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VmaxEstimate {
    /// The best member's value; it is delivered whenever the coalition shows up.
    #[default]
    Representative,
    /// `max(a_i * V_i)`: discounts each member by its own participation.
    ParticipationDiscounted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolunteerEstimate {
    /// Exact enumeration up to this many contract holders at a BS.
    pub exact_limit: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for VolunteerEstimate {
    fn default() -> Self {
        Self { exact_limit: EXACT_ENUMERATION_LIMIT, mc_samples: 2000, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub grid: ResourceGrid,
    pub bounds: ContractBounds,
    pub reserve: ReservePrice,
    pub penalties: PenaltyTerms,
    /// `None` runs without the four risk constraints.
    pub risk: Option<RiskThresholds>,
    /// Bid increment; `None` uses 1% of the mean reserve price.
    pub bid_step: Option<f64>,
    pub volunteers: VolunteerEstimate,
    pub vmax: VmaxEstimate,
    pub engine: EngineConfig,
}

/// A market prepared for long-term negotiation: every client's feasible
/// bundles and the expectation inputs of its utilities.
pub struct OfflineMarket<'a> {
    pub market: &'a Market,
    pub cfg: &'a OfflineConfig,
    clients: Vec<ClientId>,
    sols: Vec<Vec<Solution>>,
    /// Value used inside expectations, per client and solution.
    exp_value: Vec<Vec<f64>>,
    part: Vec<f64>,
    step: f64,
}

impl<'a> OfflineMarket<'a> {
    pub fn new(market: &'a Market, cfg: &'a OfflineConfig) -> Result<Self> {
        Self::with_clients(market, cfg, market.clients())
    }

    pub fn with_clients(market: &'a Market, cfg: &'a OfflineConfig, clients: Vec<ClientId>) -> Result<Self> {
        if let Some(r) = &cfg.risk {
            r.validate()?;
        }
        let bss: Vec<BsId> = (0..market.base_stations.len()).collect();
        let mut sols = Vec::with_capacity(clients.len());
        let mut exp_value = Vec::with_capacity(clients.len());
        let mut part = Vec::with_capacity(clients.len());
        for &c in &clients {
            let s = grid_solutions(market, c, &bss, &cfg.grid, &cfg.reserve);
            exp_value.push(s.iter().map(|x| expectation_value(market, c, x, cfg.vmax)).collect());
            sols.push(s);
            part.push(market.participation(c));
        }
        let step = match cfg.bid_step {
            Some(s) if s > 0.0 => s,
            Some(s) => return Err(Error::arg(format!("bid step must be positive, got {s}"))),
            None => default_bid_step(&sols),
        };
        let mut om = Self { market, cfg, clients, sols, exp_value, part, step };
        let initial: Vec<Vec<f64>> = om.sols.iter().map(|v| v.iter().map(|s| s.p_min).collect()).collect();
        // Solutions the client would never accept even at the reserve price are dropped up front.
        for (c, init) in initial.iter().enumerate() {
            let keep: Vec<bool> = init.iter().enumerate().map(|(s, &p)| om.acceptable(c, s, p, 0.0)).collect();
            let mut k = keep.iter();
            om.sols[c].retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            om.exp_value[c].retain(|_| *k.next().unwrap());
        }
        Ok(om)
    }

    pub fn clients(&self) -> &[ClientId] {
        &self.clients
    }

    pub fn participation(&self, c: usize) -> f64 {
        self.part[c]
    }

    pub fn expectation_value(&self, c: usize, s: usize) -> f64 {
        self.exp_value[c][s]
    }

    pub fn contract(&self, c: usize, s: usize, bid: f64) -> Contract {
        let sol = &self.sols[c][s];
        self.cfg.penalties.contract(self.clients[c], sol.bs, sol.bandwidth, sol.power, bid)
    }

    pub fn run(&self) -> OfflineOutcome {
        let negotiation = negotiate(self, &self.cfg.engine);
        let contracts = self.contracts_of(&negotiation);
        let state = MatchingState::from_contracts(&contracts);
        OfflineOutcome { negotiation, contracts, state }
    }

    pub fn contracts_of(&self, out: &NegotiationOutcome) -> Vec<Contract> {
        out.assignment.iter().enumerate().filter_map(|(c, a)| a.map(|s| self.contract(c, s, out.bids[c][s]))).collect()
    }

    /// Conditional volunteer probability of each matched client.
    pub fn volunteer_map(&self, out: &NegotiationOutcome) -> BTreeMap<ClientId, f64> {
        out.assignment.iter().enumerate().filter_map(|(c, a)| a.map(|s| (self.clients[c], out.q[c][s]))).collect()
    }

    /// Largest possible bid: the most valuable solution's value.
    pub fn max_value(&self) -> f64 {
        self.sols.iter().flatten().map(|s| s.value).fold(0.0, f64::max)
    }

    pub fn min_reserve(&self) -> f64 {
        self.sols.iter().flatten().map(|s| s.p_min).fold(f64::INFINITY, f64::min)
    }

    /// `2 + clients * ceil((V_max - p_min) / step)`.
    pub fn round_bound(&self) -> u64 {
        let vmax = self.max_value();
        let pmin = self.min_reserve();
        if !pmin.is_finite() {
            return 2;
        }
        2 + self.clients.len() as u64 * ((vmax - pmin) / self.step).ceil().max(0.0) as u64
    }
}

fn expectation_value(market: &Market, c: ClientId, s: &Solution, mode: VmaxEstimate) -> f64 {
    match (c, mode) {
        (ClientId::Coalition(k), VmaxEstimate::ParticipationDiscounted) => {
            let members = &market.coalitions[k].members;
            let best = members
                .iter()
                .map(|&m| {
                    let v = crate::values::sensing_value(
                        s.power,
                        s.bandwidth.hz(market.b0),
                        market.link(m, s.bs).kappa,
                        &market.weights,
                    );
                    market.users[m].part_prob * v
                })
                .fold(0.0, f64::max);
            members.len() as f64 * best
        }
        _ => s.value,
    }
}

pub fn default_bid_step(sols: &[Vec<Solution>]) -> f64 {
    let (sum, n) = sols.iter().flatten().fold((0.0, 0usize), |(a, n), s| (a + s.p_min, n + 1));
    if n == 0 || sum <= 0.0 {
        1.0
    } else {
        0.01 * sum / n as f64
    }
}

impl NegotiationModel for OfflineMarket<'_> {
    fn n_bs(&self) -> usize {
        self.market.base_stations.len()
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

    fn client_utility(&self, c: usize, s: usize, bid: f64, q: f64) -> f64 {
        expected_client_utility(&self.contract(c, s, bid), self.exp_value[c][s], self.part[c], q)
    }

    fn bs_value(&self, c: usize, s: usize, bid: f64, q: f64) -> f64 {
        expected_bs_contract_utility(&self.contract(c, s, bid), self.market.weights.omega5, self.part[c], q)
    }

    fn acceptable(&self, c: usize, s: usize, bid: f64, q: f64) -> bool {
        let sol = &self.sols[c][s];
        if bid > sol.value * (1.0 + 1e-12) {
            return false;
        }
        let contract = self.contract(c, s, bid);
        let ev = self.exp_value[c][s];
        if expected_client_utility(&contract, ev, self.part[c], q) < 0.0 {
            return false;
        }
        match &self.cfg.risk {
            None => true,
            Some(th) => client_risk_at(&contract, ev, self.market.client_size(self.clients[c]), self.part[c], q, th)
                .map(|r| r.satisfied)
                .unwrap_or(false),
        }
    }

    fn capacity(&self, bs: usize) -> Capacity {
        let (cb, cp) = self.market.nominal_capacity(bs);
        let station = &self.market.base_stations[bs];
        Capacity {
            b: (cb + 1e-9).floor() as u32,
            p: (cp / self.cfg.grid.power_step + 1e-9).floor() as u32,
            risk: self.cfg.risk.map(|th| (th.rho1 * f64::from(station.bandwidth.0), th.rho2 * station.power)),
        }
    }

    fn risk_weight(&self, c: usize) -> f64 {
        self.part[c]
    }

    fn bid_step(&self) -> f64 {
        self.step
    }

    fn refresh_volunteers(&self, bs: usize, members: &[(usize, usize, f64)], round: u32) -> Option<Vec<f64>> {
        let contracts: Vec<Contract> = members.iter().map(|&(c, s, bid)| self.contract(c, s, bid)).collect();
        let est = &self.cfg.volunteers;
        let mode = if members.len() <= est.exact_limit.min(EXACT_ENUMERATION_LIMIT) {
            ExpectationMode::Exact
        } else {
            ExpectationMode::MonteCarlo {
                samples: est.mc_samples,
                seed: est.seed ^ ((bs as u64) << 32) ^ u64::from(round),
            }
        };
        let joint = expect_volunteer(bs, &contracts, self.market, &CheapestCompensation, mode).ok()?;
        Some(members.iter().map(|&(c, _, _)| conditional_volunteer(joint[&self.clients[c]], self.part[c])).collect())
    }
}

/// Who is matched with whom, in both directions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchingState {
    pub comm: BTreeMap<MuId, BsId>,
    pub comm_by_bs: BTreeMap<BsId, BTreeSet<MuId>>,
    pub sense: BTreeMap<CoalitionId, BsId>,
    pub sense_by_bs: BTreeMap<BsId, BTreeSet<CoalitionId>>,
}

impl MatchingState {
    pub fn from_contracts(contracts: &[Contract]) -> Self {
        let mut st = Self::default();
        for c in contracts {
            match c.client {
                ClientId::Mu(i) => {
                    st.comm.insert(i, c.bs);
                    st.comm_by_bs.entry(c.bs).or_default().insert(i);
                }
                ClientId::Coalition(k) => {
                    st.sense.insert(k, c.bs);
                    st.sense_by_bs.entry(c.bs).or_default().insert(k);
                }
            }
        }
        st
    }

    /// Every forward edge has its reverse edge and nothing else exists.
    pub fn is_symmetric(&self) -> bool {
        let fwd_c: usize = self.comm_by_bs.values().map(|s| s.len()).sum();
        let fwd_s: usize = self.sense_by_bs.values().map(|s| s.len()).sum();
        fwd_c == self.comm.len()
            && fwd_s == self.sense.len()
            && self.comm.iter().all(|(u, b)| self.comm_by_bs.get(b).is_some_and(|s| s.contains(u)))
            && self.sense.iter().all(|(k, b)| self.sense_by_bs.get(b).is_some_and(|s| s.contains(k)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineOutcome {
    pub negotiation: NegotiationOutcome,
    pub contracts: Vec<Contract>,
    pub state: MatchingState,
}

/// Runs the long-term matching on every client of `market`.
pub fn run_offrfw2m(market: &Market, cfg: &OfflineConfig) -> Result<OfflineOutcome> {
    Ok(OfflineMarket::new(market, cfg)?.run())
}
