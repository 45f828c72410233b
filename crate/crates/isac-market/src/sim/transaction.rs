//! Trading strategies and the per-trial transaction pipeline.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::scenario::{InteractionModel, Scenario};
use crate::error::{Error, Result};
use crate::market::{ClientId, CoalitionMode, Contract, Market, Realization, TempContract};
use crate::matching::{default_bid_step, grid_solutions, rank, OfflineConfig, OfflineMarket, ResourceGrid, Solution};
use crate::online::{online_market, residual_supply, run_onebw2m, select_volunteers, OnlineConfig, VolunteerDecision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Coalitions, overbooking and risk control offline, spot backup online.
    Frbank,
    /// Everything traded on the spot.
    ConOnline,
    /// Long-term contracts only, no overbooking, no backup.
    ConOffline,
    /// Long-term contracts without overbooking or coalitions, spot backup.
    Hybrid,
    /// `Hybrid` with overbooking.
    HybridO,
    /// One-shot: each client offers once, stations keep the highest payers.
    Greedy,
    FrbankNor,
    HybridONor,
    ConOfflineNor,
}

/// What a strategy switches on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrategyShape {
    pub coalitions: CoalitionMode,
    pub offline: bool,
    pub overbooking: bool,
    pub risk: bool,
    pub backup: bool,
    pub greedy: bool,
}

impl Strategy {
    pub const BASELINES: [Strategy; 6] = [
        Strategy::Frbank,
        Strategy::ConOnline,
        Strategy::ConOffline,
        Strategy::Hybrid,
        Strategy::HybridO,
        Strategy::Greedy,
    ];
    pub const ALL: [Strategy; 9] = [
        Strategy::Frbank,
        Strategy::ConOnline,
        Strategy::ConOffline,
        Strategy::Hybrid,
        Strategy::HybridO,
        Strategy::Greedy,
        Strategy::FrbankNor,
        Strategy::HybridONor,
        Strategy::ConOfflineNor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Frbank => "frbank",
            Strategy::ConOnline => "con_online",
            Strategy::ConOffline => "con_offline",
            Strategy::Hybrid => "hybrid",
            Strategy::HybridO => "hybrid_o",
            Strategy::Greedy => "greedy",
            Strategy::FrbankNor => "frbank_nor",
            Strategy::HybridONor => "hybrid_o_nor",
            Strategy::ConOfflineNor => "con_offline_nor",
        }
    }

    pub fn shape(self) -> StrategyShape {
        use Strategy::*;
        let coalitions =
            if matches!(self, Frbank | FrbankNor) { CoalitionMode::ByTarget } else { CoalitionMode::Singleton };
        StrategyShape {
            coalitions,
            offline: !matches!(self, ConOnline | Greedy),
            overbooking: matches!(self, Frbank | FrbankNor | HybridO | HybridONor),
            risk: !matches!(self, FrbankNor | HybridONor | ConOfflineNor),
            backup: matches!(self, Frbank | FrbankNor | Hybrid | HybridO | HybridONor | ConOnline),
            greedy: self == Greedy,
        }
    }

    /// Risk-aware counterpart of a no-risk variant.
    pub fn risk_aware(self) -> Strategy {
        match self {
            Strategy::FrbankNor => Strategy::Frbank,
            Strategy::HybridONor => Strategy::HybridO,
            Strategy::ConOfflineNor => Strategy::ConOffline,
            s => s,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown strategy {s:?}")))
    }
}

/// Summary of the long-term stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineSummary {
    pub contracts: Vec<Contract>,
    pub rounds: u32,
    pub converged: bool,
    pub round_bound: u64,
    pub interactions: u64,
}

/// A strategy bound to a scenario, with its long-term stage already run.
#[derive(Clone, Debug)]
pub struct PreparedStrategy {
    pub strategy: Strategy,
    pub market: Market,
    pub grid: ResourceGrid,
    pub bid_step: f64,
    pub overbooking: f64,
    pub offline: Option<OfflineSummary>,
}

/// Bid increment shared by every strategy of a scenario: the configured
/// step, or 1% of the mean reserve price over all single-user bundles.
pub fn scenario_bid_step(scenario: &Scenario) -> Result<f64> {
    if let Some(s) = scenario.trading.bid_step {
        return Ok(s);
    }
    let market = scenario.market(CoalitionMode::Singleton, 0.0)?;
    let grid = scenario.trading.grid()?;
    let bss: Vec<usize> = (0..market.base_stations.len()).collect();
    let sols: Vec<Vec<Solution>> = market
        .clients()
        .into_iter()
        .map(|c| grid_solutions(&market, c, &bss, &grid, &scenario.trading.reserve))
        .collect();
    Ok(default_bid_step(&sols))
}

pub fn offline_config(scenario: &Scenario, shape: &StrategyShape, bid_step: f64) -> Result<OfflineConfig> {
    let t = &scenario.trading;
    Ok(OfflineConfig {
        grid: t.grid()?,
        bounds: t.bounds,
        reserve: t.reserve,
        penalties: t.penalties,
        risk: shape.risk.then_some(t.risk),
        bid_step: Some(bid_step),
        volunteers: crate::matching::VolunteerEstimate { seed: scenario.seed ^ t.volunteers.seed, ..t.volunteers },
        vmax: t.vmax,
        engine: t.engine,
    })
}

/// Builds the strategy's market and runs its long-term stage.
/// `overbooking` overrides the scenario's rate for overbooking strategies.
pub fn prepare(
    scenario: &Scenario,
    strategy: Strategy,
    overbooking: Option<f64>,
    bid_step: f64,
) -> Result<PreparedStrategy> {
    let shape = strategy.shape();
    let ob = if shape.overbooking { overbooking.unwrap_or(scenario.trading.overbooking) } else { 0.0 };
    if !(ob >= 0.0) {
        return Err(Error::arg("overbooking rate must be >= 0"));
    }
    let market = scenario.market(shape.coalitions, ob)?;
    let grid = scenario.trading.grid()?;
    let offline = if shape.offline {
        let cfg = offline_config(scenario, &shape, bid_step)?;
        let om = OfflineMarket::new(&market, &cfg)?;
        let out = om.run();
        Some(OfflineSummary {
            rounds: out.negotiation.rounds,
            converged: out.negotiation.converged,
            round_bound: om.round_bound(),
            interactions: out.negotiation.total_interactions(),
            contracts: out.contracts,
        })
    } else {
        None
    };
    Ok(PreparedStrategy { strategy, market, grid, bid_step, overbooking: ob, offline })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractStatus {
    Served,
    /// The client did not show up and paid its penalty.
    Absent,
    /// The station turned the client away and paid compensation.
    Volunteered,
    /// The client showed up but walking away was cheaper than the contract.
    ClientBreach,
    /// The station found paying compensation cheaper than serving.
    BsBreach,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutedContract {
    pub contract: Contract,
    /// The client's value if served.
    pub value: f64,
    pub status: ContractStatus,
    pub client_utility: f64,
    pub bs_utility: f64,
    /// Counts as a failed long-term transaction.
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServedTemp {
    pub temp: TempContract,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub strategy: Strategy,
    pub trial: u64,
    pub realization: Realization,
    pub volunteers: Vec<VolunteerDecision>,
    pub executed: Vec<ExecutedContract>,
    pub temps: Vec<ServedTemp>,
    pub client_utilities: Vec<(ClientId, f64)>,
    pub bs_utilities: Vec<f64>,
    pub client_to_bs: u64,
    pub bs_to_client: u64,
    pub online_rounds: u32,
    pub online_round_bound: u64,
    pub online_converged: bool,
    pub dibc_ms: f64,
    pub ecibc_j: f64,
    pub rt_ms: f64,
    /// Present contracted demand over nominal supply.
    pub rdslc_b: f64,
    pub rdslc_p: f64,
}

impl TrialOutcome {
    // `+ 0.0` turns the empty sum's -0 into 0.
    pub fn mu_utility(&self) -> f64 {
        self.client_utilities.iter().map(|x| x.1).sum::<f64>() + 0.0
    }

    pub fn bs_utility(&self) -> f64 {
        self.bs_utilities.iter().sum::<f64>() + 0.0
    }

    pub fn social_welfare(&self) -> f64 {
        self.mu_utility() + self.bs_utility()
    }

    pub fn interactions(&self) -> u64 {
        self.client_to_bs + self.bs_to_client
    }

    pub fn contracted(&self) -> usize {
        self.executed.len()
    }

    pub fn failures(&self) -> usize {
        self.executed.iter().filter(|e| e.failed).count()
    }

    pub fn drlc(&self) -> f64 {
        if self.executed.is_empty() {
            0.0
        } else {
            self.failures() as f64 / self.executed.len() as f64
        }
    }

    /// Value actually delivered minus the power cost stations bear for
    /// long-term service. Equals social welfare because every payment,
    /// penalty and compensation is a transfer.
    pub fn welfare_from_service(&self, omega5: f64) -> f64 {
        let long: f64 = self
            .executed
            .iter()
            .filter(|e| e.status == ContractStatus::Served)
            .map(|e| e.value - omega5 * e.contract.power)
            .sum();
        long + self.temps.iter().map(|t| t.value).sum::<f64>()
    }
}

/// Delay and sender energy of a message sequence. Energy is in joules.
pub fn interaction_cost<R: Rng + ?Sized>(
    client_to_bs: u64,
    bs_to_client: u64,
    model: &InteractionModel,
    rng: &mut R,
) -> (f64, f64) {
    let mut delay = 0.0;
    let mut energy = 0.0;
    let mut draw = |n: u64, power: (f64, f64), rng: &mut R| {
        for _ in 0..n {
            let d = rng.gen_range(model.delay_ms.0..=model.delay_ms.1);
            let p = rng.gen_range(power.0..=power.1);
            delay += d;
            energy += p * d / 1000.0;
        }
    };
    draw(client_to_bs, model.mu_power_w, rng);
    draw(bs_to_client, model.bs_power_w, rng);
    (delay, energy)
}

struct Ledger {
    clients: Vec<(ClientId, f64)>,
    bss: Vec<f64>,
}

impl Ledger {
    fn client(&mut self, c: ClientId, u: f64) {
        match self.clients.iter_mut().find(|x| x.0 == c) {
            Some(x) => x.1 += u,
            None => self.clients.push((c, u)),
        }
    }
}

/// Runs one practical transaction of `prep` under `realization`.
/// `cost_rng` drives the interaction delay and power draws.
pub fn run_transaction<R: Rng + ?Sized>(
    scenario: &Scenario,
    prep: &PreparedStrategy,
    trial: u64,
    realization: &Realization,
    cost_rng: &mut R,
) -> Result<TrialOutcome> {
    if !realization.is_consistent(&prep.market) {
        return Err(Error::arg("realization does not match the market"));
    }
    let start = Instant::now();
    let market = &prep.market;
    let shape = prep.strategy.shape();
    let omega5 = market.weights.omega5;
    let nb = market.base_stations.len();
    let mut ledger = Ledger { clients: Vec::new(), bss: vec![0.0; nb] };
    let mut executed = Vec::new();
    let mut volunteers = Vec::new();
    let mut temps = Vec::new();
    let (mut c2b, mut b2c) = (0u64, 0u64);
    let (mut online_rounds, mut online_round_bound, mut online_converged) = (0, 0, true);

    let contracts: &[Contract] = prep.offline.as_ref().map_or(&[], |o| &o.contracts);
    let present: Vec<Contract> = contracts.iter().filter(|c| realization.present(c.client)).cloned().collect();
    let supply_b: f64 = market.base_stations.iter().map(|b| f64::from(b.bandwidth.0)).sum();
    let supply_p: f64 = market.base_stations.iter().map(|b| b.power).sum();
    let rdslc_b = present.iter().fold(0.0, |a, c| a + f64::from(c.bandwidth.0)) / supply_b;
    let rdslc_p = present.iter().fold(0.0, |a, c| a + c.power) / supply_p;

    let mut turned_away: Vec<ClientId> = Vec::new();
    for j in 0..nb {
        let d = select_volunteers(market, j, &present);
        b2c += d.volunteers.len() as u64;
        turned_away.extend(&d.volunteers);
        if !d.volunteers.is_empty() {
            volunteers.push(d);
        }
    }
    let volunteered: Vec<ClientId> = turned_away.clone();
    let mut served_lt: Vec<Contract> = Vec::new();
    for c in contracts {
        let value = market.client_value(c.client, c.bs, c.bandwidth, c.power);
        let (status, cu, bu, failed) = if !realization.present(c.client) {
            (ContractStatus::Absent, -c.pel_u, c.pel_u, true)
        } else if volunteered.contains(&c.client) {
            (ContractStatus::Volunteered, c.pel_s, -c.pel_s, c.pel_s < value - c.pay)
        } else if value - c.pay < -c.pel_u {
            (ContractStatus::ClientBreach, -c.pel_u, c.pel_u, true)
        } else if c.pay - omega5 * c.power < -c.pel_s {
            turned_away.push(c.client);
            (ContractStatus::BsBreach, c.pel_s, -c.pel_s, true)
        } else {
            served_lt.push(c.clone());
            (ContractStatus::Served, value - c.pay, c.pay - omega5 * c.power, false)
        };
        ledger.client(c.client, cu);
        ledger.bss[c.bs] += bu;
        executed.push(ExecutedContract {
            contract: c.clone(),
            value,
            status,
            client_utility: cu,
            bs_utility: bu,
            failed,
        });
    }

    let spot = online_market(market, realization);
    let wanting: Vec<ClientId> = spot
        .clients()
        .into_iter()
        .filter(|&c| match c {
            ClientId::Mu(i) => realization.alpha[i],
            ClientId::Coalition(k) => !spot.coalitions[k].members.is_empty(),
        })
        .filter(|c| !contracts.iter().any(|k| k.client == *c) || turned_away.contains(c))
        .collect();

    if shape.backup && !wanting.is_empty() {
        let residual: Vec<_> = (0..nb).map(|j| residual_supply(market, j, &served_lt, &[])).collect();
        let cfg = OnlineConfig {
            grid: prep.grid.clone(),
            reserve: scenario.trading.reserve,
            bid_step: prep.bid_step,
            engine: scenario.trading.engine,
        };
        let out = run_onebw2m(&spot, wanting, &residual, &cfg)?;
        online_rounds = out.negotiation.rounds;
        online_round_bound = out.round_bound;
        online_converged = out.negotiation.converged;
        for t in &out.negotiation.traces {
            c2b += t.client_to_bs;
            b2c += t.bs_to_client;
        }
        for t in out.temps {
            let value = spot.client_value(t.client, t.bs, t.bandwidth, t.power);
            ledger.client(t.client, value - t.pay);
            ledger.bss[t.bs] += t.pay;
            temps.push(ServedTemp { temp: t, value });
        }
    } else if shape.greedy {
        let offers = greedy_offers(&spot, &wanting, &prep.grid, scenario);
        c2b += offers.len() as u64;
        b2c += offers.len() as u64;
        for (t, value) in greedy_accept(&spot, offers) {
            ledger.client(t.client, value - t.pay);
            ledger.bss[t.bs] += t.pay;
            temps.push(ServedTemp { temp: t, value });
        }
    }
    let rt_ms = start.elapsed().as_secs_f64() * 1e3;
    let (dibc_ms, ecibc_j) = interaction_cost(c2b, b2c, &scenario.trading.interaction, cost_rng);
    ledger.clients.sort_by_key(|a| a.0);
    Ok(TrialOutcome {
        strategy: prep.strategy,
        trial,
        realization: realization.clone(),
        volunteers,
        executed,
        temps,
        client_utilities: ledger.clients,
        bs_utilities: ledger.bss,
        client_to_bs: c2b,
        bs_to_client: b2c,
        online_rounds,
        online_round_bound,
        online_converged,
        dibc_ms,
        ecibc_j,
        rt_ms,
        rdslc_b,
        rdslc_p,
    })
}

/// Each client's single offer: the bundle with the largest surplus at the
/// reserve price, bid halfway between reserve and value.
pub fn greedy_offers(
    market: &Market,
    clients: &[ClientId],
    grid: &ResourceGrid,
    scenario: &Scenario,
) -> Vec<(TempContract, f64)> {
    let bss: Vec<usize> = (0..market.base_stations.len()).collect();
    let mut out = Vec::new();
    for &c in clients {
        let sols: Vec<Solution> = grid_solutions(market, c, &bss, grid, &scenario.trading.reserve)
            .into_iter()
            .filter(|s| {
                let b = &market.base_stations[s.bs];
                s.bandwidth <= b.bandwidth && s.power <= b.power
            })
            .collect();
        let best = sols.iter().min_by(|a, b| rank(a.value - a.p_min, a.p_min, a, b.value - b.p_min, b.p_min, b));
        if let Some(s) = best {
            let pay = s.p_min + 0.5 * (s.value - s.p_min);
            out.push((TempContract { client: c, bs: s.bs, bandwidth: s.bandwidth, power: s.power, pay }, s.value));
        }
    }
    out
}

/// Stations take offers by descending payment while they fit the nominal supply.
pub fn greedy_accept(market: &Market, mut offers: Vec<(TempContract, f64)>) -> Vec<(TempContract, f64)> {
    offers.sort_by(|a, b| b.0.pay.total_cmp(&a.0.pay).then(a.0.client.cmp(&b.0.client)));
    let mut left: Vec<(u32, f64)> = market.base_stations.iter().map(|b| (b.bandwidth.0, b.power)).collect();
    let mut out = Vec::new();
    for (t, v) in offers {
        let l = &mut left[t.bs];
        if t.bandwidth.0 <= l.0 && t.power <= l.1 + 1e-9 {
            l.0 -= t.bandwidth.0;
            l.1 -= t.power;
            out.push((t, v));
        }
    }
    out
}
