//! Shared builders, brute-force oracles and the acceptance checks.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use isac_market::market::{
    bs_contract_utility, bs_risk, client_utility, conditional_volunteer, expect_beta, expect_volunteer,
    expected_bs_contract_utility, expected_client_utility, BaseStation, CheapestCompensation, ClientId, Coalition,
    Contract, ExpectationMode, Market, MobileUser, PenaltyTerms, Realization, RiskThresholds, VolunteerPolicy,
};
use isac_market::matching::{
    check_coalition_stability, check_rationality, find_blocking_pairs, individual_rationality, knapsack_select,
    BlockingKind, Capacity, Item, OfflineMarket,
};
use isac_market::online::select_volunteers;
use isac_market::sim::{
    gen_synthetic, offline_config, run_monte_carlo, scenario_bid_step, MonteCarloConfig, MonteCarloRun, Scenario,
    ScenarioConfig, Strategy, TrialOutcome,
};
use isac_market::values::{
    compute_geometry, crlb_fim, fit_zeta, peb_simplified, CrlbChannel, LinkQuality, Position2D, Subchannels,
    ValueWeights,
};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name, pass, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

// ---------- builders ----------

/// Two stations with a few tens of subchannels and a few watts, so that a
/// handful of users already compete for them.
pub fn tiny_config(n_mus: usize, n_targets: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        n_mus,
        n_bss: 2,
        n_targets,
        bandwidth_mhz: (3.0, 9.0),
        power_dbw: (0.0, 5.0),
        ..ScenarioConfig::default()
    };
    let t = &mut cfg.trading;
    t.bounds.b_min = Subchannels(10);
    t.bounds.b_max = Subchannels(30);
    t.b_step = 10;
    t.bounds.p_min = 0.5;
    t.bounds.p_max = 1.5;
    t.p_step = 0.5;
    cfg
}

pub fn tiny_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cfg = tiny_config(rng.gen_range(2..=6), rng.gen_range(1..=3));
    gen_synthetic(&cfg, seed).expect("tiny scenario")
}

pub const OFFLINE_STRATEGIES: [Strategy; 7] = [
    Strategy::Frbank,
    Strategy::HybridO,
    Strategy::ConOffline,
    Strategy::Hybrid,
    Strategy::FrbankNor,
    Strategy::HybridONor,
    Strategy::ConOfflineNor,
];

/// A single-station market with `n` users and random link and participation draws.
pub fn random_market(rng: &mut ChaCha8Rng, n: usize, coalition_sizes: &[usize]) -> Market {
    let users: Vec<MobileUser> = (0..n)
        .map(|i| MobileUser {
            id: i,
            location: Position2D::new(0.0, 0.0),
            target: 0,
            rate_req: 0.0,
            sensing_req: 0.0,
            n_rx: 4,
            part_prob: rng.gen_range(0.05..0.95),
        })
        .collect();
    let bs = vec![BaseStation {
        id: 0,
        location: Position2D::new(10.0, 0.0),
        bandwidth: Subchannels(rng.gen_range(40..120)),
        power: rng.gen_range(2.0..8.0),
        n_tx: 8,
        overbook_b: 0.0,
        overbook_p: 0.0,
    }];
    let mut coalitions = Vec::new();
    let mut next = 0;
    for (k, &s) in coalition_sizes.iter().enumerate() {
        let members: Vec<usize> = (next..(next + s).min(n)).collect();
        next += s;
        if !members.is_empty() {
            coalitions.push(Coalition { id: k, target: 0, members });
        }
    }
    let links = (0..n)
        .map(|_| LinkQuality { xi: rng.gen_range(1e3..1e5), kappa: rng.gen_range(0.002..0.02), zeta: 1.0 })
        .collect();
    Market::new(users, bs, coalitions, links, ValueWeights::default(), 180e3).expect("random market")
}

/// Random contracts at station 0 for every user not in a coalition and for
/// every coalition.
pub fn random_contracts(rng: &mut ChaCha8Rng, m: &Market) -> Vec<Contract> {
    let in_coalition: Vec<usize> = m.coalitions.iter().flat_map(|c| c.members.clone()).collect();
    let mut clients: Vec<ClientId> =
        (0..m.users.len()).filter(|i| !in_coalition.contains(i)).map(ClientId::Mu).collect();
    clients.extend(m.coalitions.iter().map(|c| ClientId::Coalition(c.id)));
    clients
        .into_iter()
        .map(|c| {
            let b = Subchannels(rng.gen_range(1..=6) * 10);
            let p = f64::from(rng.gen_range(1..=6)) * 0.5;
            let pay = rng.gen_range(1.0..50.0);
            PenaltyTerms::default().contract(c, 0, b, p, pay)
        })
        .collect()
}

// ---------- brute-force oracles ----------

/// Best selection by enumerating every subset; values summed in index order.
pub fn brute_knapsack(items: &[Item], cap: &Capacity) -> f64 {
    let n = items.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let (mut b, mut p, mut rb, mut rp, mut v) = (0u64, 0u64, 0.0, 0.0, 0.0);
        for (i, it) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                b += u64::from(it.b);
                p += u64::from(it.p);
                rb += it.rb;
                rp += it.rp;
                v += it.value;
            }
        }
        let risk_ok = cap.risk.is_none_or(|(xb, xp)| rb <= xb + 1e-9 * xb.max(1.0) && rp <= xp + 1e-9 * xp.max(1.0));
        if b <= u64::from(cap.b) && p <= u64::from(cap.p) && risk_ok && v > best {
            best = v;
        }
    }
    best
}

pub fn random_knapsack(rng: &mut ChaCha8Rng, integral: bool) -> (Vec<Item>, Capacity) {
    let n = rng.gen_range(0..=12);
    let items: Vec<Item> = (0..n)
        .map(|_| {
            let b = rng.gen_range(1..=8) * 5;
            let p = rng.gen_range(1..=6);
            let a = rng.gen_range(0.5..1.0);
            let value = if integral { f64::from(rng.gen_range(-5..60)) } else { rng.gen_range(-5.0..60.0) };
            Item { value, b, p, rb: a * f64::from(b), rp: a * f64::from(p) * 0.5 }
        })
        .collect();
    let cap_b = rng.gen_range(10..=120);
    let cap_p = rng.gen_range(2..=20);
    let risk = rng
        .gen_bool(0.5)
        .then(|| (f64::from(cap_b) * rng.gen_range(0.5..1.0), f64::from(cap_p) * 0.5 * rng.gen_range(0.5..1.0)));
    (items, Capacity { b: cap_b, p: cap_p, risk })
}

/// Presence of every client for each of the `2^n` user outcomes, with its weight.
pub fn enumerate_outcomes(m: &Market) -> Vec<(Realization, f64)> {
    let n = m.users.len();
    (0u32..(1 << n))
        .map(|mask| {
            let alpha: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let w: f64 =
                m.users.iter().zip(&alpha).map(|(u, &a)| if a { u.part_prob } else { 1.0 - u.part_prob }).product();
            (Realization::from_alpha(m, alpha), w)
        })
        .collect()
}

/// Joint probability of presence and volunteering, by direct enumeration.
pub fn brute_volunteer(m: &Market, contracts: &[Contract]) -> BTreeMap<ClientId, f64> {
    let mut out: BTreeMap<ClientId, f64> = contracts.iter().map(|c| (c.client, 0.0)).collect();
    for (r, w) in enumerate_outcomes(m) {
        let present: Vec<Contract> = contracts.iter().filter(|c| r.present(c.client)).cloned().collect();
        for v in select_volunteers(m, 0, &present).volunteers {
            *out.get_mut(&v).unwrap() += w;
        }
    }
    out
}

// ---------- acceptance checks ----------

pub fn stability_suite(n_markets: u64) -> Check {
    let mut failures = Vec::new();
    let mut converged = 0;
    let mut contested = 0;
    let mut max_ratio: f64 = 0.0;
    for seed in 0..n_markets {
        let scenario = tiny_scenario(seed);
        let strategy = OFFLINE_STRATEGIES[seed as usize % OFFLINE_STRATEGIES.len()];
        let shape = strategy.shape();
        let ob = if shape.overbooking { scenario.trading.overbooking } else { 0.0 };
        let market = scenario.market(shape.coalitions, ob).unwrap();
        let cfg = offline_config(&scenario, &shape, scenario_bid_step(&scenario).unwrap()).unwrap();
        let om = OfflineMarket::new(&market, &cfg).unwrap();
        let out = om.run();
        let neg = &out.negotiation;
        max_ratio = max_ratio.max(f64::from(neg.rounds) / om.round_bound() as f64);
        if !neg.converged {
            failures.push(format!("seed {seed} ({strategy}) did not converge"));
            continue;
        }
        converged += 1;
        if neg.traces.iter().any(|t| t.exhausted > 0 || t.bid_updates > 0) {
            contested += 1;
        }
        let mut bad = Vec::new();
        match find_blocking_pairs(&om, neg, &[BlockingKind::Eviction], u64::MAX) {
            Ok(v) if !v.is_empty() => bad.push(format!("{} type-1 pairs", v.len())),
            Err(e) => bad.push(e.to_string()),
            _ => {}
        }
        match find_blocking_pairs(&om, neg, &[BlockingKind::Addition], u64::MAX) {
            Ok(v) if !v.is_empty() => bad.push(format!("{} type-2 pairs", v.len())),
            Err(e) => bad.push(e.to_string()),
            _ => {}
        }
        let ir = individual_rationality(&om, neg);
        let rat = check_rationality(&om, neg);
        if !ir.is_empty() || !rat.is_empty() {
            bad.push(format!("{} rationality findings", ir.len() + rat.len()));
        }
        let coal = check_coalition_stability(&om, neg);
        if !coal.is_empty() {
            bad.push(format!("{} coalition findings", coal.len()));
        }
        if !bad.is_empty() {
            failures.push(format!("seed {seed} ({strategy}): {}", bad.join(", ")));
        }
    }
    Check::new(
        "stability suite",
        failures.is_empty(),
        format!(
            "{converged}/{n_markets} converged, {contested} contested, max rounds/bound {max_ratio:.4}; {}",
            if failures.is_empty() {
                "no blocking pairs, IR and coalition checks clean".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

pub fn knapsack_oracle(n: u64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for k in 0..n {
        let integral = k % 2 == 0;
        let (items, cap) = random_knapsack(&mut rng, integral);
        let sel = knapsack_select(&items, &cap);
        let got: f64 = sel.iter().map(|&i| items[i].value).sum();
        let want = brute_knapsack(&items, &cap);
        let ok = if integral { got == want } else { (got - want).abs() <= 1e-9 * want.abs().max(1.0) };
        if !ok {
            bad.push(format!("instance {k}: dp {got} vs {want}"));
        }
    }
    Check::new(
        "knapsack oracle",
        bad.is_empty(),
        if bad.is_empty() { format!("{n} instances, DP optimum equals enumeration") } else { bad.join("; ") },
    )
}

pub fn expectation_oracles(n_cases: u64, mc_samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_exact: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut bad = Vec::new();
    for k in 0..n_cases {
        let probs: Vec<f64> = (0..rng.gen_range(1..=10)).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut brute = 0.0;
        for mask in 0u32..(1 << probs.len()) {
            let w: f64 = probs.iter().enumerate().map(|(i, &a)| if mask >> i & 1 == 1 { a } else { 1.0 - a }).product();
            if mask != 0 {
                brute += w;
            }
        }
        worst_exact = worst_exact.max((expect_beta(&probs) - brute).abs());

        let n = rng.gen_range(2..=10);
        let sizes: Vec<usize> = if rng.gen_bool(0.5) { vec![rng.gen_range(2..=3)] } else { vec![] };
        let m = random_market(&mut rng, n, &sizes);
        let contracts = random_contracts(&mut rng, &m);
        let exact = expect_volunteer(0, &contracts, &m, &CheapestCompensation, ExpectationMode::Exact).unwrap();
        let oracle = brute_volunteer(&m, &contracts);
        for (c, v) in &oracle {
            worst_exact = worst_exact.max((exact[c] - v).abs());
        }
        let mc = expect_volunteer(
            0,
            &contracts,
            &m,
            &CheapestCompensation,
            ExpectationMode::MonteCarlo { samples: mc_samples, seed: k },
        )
        .unwrap();
        for (c, &p) in &oracle {
            let se = (p * (1.0 - p) / mc_samples as f64).sqrt();
            let z = if se > 0.0 {
                (mc[c] - p).abs() / se
            } else if mc[c] == p {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
            if z > 3.0 {
                bad.push(format!("case {k} {c}: mc {} vs {p}", mc[c]));
            }
        }
    }
    let pass = worst_exact <= 1e-12 && bad.is_empty();
    Check::new(
        "expectation oracles",
        pass,
        format!(
            "{n_cases} cases, max exact error {worst_exact:.2e}, max Monte Carlo |z| {worst_z:.2}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

/// Mean realized utility of every party against its closed-form expectation.
pub fn utility_consistency(n_cases: u64, samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_z: f64 = 0.0;
    let mut bad = Vec::new();
    let mut checked = 0;
    for k in 0..n_cases {
        let n = rng.gen_range(3..=8);
        let sizes = if k % 2 == 0 { vec![2] } else { vec![] };
        let m = random_market(&mut rng, n, &sizes);
        let contracts = random_contracts(&mut rng, &m);
        let joint = expect_volunteer(0, &contracts, &m, &CheapestCompensation, ExpectationMode::Exact).unwrap();
        let omega5 = m.weights.omega5;
        // Per party: client utilities in contract order, then the station.
        let parties = contracts.len() + 1;
        let mut sum = vec![0.0; parties];
        let mut sq = vec![0.0; parties];
        let mut draw = ChaCha8Rng::seed_from_u64(seed ^ (k + 1));
        for _ in 0..samples {
            let alpha: Vec<bool> = m.users.iter().map(|u| draw.gen::<f64>() < u.part_prob).collect();
            let r = Realization::from_alpha(&m, alpha);
            let present: Vec<Contract> = contracts.iter().filter(|c| r.present(c.client)).cloned().collect();
            let vol = CheapestCompensation.select(
                m.base_stations[0].bandwidth.0,
                m.base_stations[0].power,
                &present
                    .iter()
                    .map(|c| isac_market::market::Demand {
                        client: c.client,
                        bandwidth: c.bandwidth.0,
                        power: c.power,
                        pel_s: c.pel_s,
                    })
                    .collect::<Vec<_>>(),
            );
            let mut bs = 0.0;
            for (i, c) in contracts.iter().enumerate() {
                let p = r.present(c.client);
                let v = vol.contains(&c.client);
                let u = client_utility(c, m.client_value(c.client, 0, c.bandwidth, c.power), p, v);
                sum[i] += u;
                sq[i] += u * u;
                bs += bs_contract_utility(c, omega5, p, v);
            }
            sum[parties - 1] += bs;
            sq[parties - 1] += bs * bs;
        }
        let mut expected = Vec::with_capacity(parties);
        let mut bs_expected = 0.0;
        for c in &contracts {
            let part = m.participation(c.client);
            let q = conditional_volunteer(joint[&c.client], part);
            expected.push(expected_client_utility(c, m.client_value(c.client, 0, c.bandwidth, c.power), part, q));
            bs_expected += expected_bs_contract_utility(c, omega5, part, q);
        }
        expected.push(bs_expected);
        let ns = samples as f64;
        for i in 0..parties {
            let mean = sum[i] / ns;
            let var = (sq[i] / ns - mean * mean).max(0.0) * ns / (ns - 1.0);
            let se = (var / ns).sqrt();
            let z = if se > 0.0 { (mean - expected[i]).abs() / se } else { (mean - expected[i]).abs() / 1e-12 };
            worst_z = worst_z.max(z);
            checked += 1;
            if z > 3.0 {
                bad.push(format!("case {k} party {i}: mean {mean:.5} vs {:.5} (se {se:.2e})", expected[i]));
            }
        }
    }
    Check::new(
        "expected-utility consistency",
        bad.is_empty(),
        format!(
            "{checked} parties over {n_cases} markets, {samples} draws each, max |z| {worst_z:.2}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

/// Largest relative gap between reported welfare and delivered value minus power cost.
pub fn transfer_gap(outcomes: &[TrialOutcome], omega5: f64) -> f64 {
    outcomes
        .iter()
        .map(|o| {
            let sw = o.social_welfare();
            (sw - o.welfare_from_service(omega5)).abs() / sw.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

pub fn markov_risk(n_markets: u64, n_real: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let th = RiskThresholds { rho1: 1.0, rho2: 1.0, ..RiskThresholds::default() };
    let mut bad = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for k in 0..n_markets {
        let n = rng.gen_range(3..=12);
        let sizes = if k % 3 == 0 { vec![3] } else { vec![] };
        let m = random_market(&mut rng, n, &sizes);
        let contracts = random_contracts(&mut rng, &m);
        let risk = bs_risk(0, &contracts, &m, &th);
        let station = &m.base_stations[0];
        let (mut over_b, mut over_p) = (0usize, 0usize);
        for _ in 0..n_real {
            let alpha: Vec<bool> = m.users.iter().map(|u| rng.gen::<f64>() < u.part_prob).collect();
            let r = Realization::from_alpha(&m, alpha);
            let (b, p) = contracts
                .iter()
                .filter(|c| r.present(c.client))
                .fold((0u64, 0.0), |(b, p), c| (b + u64::from(c.bandwidth.0), p + c.power));
            over_b += usize::from(b >= u64::from(station.bandwidth.0));
            over_p += usize::from(p >= station.power);
        }
        for (name, count, bound) in [("bandwidth", over_b, risk.bandwidth_bound), ("power", over_p, risk.power_bound)] {
            let f = count as f64 / n_real as f64;
            let pb = bound.min(1.0);
            let sigma = (pb * (1.0 - pb) / n_real as f64).sqrt();
            worst_slack = worst_slack.min(bound + 3.0 * sigma - f);
            if f > bound + 3.0 * sigma {
                bad.push(format!("market {k} {name}: frequency {f:.4} > bound {bound:.4}"));
            }
        }
    }
    Check::new(
        "Markov risk validity",
        bad.is_empty(),
        format!(
            "{n_markets} markets x {n_real} realizations, min slack {worst_slack:.4}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

pub fn peb_oracle(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..50 {
        let ch = CrlbChannel {
            n_tx: rng.gen_range(4..=16),
            n_rx: rng.gen_range(2..=8),
            h: rng.gen_range(0.5..2.0),
            rho: rng.gen_range(0.5..2.0),
            sigma_s2: rng.gen_range(1e-4..1e-2),
            t_s: 1.0 / 180e3,
            n_sub: rng.gen_range(10..=100),
        };
        let mu = Position2D::new(rng.gen_range(0.0..800.0), rng.gen_range(0.0..800.0));
        let bs = Position2D::new(rng.gen_range(0.0..800.0), rng.gen_range(0.0..800.0));
        let target = Position2D::new(rng.gen_range(0.0..800.0), rng.gen_range(0.0..800.0));
        let geom = compute_geometry(mu, bs, target);
        let Ok(zeta) = fit_zeta(&ch, &geom, 1.0) else { continue };
        for n in [1u32, 5, 10, 25, 50, 100, 200] {
            for p in [0.1, 0.5, 1.0, 2.0, 10.0] {
                let fim = crlb_fim(&ch, &geom, p, n).unwrap();
                let simple = peb_simplified(n, p, zeta).unwrap();
                worst = worst.max((fim.peb - simple).abs() / simple);
                cases += 1;
            }
        }
    }
    Check::new(
        "PEB oracle",
        worst <= 1e-6 && cases > 0,
        format!("{cases} (N, P) points, max relative gap to zeta/sqrt(NP) {worst:.2e}"),
    )
}

/// Monte Carlo of every strategy at one MU count. Returns the run (without
/// outcomes), its worst transfer gap, and any round-bound violations.
pub fn trend_point(n_mus: usize, n_trials: u64, seed: u64) -> (MonteCarloRun, f64, Vec<String>) {
    let cfg = ScenarioConfig { n_mus, ..ScenarioConfig::default() };
    let scenario = gen_synthetic(&cfg, seed).unwrap();
    let mc = MonteCarloConfig { n_trials, master_seed: seed, overbooking: None, keep_outcomes: true };
    let mut run = run_monte_carlo(&scenario, &Strategy::ALL, &mc).unwrap();
    let gap = transfer_gap(&run.outcomes, scenario.weights.omega5);
    let issues = round_violations(&run, &scenario.id);
    run.outcomes = Vec::new();
    (run, gap, issues)
}

pub fn mean(run: &MonteCarloRun, s: Strategy, f: fn(&isac_market::sim::StrategyReport) -> f64) -> f64 {
    run.report.get(s).map_or(f64::NAN, f)
}

/// Strict increase of the mean over the listed values.
pub fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Mean bandwidth RDSLC of `strategies` at each overbooking rate, averaged
/// over `n_scenarios` scenario draws. Also reports round-bound violations.
pub fn overbooking_curve(
    n_mus: usize,
    rates: &[f64],
    strategies: &[Strategy],
    n_scenarios: u64,
    n_trials: u64,
) -> (Vec<Vec<f64>>, Vec<String>) {
    let cfg = ScenarioConfig { n_mus, ..ScenarioConfig::default() };
    let scenarios: Vec<Scenario> = (0..n_scenarios).map(|k| gen_synthetic(&cfg, 1 + k).unwrap()).collect();
    let mut curve = vec![vec![0.0; rates.len()]; strategies.len()];
    let mut round_issues = Vec::new();
    for (r, &o) in rates.iter().enumerate() {
        for sc in &scenarios {
            let mc = MonteCarloConfig { n_trials, master_seed: sc.seed, overbooking: Some(o), keep_outcomes: true };
            let run = run_monte_carlo(sc, strategies, &mc).unwrap();
            round_issues.extend(round_violations(&run, &format!("{} O={o}", sc.id)));
            for (k, &s) in strategies.iter().enumerate() {
                curve[k][r] += run.report.get(s).unwrap().rdslc_b.mean / n_scenarios as f64;
            }
        }
    }
    (curve, round_issues)
}

/// Matching runs that exceeded their round bound or failed to converge.
/// Spot markets are checked trial by trial, so `run` must keep outcomes.
pub fn round_violations(run: &MonteCarloRun, tag: &str) -> Vec<String> {
    let mut out = Vec::new();
    for o in &run.offline {
        if !o.converged || u64::from(o.rounds) > o.round_bound {
            out.push(format!(
                "{tag} offline {}: {} rounds, bound {}, converged {}",
                o.strategy, o.rounds, o.round_bound, o.converged
            ));
        }
    }
    for o in &run.outcomes {
        if !o.online_converged || (o.online_rounds > 0 && u64::from(o.online_rounds) > o.online_round_bound) {
            out.push(format!(
                "{tag} online {} trial {}: {} rounds, bound {}, converged {}",
                o.strategy, o.trial, o.online_rounds, o.online_round_bound, o.online_converged
            ));
        }
    }
    out
}

/// Largest offline and spot round counts relative to their bounds.
pub fn round_ratio(run: &MonteCarloRun) -> f64 {
    let off = run.offline.iter().map(|o| f64::from(o.rounds) / o.round_bound.max(1) as f64);
    let on = run.outcomes.iter().map(|o| f64::from(o.online_rounds) / o.online_round_bound.max(1) as f64);
    off.chain(on).fold(0.0, f64::max)
}
