mod common;

use isac_market::matching::{find_blocking_pairs, local_pareto_probe, negotiate, BlockingKind, OfflineMarket};
use isac_market::online::{online_market, residual_supply, sample_realization, OnlineConfig, OnlineMarket};
use isac_market::sim::{offline_config, scenario_bid_step, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn offline_matchings_are_stable() {
    let c = common::stability_suite(42);
    assert!(c.pass, "{}", c.line());
}

#[test]
fn spot_matchings_are_stable() {
    for seed in 0..30 {
        let scenario = common::tiny_scenario(1000 + seed);
        let market = scenario.market(Strategy::Frbank.shape().coalitions, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = sample_realization(&market, &mut rng);
        let spot = online_market(&market, &r);
        let clients: Vec<_> = spot.clients().into_iter().filter(|&c| r.present(c)).collect();
        let residual: Vec<_> = (0..spot.base_stations.len()).map(|j| residual_supply(&spot, j, &[], &[])).collect();
        let cfg = OnlineConfig {
            grid: scenario.trading.grid().unwrap(),
            reserve: scenario.trading.reserve,
            bid_step: scenario_bid_step(&scenario).unwrap(),
            engine: scenario.trading.engine,
        };
        let om = OnlineMarket::new(&spot, &cfg, clients, &residual).unwrap();
        let out = negotiate(&om, &cfg.engine);
        assert!(out.converged, "seed {seed}");
        assert!(u64::from(out.rounds) <= om.round_bound(), "seed {seed}: {} > {}", out.rounds, om.round_bound());
        let pairs =
            find_blocking_pairs(&om, &out, &[BlockingKind::Eviction, BlockingKind::Addition], u64::MAX).unwrap();
        assert!(pairs.is_empty(), "seed {seed}: {pairs:?}");
    }
}

#[test]
fn no_voluntary_welfare_improving_move() {
    // Stable outcomes can leave welfare on the table, but only through
    // moves that someone involved would refuse.
    for seed in 0..40 {
        let scenario = common::tiny_scenario(2000 + seed);
        let shape = Strategy::Frbank.shape();
        let market = scenario.market(shape.coalitions, scenario.trading.overbooking).unwrap();
        let cfg = offline_config(&scenario, &shape, scenario_bid_step(&scenario).unwrap()).unwrap();
        let om = OfflineMarket::new(&market, &cfg).unwrap();
        let out = om.run();
        let rep = local_pareto_probe(&om, &out.negotiation, u64::MAX).unwrap();
        assert!(!rep.partial);
        assert!(rep.improvements.iter().all(|d| !d.voluntary), "seed {seed}: {:?}", rep.improvements);
    }
}
