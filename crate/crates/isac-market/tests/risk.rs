mod common;

use isac_market::market::{bs_risk, check_feasibility, client_risk_bound, FeasibilityContext};
use isac_market::matching::OfflineMarket;
use isac_market::sim::{gen_synthetic, offline_config, scenario_bid_step, ScenarioConfig, Strategy};
use proptest::prelude::*;

#[test]
fn markov_bound_dominates_overload_frequency() {
    let c = common::markov_risk(20, 5_000, 31);
    assert!(c.pass, "{}", c.line());
}

#[test]
fn risk_aware_contracts_pass_every_constraint() {
    let mut scenarios: Vec<_> = (0..20).map(|s| common::tiny_scenario(3000 + s)).collect();
    scenarios.push(gen_synthetic(&ScenarioConfig::default(), 7).unwrap());
    for scenario in &scenarios {
        for s in [Strategy::Frbank, Strategy::HybridO, Strategy::ConOffline] {
            let shape = s.shape();
            let ob = if shape.overbooking { scenario.trading.overbooking } else { 0.0 };
            let market = scenario.market(shape.coalitions, ob).unwrap();
            let cfg = offline_config(scenario, &shape, scenario_bid_step(scenario).unwrap()).unwrap();
            let om = OfflineMarket::new(&market, &cfg).unwrap();
            let out = om.run();
            let volunteer = om.volunteer_map(&out.negotiation);
            let ctx = FeasibilityContext { bounds: cfg.bounds, risk: cfg.risk, volunteer: &volunteer };
            let v = check_feasibility(&market, &out.contracts, &ctx);
            assert!(v.is_empty(), "{} {s}: {v:?}", scenario.id);
            let th = cfg.risk.unwrap();
            for j in 0..market.base_stations.len() {
                assert!(bs_risk(j, &out.contracts, &market, &th).satisfied, "{} {s} station {j}", scenario.id);
            }
        }
    }
}

#[test]
fn undefined_risk_is_an_error() {
    assert!(client_risk_bound(1.0, 2.0, 2.0, 0.5).is_err());
    assert!(client_risk_bound(1.0, 1.0, 3.0, 0.5).is_err());
}

proptest! {
    #[test]
    fn client_bound_is_normalized_shortfall(u_min in -50.0f64..50.0, span in 0.01f64..100.0, t in 0.0f64..1.0, rho in 0.0f64..1.0) {
        let u_max = u_min + span;
        let expected = u_max - t * span;
        let r = client_risk_bound(expected, u_max, u_min, rho).unwrap();
        prop_assert!((r.bound - t).abs() < 1e-9);
        if t < rho - 1e-9 {
            prop_assert!(r.satisfied);
        }
        if t > rho + 1e-9 {
            prop_assert!(!r.satisfied);
        }
    }
}
