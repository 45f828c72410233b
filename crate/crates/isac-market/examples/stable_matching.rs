//! Long-term matching of hybrid_o on a contested toy market, then every
//! stability audit.
//!
//! `cargo run --release --example stable_matching -- [n_mus] [seed]`

use isac_market::matching::{
    check_coalition_stability, find_blocking_pairs, individual_rationality, local_pareto_probe, BlockingKind,
    NegotiationModel, OfflineMarket,
};
use isac_market::sim::{gen_synthetic, offline_config, scenario_bid_step, ScenarioConfig, Strategy};
use isac_market::values::Subchannels;

fn main() -> isac_market::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_mus = args.first().copied().unwrap_or(6) as usize;
    let seed = args.get(1).copied().unwrap_or(3);
    // Two small stations so the users have to compete.
    let mut cfg = ScenarioConfig {
        n_mus,
        n_bss: 2,
        n_targets: 2,
        bandwidth_mhz: (3.0, 9.0),
        power_dbw: (0.0, 5.0),
        ..ScenarioConfig::default()
    };
    cfg.trading.bounds.b_min = Subchannels(10);
    cfg.trading.bounds.b_max = Subchannels(30);
    cfg.trading.b_step = 10;
    cfg.trading.bounds.p_max = 1.5;
    let scenario = gen_synthetic(&cfg, seed)?;
    let shape = Strategy::HybridO.shape();
    let market = scenario.market(shape.coalitions, scenario.trading.overbooking)?;
    let ocfg = offline_config(&scenario, &shape, scenario_bid_step(&scenario)?)?;
    let om = OfflineMarket::new(&market, &ocfg)?;
    let out = om.run();
    let neg = &out.negotiation;
    let tradable = (0..om.n_clients()).filter(|&c| !om.solutions(c).is_empty()).count();
    println!("{}: {tradable} of {} clients have a feasible bundle", scenario.id, om.n_clients());
    println!("{} rounds (bound {}), converged {}", neg.rounds, om.round_bound(), neg.converged);
    for c in &out.contracts {
        println!(
            "  {:<14} bs {} {:>3} subchannels {:.1} W pay {:.3}",
            c.client.to_string(),
            c.bs,
            c.bandwidth.0,
            c.power,
            c.pay
        );
    }
    for kind in [BlockingKind::Eviction, BlockingKind::Addition] {
        let pairs = find_blocking_pairs(&om, neg, &[kind], u64::MAX)?;
        println!("{kind:?} blocking pairs: {}", pairs.len());
    }
    println!("IR findings: {}", individual_rationality(&om, neg).len());
    println!("coalition findings: {}", check_coalition_stability(&om, neg).len());
    let probe = local_pareto_probe(&om, neg, u64::MAX)?;
    println!(
        "welfare-raising single moves: {} ({} that every party would accept)",
        probe.improvements.len(),
        probe.improvements.iter().filter(|d| d.voluntary).count()
    );
    Ok(())
}
