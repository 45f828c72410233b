//! One practical transaction of frbank, step by step: who shows up, who is
//! turned away, and what the spot market sells afterwards.
//!
//! `cargo run --release --example spot_market -- [n_mus] [seed]`

use isac_market::online::sample_realization;
use isac_market::sim::{
    cost_rng, gen_synthetic, prepare, realization_rng, run_transaction, scenario_bid_step, ScenarioConfig, Strategy,
};

fn main() -> isac_market::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_mus = args.first().copied().unwrap_or(60) as usize;
    let seed = args.get(1).copied().unwrap_or(7);
    let scenario = gen_synthetic(&ScenarioConfig { n_mus, ..ScenarioConfig::default() }, seed)?;
    let prep = prepare(&scenario, Strategy::Frbank, None, scenario_bid_step(&scenario)?)?;
    let r = sample_realization(&prep.market, &mut realization_rng(seed, 0));
    let shown = r.alpha.iter().filter(|&&a| a).count();
    let o = run_transaction(&scenario, &prep, 0, &r, &mut cost_rng(seed, 0, Strategy::Frbank))?;
    println!("{}: {shown}/{n_mus} users showed up", scenario.id);
    for v in o.volunteers.iter().filter(|v| !v.volunteers.is_empty()) {
        println!("  bs {} turned away {:?}, compensation {:.3}", v.bs, v.volunteers, v.compensation_paid);
    }
    println!("long-term contracts: {} executed, {} failed", o.executed.len(), o.failures());
    println!("spot contracts: {} in {} rounds (bound {})", o.temps.len(), o.online_rounds, o.online_round_bound);
    for t in &o.temps {
        println!(
            "  {:<14} bs {} {:>3} subchannels {:.1} W pay {:.3} value {:.3}",
            t.temp.client.to_string(),
            t.temp.bs,
            t.temp.bandwidth.0,
            t.temp.power,
            t.temp.pay,
            t.value
        );
    }
    println!(
        "welfare {:.3} (users {:.3}, stations {:.3}), {} messages, {:.1} ms delay, {:.3} J",
        o.social_welfare(),
        o.mu_utility(),
        o.bs_utility(),
        o.interactions(),
        o.dibc_ms,
        o.ecibc_j
    );
    Ok(())
}
