//! Times the long-term stage of each strategy on one synthetic scenario.
//!
//! `cargo run --release --example offline_stage -- [n_mus] [seed]`

use isac_market::sim::{gen_synthetic, prepare, scenario_bid_step, ScenarioConfig, Strategy};
use std::time::Instant;

fn main() -> isac_market::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_mus = args.first().copied().unwrap_or(60) as usize;
    let seed = args.get(1).copied().unwrap_or(7);
    let scenario = gen_synthetic(&ScenarioConfig { n_mus, ..ScenarioConfig::default() }, seed)?;
    let step = scenario_bid_step(&scenario)?;
    println!("{}: bid step {step:.4}", scenario.id);
    for s in Strategy::ALL.iter().filter(|s| s.shape().offline) {
        let t0 = Instant::now();
        let p = prepare(&scenario, *s, None, step)?;
        let o = p.offline.as_ref().expect("offline strategy");
        println!(
            "  {:<16} {:>4} contracts {:>7} rounds (bound {}) {:.2} s",
            s.name(),
            o.contracts.len(),
            o.rounds,
            o.round_bound,
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
