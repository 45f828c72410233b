//! Runs every strategy on one synthetic scenario and prints the mean metrics.
//!
//! `cargo run --release --example monte_carlo -- [n_mus] [n_trials] [seed] [config.toml]`
//!
//! The optional TOML file overrides the default scenario generator settings.

use isac_market::sim::{gen_synthetic, run_monte_carlo, MonteCarloConfig, ScenarioConfig, Strategy};
use std::time::Instant;

fn main() -> isac_market::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_mus = args.first().copied().unwrap_or(60) as usize;
    let n_trials = args.get(1).copied().unwrap_or(20);
    let seed = args.get(2).copied().unwrap_or(7);

    let base = match std::env::args().skip(1).find(|a| a.ends_with(".toml")) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            toml::from_str(&text).map_err(|e| isac_market::Error::Input(format!("{path}: {e}")))?
        }
        None => ScenarioConfig::default(),
    };
    let cfg = ScenarioConfig { n_mus, ..base };
    let scenario = gen_synthetic(&cfg, seed)?;
    let t0 = Instant::now();
    let run = run_monte_carlo(&scenario, &Strategy::ALL, &MonteCarloConfig::new(n_trials, seed))?;
    println!("{} ({n_trials} trials, {:.1} s)", scenario.id, t0.elapsed().as_secs_f64());
    for o in &run.offline {
        println!(
            "  offline {:<16} contracts {:>3} rounds {:>6} bound {:>10} converged {}",
            o.strategy.name(),
            o.contracts,
            o.rounds,
            o.round_bound,
            o.converged
        );
    }
    println!(
        "  {:<16} {:>10} {:>10} {:>10} {:>8} {:>8} {:>7} {:>7}",
        "strategy", "sw", "mu", "bs", "ni", "rt_ms", "rdslc_b", "drlc"
    );
    for r in &run.report.strategies {
        println!(
            "  {:<16} {:>10.2} {:>10.2} {:>10.2} {:>8.1} {:>8.2} {:>7.3} {:>7.3}",
            r.strategy.name(),
            r.social_welfare.mean,
            r.mu_utility.mean,
            r.bs_utility.mean,
            r.ni.mean,
            r.rt_ms.mean,
            r.rdslc_b.mean,
            r.drlc.mean
        );
    }
    Ok(())
}
