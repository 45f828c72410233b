//! Bandwidth demand-to-supply ratio of the overbooking strategies as the
//! overbooking rate grows, averaged over several scenario draws.
//!
//! `cargo run --release --example overbooking_sweep -- [n_mus] [n_trials] [n_scenarios] [seed]`

use isac_market::sim::{gen_synthetic, run_monte_carlo, MonteCarloConfig, ScenarioConfig, Strategy};

fn arg<T: std::str::FromStr>(args: &[String], i: usize, default: T) -> isac_market::Result<T> {
    match args.get(i) {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| isac_market::Error::Input(format!("bad argument {s:?}"))),
    }
}

fn main() -> isac_market::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = ScenarioConfig { n_mus: arg(&args, 0, 100)?, ..ScenarioConfig::default() };
    let n_trials = arg(&args, 1, 20)?;
    let n_scenarios: u64 = arg(&args, 2, 5)?;
    let seed: u64 = arg(&args, 3, 7)?;
    let scenarios = (0..n_scenarios).map(|k| gen_synthetic(&cfg, seed + k)).collect::<isac_market::Result<Vec<_>>>()?;
    let strategies = [Strategy::HybridO, Strategy::Frbank];
    println!("{:>5} {:>12} {:>12}", "O", "hybrid_o", "frbank");
    for o in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let mut sums = [0.0; 2];
        for sc in &scenarios {
            let mut mc = MonteCarloConfig::new(n_trials, sc.seed);
            mc.overbooking = Some(o);
            let run = run_monte_carlo(sc, &strategies, &mc)?;
            for (k, s) in strategies.iter().enumerate() {
                sums[k] += run.report.get(*s).map_or(f64::NAN, |r| r.rdslc_b.mean);
            }
        }
        let n = n_scenarios as f64;
        println!("{o:>5.1} {:>12.4} {:>12.4}", sums[0] / n, sums[1] / n);
    }
    Ok(())
}
