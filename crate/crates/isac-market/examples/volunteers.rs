//! Overbooked station: who is asked to step aside, and how often.
//!
//! Books every user of a small scenario at station 0, then compares exact
//! and sampled volunteer probabilities and shows one realized draw.
//!
//! `cargo run --release --example volunteers -- [n_mus] [seed]`

use isac_market::market::{
    conditional_volunteer, expect_volunteer, CheapestCompensation, ClientId, CoalitionMode, ExpectationMode,
    PenaltyTerms,
};
use isac_market::online::{residual_supply, sample_realization, select_volunteers};
use isac_market::sim::{gen_synthetic, ScenarioConfig};
use isac_market::values::Subchannels;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> isac_market::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_mus = args.first().copied().unwrap_or(8) as usize;
    let seed = args.get(1).copied().unwrap_or(7);
    let cfg = ScenarioConfig {
        n_mus,
        n_bss: 1,
        bandwidth_mhz: (6.0, 6.0),
        power_dbw: (3.0, 3.0),
        ..ScenarioConfig::default()
    };
    let scenario = gen_synthetic(&cfg, seed)?;
    let market = scenario.market(CoalitionMode::Singleton, 0.0)?;
    let bs = &market.base_stations[0];
    println!("station 0: {} subchannels, {:.2} W", bs.bandwidth.0, bs.power);

    let terms = PenaltyTerms::default();
    let contracts: Vec<_> =
        (0..n_mus).map(|i| terms.contract(ClientId::Mu(i), 0, Subchannels(10), 0.5, 2.0 + i as f64)).collect();
    let exact = expect_volunteer(0, &contracts, &market, &CheapestCompensation, ExpectationMode::Exact)?;
    let mc = expect_volunteer(
        0,
        &contracts,
        &market,
        &CheapestCompensation,
        ExpectationMode::MonteCarlo { samples: 200_000, seed },
    )?;
    println!("client   part   P(show, volunteer) exact   sampled   q");
    for c in &contracts {
        let part = market.participation(c.client);
        let j = exact[&c.client];
        println!(
            "{:<8} {part:.3}  {j:>24.4} {:>9.4} {:>7.4}",
            c.client.to_string(),
            mc[&c.client],
            conditional_volunteer(j, part)
        );
    }

    let r = sample_realization(&market, &mut ChaCha8Rng::seed_from_u64(seed));
    let present: Vec<_> = contracts.iter().filter(|c| r.present(c.client)).cloned().collect();
    let d = select_volunteers(&market, 0, &present);
    let left = residual_supply(&market, 0, &present, &d.volunteers);
    println!(
        "\none draw: {} of {} showed up, volunteers {:?}, compensation {:.2}, left {} subchannels {:.2} W",
        present.len(),
        contracts.len(),
        d.volunteers,
        d.compensation_paid,
        left.bandwidth_left.0,
        left.power_left
    );
    Ok(())
}
