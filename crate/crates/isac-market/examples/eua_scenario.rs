//! Builds a scenario from EUA-style site and user tables.
//!
//! Pass two CSV files with LATITUDE and LONGITUDE columns, or nothing to use
//! a few made-up sites around central Melbourne written to a temp dir.
//!
//! `cargo run --release --example eua_scenario -- [sites.csv users.csv] [n_mus]`

use std::fs;
use std::path::PathBuf;

use isac_market::sim::{load_eua, ScenarioConfig};

fn demo_tables() -> std::io::Result<(PathBuf, PathBuf)> {
    let dir = std::env::temp_dir().join("isac-market-eua-demo");
    fs::create_dir_all(&dir)?;
    let sites = "SITE_ID,LATITUDE,LONGITUDE\n1,-37.8136,144.9631\n2,-37.8170,144.9560\n3,-37.8100,144.9700\n";
    let mut users = String::from("LATITUDE,LONGITUDE\n");
    for i in 0..40 {
        let (dx, dy) = ((i % 8) as f64 * 0.0015, (i / 8) as f64 * 0.0015);
        users.push_str(&format!("{:.6},{:.6}\n", -37.8180 + dy, 144.9540 + dx));
    }
    fs::write(dir.join("sites.csv"), sites)?;
    fs::write(dir.join("users.csv"), users)?;
    Ok((dir.join("sites.csv"), dir.join("users.csv")))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (sites, users) = match args.as_slice() {
        [s, u, ..] => (PathBuf::from(s), PathBuf::from(u)),
        _ => demo_tables()?,
    };
    let n_mus = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(30);
    let scenario = load_eua(&sites, &users, &ScenarioConfig { n_mus, ..ScenarioConfig::default() }, 7)?;
    println!(
        "{}: {} stations, {} users, {} targets",
        scenario.id,
        scenario.base_stations.len(),
        scenario.users.len(),
        scenario.targets.len()
    );
    for b in &scenario.base_stations {
        println!(
            "  bs {} at ({:.0}, {:.0}) m: {} subchannels, {:.2} W",
            b.id, b.location.x, b.location.y, b.bandwidth.0, b.power
        );
    }
    let far = scenario.users.iter().map(|u| u.location.x.hypot(u.location.y)).fold(0.0, f64::max);
    println!("farthest user {far:.0} m from the centroid");
    Ok(())
}
