//! Communication and sensing values of a few bundles, and how closely
//! `zeta / sqrt(N P)` tracks the full position error bound.
//!
//! `cargo run --release --example valuations`

use isac_market::values::{
    comm_value, compute_geometry, crlb_fim, fit_zeta, peb_simplified, sensing_value, CrlbChannel, Position2D,
    ValueWeights, DEFAULT_B0_HZ,
};

fn main() -> isac_market::Result<()> {
    let w = ValueWeights::default();
    let b0 = DEFAULT_B0_HZ;
    println!("bundle (subchannels, W)   comm value (xi=1e4)   sensing value (kappa=0.01)");
    for (n, p) in [(20u32, 0.5), (20, 2.0), (60, 1.0), (100, 2.0)] {
        let b = f64::from(n) * b0;
        println!("  ({n:>3}, {p:.1}) {:>27.4} {:>28.4}", comm_value(b, p, 1e4, b0, &w)?, sensing_value(p, b, 0.01, &w));
    }

    let ch = CrlbChannel { n_tx: 8, n_rx: 4, h: 1.0, rho: 1.0, sigma_s2: 1e-3, t_s: 1.0 / b0, n_sub: 50 };
    let geom =
        compute_geometry(Position2D::new(300.0, 200.0), Position2D::new(0.0, 0.0), Position2D::new(250.0, 400.0));
    let zeta = fit_zeta(&ch, &geom, 1.0)?;
    println!("\nfitted zeta {zeta:.4e}");
    println!("  N    P     full PEB      zeta/sqrt(NP)");
    for (n, p) in [(10u32, 0.5), (50, 1.0), (100, 2.0), (200, 4.0)] {
        let full = crlb_fim(&ch, &geom, p, n)?.peb;
        println!("  {n:<4} {p:<4} {full:.6e}  {:.6e}", peb_simplified(n, p, zeta)?);
    }
    Ok(())
}
