mod common;

use isac_market::values::{comm_rate, comm_value, peb_simplified, sensing_value, ValueWeights, DEFAULT_B0_HZ};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn sensing_value_hand_example() {
    // kappa * sqrt(P) * sqrt(B) = 1 * 2 * 3
    let w = ValueWeights { omega4: 1.0, ..ValueWeights::default() };
    assert!(close(sensing_value(4.0, 9.0, 1.0, &w), 6.0, 1e-12));
    let w = ValueWeights { omega2: 1.0, omega3: 0.0, omega4: 2.0, ..ValueWeights::default() };
    assert!(close(sensing_value(4.0, 9.0, 0.5, &w), 4.0, 1e-12));
}

#[test]
fn comm_value_hand_example() {
    // One subchannel at unit SNR carries B0 bit/s.
    let b = DEFAULT_B0_HZ;
    let xi = 1.0 / 2.0; // b0 * P * xi / B = 1 at P = 2
    assert!(close(comm_rate(b, 2.0, xi, b).unwrap(), b, 1e-12));
    let w = ValueWeights::default();
    assert!(close(comm_value(b, 2.0, xi, b, &w).unwrap(), 0.18, 1e-12));
    // SNR 3 doubles the rate.
    assert!(close(comm_rate(b, 6.0, xi, b).unwrap(), 2.0 * b, 1e-12));
}

#[test]
fn peb_of_zero_resources_is_an_error() {
    assert!(peb_simplified(0, 1.0, 1.0).is_err());
    assert!(peb_simplified(4, 0.0, 1.0).is_err());
}

#[test]
fn peb_matches_the_full_bound() {
    let c = common::peb_oracle(11);
    assert!(c.pass, "{}", c.line());
}

proptest! {
    #[test]
    fn peb_scales_as_inverse_square_root(n in 1u32..500, p in 0.01f64..50.0, zeta in 0.01f64..10.0) {
        let base = peb_simplified(n, p, zeta).unwrap();
        prop_assert!(close(peb_simplified(4 * n, p, zeta).unwrap(), base / 2.0, 1e-12));
        prop_assert!(close(peb_simplified(n, 9.0 * p, zeta).unwrap(), base / 3.0, 1e-12));
    }

    #[test]
    fn comm_value_is_monotone(n in 1u32..200, p in 0.01f64..40.0, xi in 1.0f64..1e6, k in 1u32..5) {
        let w = ValueWeights::default();
        let b0 = DEFAULT_B0_HZ;
        let b = f64::from(n) * b0;
        let v = comm_value(b, p, xi, b0, &w).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!(comm_value(b * f64::from(k + 1), p, xi, b0, &w).unwrap() > v);
        prop_assert!(comm_value(b, p * f64::from(k + 1), xi, b0, &w).unwrap() > v);
    }

    #[test]
    fn sensing_value_is_separable(p in 0.01f64..40.0, b in 1e3f64..1e8, kappa in 1e-4f64..1.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let w = ValueWeights { omega2: s, omega3: t, ..ValueWeights::default() };
        let v = sensing_value(p, b, kappa, &w);
        // Doubling P scales by 2^omega2, doubling B by 2^omega3.
        prop_assert!(close(sensing_value(2.0 * p, b, kappa, &w), v * 2f64.powf(s), 1e-12));
        prop_assert!(close(sensing_value(p, 2.0 * b, kappa, &w), v * 2f64.powf(t), 1e-12));
        prop_assert!(close(sensing_value(p, b, 2.0 * kappa, &w), 2.0 * v, 1e-12));
    }
}
