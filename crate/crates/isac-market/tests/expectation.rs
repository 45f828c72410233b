mod common;

use isac_market::market::{
    conditional_volunteer, expect_beta, expect_vmax, expect_volunteer, CheapestCompensation, ExpectationMode,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_and_sampled_agree_with_enumeration() {
    let c = common::expectation_oracles(12, 40_000, 23);
    assert!(c.pass, "{}", c.line());
}

#[test]
fn realized_utilities_average_to_the_expected_ones() {
    let c = common::utility_consistency(6, 40_000, 29);
    assert!(c.pass, "{}", c.line());
}

#[test]
fn vmax_rejects_mismatched_inputs() {
    assert!(expect_vmax(&[], &[]).is_err());
    assert!(expect_vmax(&[0.5], &[1.0, 2.0]).is_err());
}

proptest! {
    #[test]
    fn beta_is_the_union_probability(probs in prop::collection::vec(0.0f64..=1.0, 1..10)) {
        let n = probs.len();
        let mut brute = 0.0;
        for mask in 1u32..(1 << n) {
            let w: f64 = probs.iter().enumerate().map(|(i, &a)| if mask >> i & 1 == 1 { a } else { 1.0 - a }).product();
            brute += w;
        }
        prop_assert!((expect_beta(&probs) - brute).abs() < 1e-12);
        let max = probs.iter().cloned().fold(0.0, f64::max);
        prop_assert!(expect_beta(&probs) >= max - 1e-12);
    }

    #[test]
    fn volunteer_probability_never_exceeds_participation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=8);
        let sizes: Vec<usize> = if rng.gen_bool(0.5) { vec![rng.gen_range(1..=3)] } else { vec![] };
        let m = common::random_market(&mut rng, n, &sizes);
        let contracts = common::random_contracts(&mut rng, &m);
        let joint = expect_volunteer(0, &contracts, &m, &CheapestCompensation, ExpectationMode::Exact).unwrap();
        for (c, &j) in &joint {
            let part = m.participation(*c);
            prop_assert!(j >= 0.0 && j <= part + 1e-12, "{c:?}: joint {j} part {part}");
            let q = conditional_volunteer(j, part);
            prop_assert!((0.0..=1.0).contains(&q));
        }
    }
}
