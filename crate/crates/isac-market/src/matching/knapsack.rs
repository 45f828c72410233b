//! Base-station selection: which proposals to accept under capacity and risk.
//!
//! The two nominal capacities are integral (subchannels and power-grid units)
//! and are solved exactly by dynamic programming. The expected-demand risk
//! caps are fractional; when the DP optimum breaks them, small instances are
//! re-solved exactly by branch and bound over all four constraints, larger
//! ones are repaired greedily.

use serde::{Deserialize, Serialize};

/// One proposal as the BS sees it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub value: f64,
    /// Subchannels.
    pub b: u32,
    /// Power-grid units.
    pub p: u32,
    /// Expected subchannels (participation-weighted).
    pub rb: f64,
    /// Expected watts (participation-weighted).
    pub rp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub b: u32,
    pub p: u32,
    /// Caps on expected subchannels and expected watts.
    pub risk: Option<(f64, f64)>,
}

/// Proposals up to this count are re-solved exactly when risk caps bind.
pub const EXACT_RISK_LIMIT: usize = 20;

const RISK_EPS: f64 = 1e-9;

fn risk_ok(items: &[Item], set: &[usize], cap: &Capacity) -> bool {
    match cap.risk {
        None => true,
        Some((rb, rp)) => {
            let (sb, sp) = set.iter().fold((0.0, 0.0), |(b, p), &i| (b + items[i].rb, p + items[i].rp));
            sb <= rb + RISK_EPS * rb.max(1.0) && sp <= rp + RISK_EPS * rp.max(1.0)
        }
    }
}

/// Sum of values in index order, the canonical way selections are scored.
pub fn selection_value(items: &[Item], set: &[usize]) -> f64 {
    set.iter().map(|&i| items[i].value).sum()
}

/// Accepted indices, ascending.
pub fn knapsack_select(items: &[Item], cap: &Capacity) -> Vec<usize> {
    let cand: Vec<usize> =
        (0..items.len()).filter(|&i| items[i].value > 0.0 && items[i].b <= cap.b && items[i].p <= cap.p).collect();
    let chosen = nominal_dp(items, &cand, cap);
    if risk_ok(items, &chosen, cap) {
        return chosen;
    }
    if cand.len() <= EXACT_RISK_LIMIT {
        exact_search(items, &cand, cap)
    } else {
        repair(items, chosen, cap)
    }
}

/// Optimum under the two nominal capacities only.
pub fn nominal_dp(items: &[Item], cand: &[usize], cap: &Capacity) -> Vec<usize> {
    let sum_b: u64 = cand.iter().map(|&i| u64::from(items[i].b)).sum();
    let sum_p: u64 = cand.iter().map(|&i| u64::from(items[i].p)).sum();
    let need_b = sum_b > u64::from(cap.b);
    let need_p = sum_p > u64::from(cap.p);
    if !need_b && !need_p {
        return cand.to_vec();
    }
    let gb = if need_b { cand.iter().fold(0, |g, &i| gcd(g, items[i].b)).max(1) } else { 1 };
    let gp = if need_p { cand.iter().fold(0, |g, &i| gcd(g, items[i].p)).max(1) } else { 1 };
    let nb = if need_b { (cap.b / gb) as usize } else { 0 };
    let np = if need_p { (cap.p / gp) as usize } else { 0 };
    let wb = |i: usize| if need_b { (items[i].b / gb) as usize } else { 0 };
    let wp = |i: usize| if need_p { (items[i].p / gp) as usize } else { 0 };
    let cols = np + 1;
    let cells = (nb + 1) * cols;
    let mut dp = vec![0.0f64; cells];
    let words = cells.div_ceil(64);
    let mut keep = vec![0u64; words * cand.len()];
    for (k, &i) in cand.iter().enumerate() {
        let (ib, ip, v) = (wb(i), wp(i), items[i].value);
        let row = &mut keep[k * words..(k + 1) * words];
        for b in (ib..=nb).rev() {
            for p in (ip..=np).rev() {
                let take = dp[(b - ib) * cols + (p - ip)] + v;
                let cell = b * cols + p;
                if take > dp[cell] {
                    dp[cell] = take;
                    row[cell / 64] |= 1 << (cell % 64);
                }
            }
        }
    }
    let (mut b, mut p) = (nb, np);
    let mut out = Vec::new();
    for (k, &i) in cand.iter().enumerate().rev() {
        let cell = b * cols + p;
        if keep[k * words + cell / 64] >> (cell % 64) & 1 == 1 {
            out.push(i);
            b -= wb(i);
            p -= wp(i);
        }
    }
    out.sort_unstable();
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Branch and bound over all four constraints.
fn exact_search(items: &[Item], cand: &[usize], cap: &Capacity) -> Vec<usize> {
    let mut order = cand.to_vec();
    order.sort_by(|&a, &b| items[b].value.total_cmp(&items[a].value).then(a.cmp(&b)));
    let mut suffix = vec![0.0; order.len() + 1];
    for k in (0..order.len()).rev() {
        suffix[k] = suffix[k + 1] + items[order[k]].value;
    }
    let (rcap_b, rcap_p) = cap.risk.unwrap_or((f64::INFINITY, f64::INFINITY));
    struct S<'a> {
        items: &'a [Item],
        order: &'a [usize],
        suffix: &'a [f64],
        cap: &'a Capacity,
        rcap: (f64, f64),
        cur: Vec<usize>,
        best: Vec<usize>,
        best_v: f64,
    }
    fn go(s: &mut S, k: usize, b: u32, p: u32, rb: f64, rp: f64, v: f64) {
        if k == s.order.len() {
            let canon = {
                let mut c = s.cur.clone();
                c.sort_unstable();
                c
            };
            let cv = selection_value(s.items, &canon);
            if cv > s.best_v {
                s.best_v = cv;
                s.best = canon;
            }
            return;
        }
        if v + s.suffix[k] <= s.best_v {
            return;
        }
        let i = s.order[k];
        let it = s.items[i];
        let nb = b + it.b;
        let np = p + it.p;
        let nrb = rb + it.rb;
        let nrp = rp + it.rp;
        if nb <= s.cap.b
            && np <= s.cap.p
            && nrb <= s.rcap.0 + RISK_EPS * s.rcap.0.max(1.0)
            && nrp <= s.rcap.1 + RISK_EPS * s.rcap.1.max(1.0)
        {
            s.cur.push(i);
            go(s, k + 1, nb, np, nrb, nrp, v + it.value);
            s.cur.pop();
        }
        go(s, k + 1, b, p, rb, rp, v);
    }
    let mut s = S {
        items,
        order: &order,
        suffix: &suffix,
        cap,
        rcap: (rcap_b, rcap_p),
        cur: Vec::new(),
        best: Vec::new(),
        best_v: 0.0,
    };
    go(&mut s, 0, 0, 0, 0.0, 0.0, 0.0);
    s.best
}

/// Drops the item with the least value per unit of expected resource until
/// the risk caps hold.
fn repair(items: &[Item], mut set: Vec<usize>, cap: &Capacity) -> Vec<usize> {
    let (rcb, rcp) = cap.risk.expect("repair only runs with risk caps");
    while !risk_ok(items, &set, cap) {
        let worst = set
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                let load = (items[i].rb / rcb.max(f64::MIN_POSITIVE)).max(items[i].rp / rcp.max(f64::MIN_POSITIVE));
                let density = if load > 0.0 { items[i].value / load } else { f64::INFINITY };
                (pos, i, density)
            })
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)))
            .map(|(pos, _, _)| pos);
        match worst {
            Some(pos) => {
                set.remove(pos);
            }
            None => break,
        }
    }
    set
}

/// Relative margin by which a BS's value must rise to count as a gain.
pub const GAIN_TOL: f64 = 1e-9;

/// `new` beats `old` by more than rounding noise.
pub fn gains(new: f64, old: f64) -> bool {
    new > old + GAIN_TOL * old.abs().max(1.0)
}

/// Best nominal value of a fixed item set for every smaller capacity.
/// Ignores the risk caps.
#[derive(Clone, Debug)]
pub struct ValueTable {
    gb: u32,
    gp: u32,
    nb: usize,
    np: usize,
    dp: Vec<f64>,
}

impl ValueTable {
    pub fn new(items: &[Item], cap: &Capacity) -> Self {
        let gb = items.iter().fold(0, |g, i| gcd(g, i.b)).max(1);
        let gp = items.iter().fold(0, |g, i| gcd(g, i.p)).max(1);
        let nb = (cap.b / gb) as usize;
        let np = (cap.p / gp) as usize;
        let cols = np + 1;
        let mut dp = vec![0.0f64; (nb + 1) * cols];
        for it in items.iter().filter(|i| i.value > 0.0) {
            let (ib, ip) = ((it.b / gb) as usize, (it.p / gp) as usize);
            if ib > nb || ip > np {
                continue;
            }
            for b in (ib..=nb).rev() {
                for p in (ip..=np).rev() {
                    let take = dp[(b - ib) * cols + (p - ip)] + it.value;
                    let cell = &mut dp[b * cols + p];
                    if take > *cell {
                        *cell = take;
                    }
                }
            }
        }
        Self { gb, gp, nb, np, dp }
    }

    /// Best value using at most `b` subchannels and `p` power units.
    pub fn best_within(&self, b: u32, p: u32) -> f64 {
        let bi = ((b / self.gb) as usize).min(self.nb);
        let pi = ((p / self.gp) as usize).min(self.np);
        self.dp[bi * (self.np + 1) + pi]
    }
}

/// Whether a BS holding `held`, worth `current`, would rather take `new`
/// alongside some subset of `held`. `table` must be built from `held`.
pub fn admits(held: &[Item], table: &ValueTable, new: &Item, cap: &Capacity, current: f64) -> bool {
    if new.value <= 0.0 || new.b > cap.b || new.p > cap.p {
        return false;
    }
    let (rb, rp) = (cap.b - new.b, cap.p - new.p);
    if !gains(new.value + table.best_within(rb, rp), current) {
        return false;
    }
    let Some((kb, kp)) = cap.risk else { return true };
    let rest = Capacity { b: rb, p: rp, risk: Some((kb - new.rb, kp - new.rp)) };
    if kb - new.rb < -RISK_EPS * kb.max(1.0) || kp - new.rp < -RISK_EPS * kp.max(1.0) {
        return false;
    }
    let set = knapsack_select(held, &rest);
    gains(new.value + selection_value(held, &set), current)
}

/// Reference optimum by enumerating every subset. Exponential; for checking only.
pub fn brute_force_select(items: &[Item], cap: &Capacity, with_risk: bool) -> (f64, Vec<usize>) {
    assert!(items.len() <= 24, "brute force is limited to 24 items");
    let mut best = (0.0, Vec::new());
    for mask in 0u32..(1u32 << items.len()) {
        let set: Vec<usize> = (0..items.len()).filter(|&i| mask >> i & 1 == 1).collect();
        let b: u64 = set.iter().map(|&i| u64::from(items[i].b)).sum();
        let p: u64 = set.iter().map(|&i| u64::from(items[i].p)).sum();
        if b > u64::from(cap.b) || p > u64::from(cap.p) {
            continue;
        }
        if with_risk && !risk_ok(items, &set, cap) {
            continue;
        }
        let v = selection_value(items, &set);
        if v > best.0 {
            best = (v, set);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn it(value: f64, b: u32, p: u32) -> Item {
        Item { value, b, p, rb: f64::from(b), rp: f64::from(p) }
    }

    #[test]
    fn empty_and_oversized() {
        let cap = Capacity { b: 10, p: 10, risk: None };
        assert!(knapsack_select(&[], &cap).is_empty());
        assert!(knapsack_select(&[it(5.0, 11, 1)], &cap).is_empty());
    }

    #[test]
    fn picks_best_pair_over_single_large() {
        let cap = Capacity { b: 10, p: 10, risk: None };
        let items = [it(10.0, 10, 1), it(6.0, 5, 1), it(6.0, 5, 1)];
        assert_eq!(knapsack_select(&items, &cap), vec![1, 2]);
    }

    #[test]
    fn risk_caps_trigger_exact_search() {
        let cap = Capacity { b: 10, p: 10, risk: Some((6.0, 100.0)) };
        let items = [it(10.0, 5, 1), it(9.0, 5, 1), it(8.0, 1, 1)];
        let got = knapsack_select(&items, &cap);
        let (v, _) = brute_force_select(&items, &cap, true);
        assert_eq!(selection_value(&items, &got), v);
        assert_eq!(got, vec![0, 2]);
    }

    #[test]
    fn admits_matches_subset_search() {
        let cap = Capacity { b: 10, p: 10, risk: None };
        let held = [it(6.0, 5, 2), it(5.0, 5, 2)];
        let t = ValueTable::new(&held, &cap);
        assert!(admits(&held, &t, &it(7.0, 5, 2), &cap, 11.0));
        assert!(!admits(&held, &t, &it(4.0, 5, 2), &cap, 11.0));
        assert!(!admits(&held, &t, &it(11.0, 10, 2), &cap, 11.0));
        assert!(admits(&held, &t, &it(1.0, 0, 0), &cap, 11.0));
    }

    #[test]
    fn non_positive_values_are_never_taken() {
        let cap = Capacity { b: 10, p: 10, risk: None };
        assert!(knapsack_select(&[it(0.0, 1, 1), it(-1.0, 1, 1)], &cap).is_empty());
    }
}
