//! Choosing which present contract holders step aside when realized demand
//! exceeds what a base station can actually deliver.

use serde::{Deserialize, Serialize};

use super::entities::ClientId;

/// Resources one present contract holder needs, and what it costs the BS to turn it away.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub client: ClientId,
    /// Subchannels.
    pub bandwidth: u32,
    pub power: f64,
    pub pel_s: f64,
}

pub trait VolunteerPolicy: Sync {
    /// Returns the clients to turn away, in removal order. After removal the
    /// remaining demand must fit `supply_b` subchannels and `supply_p` watts.
    fn select(&self, supply_b: u32, supply_p: f64, demands: &[Demand]) -> Vec<ClientId>;
}

/// Removes the client with the cheapest compensation per unit of binding
/// resource freed, recomputing which resources bind after every removal.
/// Volunteers that later removals made unnecessary are then reinstated,
/// most expensive first.
#[derive(Clone, Copy, Debug, Default)]
pub struct CheapestCompensation;

const POWER_EPS: f64 = 1e-9;

impl VolunteerPolicy for CheapestCompensation {
    fn select(&self, supply_b: u32, supply_p: f64, demands: &[Demand]) -> Vec<ClientId> {
        let mut removed = vec![false; demands.len()];
        let mut out = Vec::new();
        let mut total_b: u64 = demands.iter().map(|d| u64::from(d.bandwidth)).sum();
        let mut total_p: f64 = demands.iter().map(|d| d.power).sum();
        loop {
            let over_b = total_b > u64::from(supply_b);
            let over_p = total_p > supply_p + POWER_EPS * supply_p.max(1.0);
            if !over_b && !over_p {
                break;
            }
            let mut best: Option<(usize, f64)> = None;
            for (i, d) in demands.iter().enumerate() {
                if removed[i] {
                    continue;
                }
                let mut freed: f64 = 0.0;
                if over_b {
                    freed = freed.max(f64::from(d.bandwidth) / f64::from(supply_b.max(1)));
                }
                if over_p {
                    freed = freed.max(d.power / supply_p.max(f64::MIN_POSITIVE));
                }
                if freed <= 0.0 {
                    continue;
                }
                let score = d.pel_s / freed;
                let better = match best {
                    None => true,
                    Some((j, s)) => score < s || (score == s && d.client < demands[j].client),
                };
                if better {
                    best = Some((i, score));
                }
            }
            let Some((i, _)) = best else { break };
            removed[i] = true;
            total_b -= u64::from(demands[i].bandwidth);
            total_p -= demands[i].power;
            out.push(i);
        }
        let mut back: Vec<usize> = out.clone();
        back.sort_by(|&a, &b| {
            demands[b].pel_s.total_cmp(&demands[a].pel_s).then(demands[a].client.cmp(&demands[b].client))
        });
        for i in back {
            let b = total_b + u64::from(demands[i].bandwidth);
            let p = total_p + demands[i].power;
            if b <= u64::from(supply_b) && p <= supply_p + POWER_EPS * supply_p.max(1.0) {
                removed[i] = false;
                total_b = b;
                total_p = p;
            }
        }
        out.into_iter().filter(|&i| removed[i]).map(|i| demands[i].client).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(id: usize, b: u32, p: f64, pel_s: f64) -> Demand {
        Demand { client: ClientId::Mu(id), bandwidth: b, power: p, pel_s }
    }

    #[test]
    fn fits_means_nobody() {
        assert!(CheapestCompensation.select(10, 10.0, &[d(0, 5, 5.0, 1.0), d(1, 5, 5.0, 1.0)]).is_empty());
    }

    #[test]
    fn cheaper_compensation_volunteers() {
        let v = CheapestCompensation.select(10, 100.0, &[d(0, 6, 1.0, 5.0), d(1, 6, 1.0, 2.0)]);
        assert_eq!(v, vec![ClientId::Mu(1)]);
    }

    #[test]
    fn power_only_overdemand_ranks_by_power() {
        // bandwidth fits; power 12 > 10. client 0 frees 8 W for 4, client 1 frees 4 W for 3
        // scores: 4 / 0.8 = 5 and 3 / 0.4 = 7.5, so client 0 goes even though it pays more
        let v = CheapestCompensation.select(100, 10.0, &[d(0, 90, 8.0, 4.0), d(1, 1, 4.0, 3.0)]);
        assert_eq!(v, vec![ClientId::Mu(0)]);
    }

    #[test]
    fn unneeded_volunteers_are_reinstated() {
        // the cheap small client goes first, then the 60-subchannel one alone suffices
        let v = CheapestCompensation.select(100, 100.0, &[d(0, 60, 1.0, 3.0), d(1, 60, 1.0, 6.0), d(2, 10, 1.0, 0.3)]);
        assert_eq!(v, vec![ClientId::Mu(0)]);
    }

    #[test]
    fn ties_fall_to_lower_id() {
        let v = CheapestCompensation.select(10, 100.0, &[d(3, 6, 1.0, 2.0), d(1, 6, 1.0, 2.0)]);
        assert_eq!(v, vec![ClientId::Mu(1)]);
    }
}
