use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{BsId, ClientId, ContractBounds, Market};
use crate::values::Subchannels;

/// Discrete bundle space: bandwidth levels in subchannels and power levels on
/// a uniform watt grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceGrid {
    pub bandwidth: Vec<Subchannels>,
    pub power_step: f64,
    /// Power levels in units of `power_step`.
    pub power_units: Vec<u32>,
}

impl ResourceGrid {
    /// Grid spanning `bounds`, stepping bandwidth by `b_step` subchannels and
    /// power by `p_step` watts. Both minimums must sit on their grid.
    pub fn new(bounds: &ContractBounds, b_step: u32, p_step: f64) -> Result<Self> {
        if b_step == 0 || bounds.b_min.0 == 0 || bounds.b_min > bounds.b_max {
            return Err(Error::arg("bandwidth grid needs 0 < b_min <= b_max and a positive step"));
        }
        if !(p_step > 0.0) || !(bounds.p_min > 0.0) || bounds.p_min > bounds.p_max {
            return Err(Error::arg("power grid needs 0 < p_min <= p_max and a positive step"));
        }
        let lo = bounds.p_min / p_step;
        if (lo - lo.round()).abs() > 1e-9 {
            return Err(Error::arg(format!("p_min {} is not a multiple of the power step {p_step}", bounds.p_min)));
        }
        let bandwidth = (bounds.b_min.0..=bounds.b_max.0).step_by(b_step as usize).map(Subchannels).collect();
        let hi = (bounds.p_max / p_step + 1e-9).floor() as u32;
        let power_units = (lo.round() as u32..=hi).collect();
        Ok(Self { bandwidth, power_step: p_step, power_units })
    }

    pub fn power(&self, units: u32) -> f64 {
        f64::from(units) * self.power_step
    }

    pub fn len(&self) -> usize {
        self.bandwidth.len() * self.power_units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reserve prices: the opening bid for a bundle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservePrice {
    pub per_mhz: f64,
    pub per_watt: f64,
}

impl Default for ReservePrice {
    fn default() -> Self {
        Self { per_mhz: 0.5, per_watt: 1.5 }
    }
}

impl ReservePrice {
    pub fn p_min(&self, bandwidth: Subchannels, power: f64, b0: f64) -> f64 {
        self.per_mhz * bandwidth.mhz(b0) + self.per_watt * power
    }
}

/// One (BS, bandwidth, power) choice of a client, with its opening bid and value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub bs: BsId,
    pub bandwidth: Subchannels,
    pub power: f64,
    pub power_units: u32,
    pub p_min: f64,
    /// The client's total value for the bundle.
    pub value: f64,
}

/// Every bundle on `grid` at every BS in `bss` that meets the client's
/// service requirement and whose reserve price does not exceed its value.
pub fn grid_solutions(
    market: &Market,
    client: ClientId,
    bss: &[BsId],
    grid: &ResourceGrid,
    price: &ReservePrice,
) -> Vec<Solution> {
    let mut out = Vec::new();
    for &bs in bss {
        for &bw in &grid.bandwidth {
            for &pu in &grid.power_units {
                let power = grid.power(pu);
                if !market.meets_requirement(client, bs, bw, power) {
                    continue;
                }
                let value = market.client_value(client, bs, bw, power);
                let p_min = price.p_min(bw, power, market.b0);
                if p_min > value {
                    continue;
                }
                out.push(Solution { bs, bandwidth: bw, power, power_units: pu, p_min, value });
            }
        }
    }
    out
}
