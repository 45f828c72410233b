use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::values::{LinkQuality, Position2D, Subchannels, ValueWeights};

pub type MuId = usize;
pub type BsId = usize;
pub type TargetId = usize;
pub type CoalitionId = usize;

/// A trading party on the buyer side: a single user buying communication, or
/// a coalition buying a shared sensing service.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClientId {
    Mu(MuId),
    Coalition(CoalitionId),
}

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClientId::Mu(i) => write!(f, "mu{i}"),
            ClientId::Coalition(k) => write!(f, "coalition{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobileUser {
    pub id: MuId,
    pub location: Position2D,
    pub target: TargetId,
    /// Minimum rate, bit/s.
    pub rate_req: f64,
    /// Minimum sensing accuracy (inverse PEB).
    pub sensing_req: f64,
    pub n_rx: u32,
    /// Probability of showing up for a contracted transaction.
    pub part_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: BsId,
    pub location: Position2D,
    pub bandwidth: Subchannels,
    /// Total transmit power, W.
    pub power: f64,
    pub n_tx: u32,
    pub overbook_b: f64,
    pub overbook_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingTarget {
    pub id: TargetId,
    pub location: Position2D,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coalition {
    pub id: CoalitionId,
    pub target: TargetId,
    pub members: Vec<MuId>,
}

/// How users requesting sensing are grouped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionMode {
    /// One coalition per sensing target.
    #[default]
    ByTarget,
    /// Every user trades sensing alone.
    Singleton,
}

/// Groups users into coalitions. Users sharing a target form one coalition,
/// ordered by target id; members are sorted.
pub fn form_coalitions(users: &[MobileUser], mode: CoalitionMode) -> Vec<Coalition> {
    match mode {
        CoalitionMode::Singleton => {
            users.iter().enumerate().map(|(k, u)| Coalition { id: k, target: u.target, members: vec![u.id] }).collect()
        }
        CoalitionMode::ByTarget => {
            let mut by_target: std::collections::BTreeMap<TargetId, Vec<MuId>> = Default::default();
            for u in users {
                by_target.entry(u.target).or_default().push(u.id);
            }
            by_target
                .into_iter()
                .enumerate()
                .map(|(k, (target, mut members))| {
                    members.sort_unstable();
                    Coalition { id: k, target, members }
                })
                .collect()
        }
    }
}

/// Everything the trading layer needs to know about a population of users and
/// base stations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Market {
    pub users: Vec<MobileUser>,
    pub base_stations: Vec<BaseStation>,
    pub coalitions: Vec<Coalition>,
    /// Row-major `users x base_stations`.
    pub links: Vec<LinkQuality>,
    pub weights: ValueWeights,
    pub b0: f64,
}

impl Market {
    pub fn new(
        users: Vec<MobileUser>,
        base_stations: Vec<BaseStation>,
        coalitions: Vec<Coalition>,
        links: Vec<LinkQuality>,
        weights: ValueWeights,
        b0: f64,
    ) -> Result<Self> {
        let m = Self { users, base_stations, coalitions, links, weights, b0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if !(self.b0 > 0.0) {
            return Err(Error::arg("b0 must be positive"));
        }
        if self.links.len() != self.users.len() * self.base_stations.len() {
            return Err(Error::arg(format!(
                "link table has {} entries, expected {}",
                self.links.len(),
                self.users.len() * self.base_stations.len()
            )));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.id != i {
                return Err(Error::arg(format!("user at index {i} has id {}", u.id)));
            }
            if !(0.0..=1.0).contains(&u.part_prob) {
                return Err(Error::arg(format!("user {i}: participation probability {} outside [0, 1]", u.part_prob)));
            }
        }
        for (j, b) in self.base_stations.iter().enumerate() {
            if b.id != j {
                return Err(Error::arg(format!("base station at index {j} has id {}", b.id)));
            }
            if b.bandwidth.0 == 0 || !(b.power > 0.0) {
                return Err(Error::arg(format!("base station {j} has no supply")));
            }
            if !(b.overbook_b >= 0.0) || !(b.overbook_p >= 0.0) {
                return Err(Error::arg(format!("base station {j}: overbooking rates must be >= 0")));
            }
        }
        let mut seen = vec![false; self.users.len()];
        for (k, c) in self.coalitions.iter().enumerate() {
            if c.id != k {
                return Err(Error::arg(format!("coalition at index {k} has id {}", c.id)));
            }
            if c.members.is_empty() {
                return Err(Error::arg(format!("coalition {k} is empty")));
            }
            for &m in &c.members {
                if m >= self.users.len() {
                    return Err(Error::arg(format!("coalition {k} references unknown user {m}")));
                }
                if seen[m] {
                    return Err(Error::arg(format!("user {m} belongs to more than one coalition")));
                }
                seen[m] = true;
                if self.users[m].target != c.target {
                    return Err(Error::arg(format!("user {m} in coalition {k} senses a different target")));
                }
            }
        }
        Ok(())
    }

    pub fn link(&self, mu: MuId, bs: BsId) -> &LinkQuality {
        &self.links[mu * self.base_stations.len() + bs]
    }

    /// Communication value of `bandwidth` and `power` for user `mu` at `bs`.
    pub fn comm_value(&self, mu: MuId, bs: BsId, bandwidth: Subchannels, power: f64) -> f64 {
        let b = bandwidth.hz(self.b0);
        let snr = self.b0 * power * self.link(mu, bs).xi / b;
        self.weights.omega1 * b * (1.0 + snr).log2()
    }

    pub fn comm_rate(&self, mu: MuId, bs: BsId, bandwidth: Subchannels, power: f64) -> f64 {
        let b = bandwidth.hz(self.b0);
        b * (1.0 + self.b0 * power * self.link(mu, bs).xi / b).log2()
    }

    /// Largest `kappa` among the coalition's members at `bs`; the member
    /// holding it senses on behalf of the group.
    pub fn representative_kappa(&self, coalition: CoalitionId, bs: BsId) -> f64 {
        self.coalitions[coalition].members.iter().map(|&m| self.link(m, bs).kappa).fold(0.0, f64::max)
    }

    /// Representative sensing value `V^max` of a coalition.
    pub fn sensing_vmax(&self, coalition: CoalitionId, bs: BsId, bandwidth: Subchannels, power: f64) -> f64 {
        crate::values::sensing_value(
            power,
            bandwidth.hz(self.b0),
            self.representative_kappa(coalition, bs),
            &self.weights,
        )
    }

    /// Total sensing value of a coalition, `|c| * V^max`.
    pub fn sensing_value_total(&self, coalition: CoalitionId, bs: BsId, bandwidth: Subchannels, power: f64) -> f64 {
        self.coalitions[coalition].members.len() as f64 * self.sensing_vmax(coalition, bs, bandwidth, power)
    }

    pub fn sensing_accuracy(&self, coalition: CoalitionId, bs: BsId, bandwidth: Subchannels, power: f64) -> f64 {
        crate::values::sensing_accuracy(
            power,
            bandwidth.hz(self.b0),
            self.representative_kappa(coalition, bs),
            &self.weights,
        )
    }

    /// The strictest member requirement; the shared outcome must satisfy all members.
    pub fn coalition_sensing_req(&self, coalition: CoalitionId) -> f64 {
        self.coalitions[coalition].members.iter().map(|&m| self.users[m].sensing_req).fold(0.0, f64::max)
    }

    /// Total value the client derives from a bundle.
    pub fn client_value(&self, client: ClientId, bs: BsId, bandwidth: Subchannels, power: f64) -> f64 {
        match client {
            ClientId::Mu(i) => self.comm_value(i, bs, bandwidth, power),
            ClientId::Coalition(k) => self.sensing_value_total(k, bs, bandwidth, power),
        }
    }

    /// Whether a bundle meets the client's service requirement.
    pub fn meets_requirement(&self, client: ClientId, bs: BsId, bandwidth: Subchannels, power: f64) -> bool {
        match client {
            ClientId::Mu(i) => self.comm_rate(i, bs, bandwidth, power) >= self.users[i].rate_req,
            ClientId::Coalition(k) => self.sensing_accuracy(k, bs, bandwidth, power) >= self.coalition_sensing_req(k),
        }
    }

    /// Number of users a client stands for.
    pub fn client_size(&self, client: ClientId) -> usize {
        match client {
            ClientId::Mu(_) => 1,
            ClientId::Coalition(k) => self.coalitions[k].members.len(),
        }
    }

    /// Probability that the client shows up: `a_i` for users,
    /// `1 - prod(1 - a_i)` for coalitions.
    pub fn participation(&self, client: ClientId) -> f64 {
        match client {
            ClientId::Mu(i) => self.users[i].part_prob,
            ClientId::Coalition(k) => super::expect_beta(
                &self.coalitions[k].members.iter().map(|&m| self.users[m].part_prob).collect::<Vec<_>>(),
            ),
        }
    }

    /// Every client of the market: users (communication) then coalitions (sensing).
    pub fn clients(&self) -> Vec<ClientId> {
        self.users
            .iter()
            .map(|u| ClientId::Mu(u.id))
            .chain(self.coalitions.iter().map(|c| ClientId::Coalition(c.id)))
            .collect()
    }

    /// Nominal overbooked capacity of a base station: subchannels and watts.
    pub fn nominal_capacity(&self, bs: BsId) -> (f64, f64) {
        let b = &self.base_stations[bs];
        (f64::from(b.bandwidth.0) * (1.0 + b.overbook_b), b.power * (1.0 + b.overbook_p))
    }

    pub fn set_overbooking(&mut self, ob: f64, op: f64) {
        for b in &mut self.base_stations {
            b.overbook_b = ob;
            b.overbook_p = op;
        }
    }
}
