//! Synthetic and EUA-style scenario construction.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::market::{
    form_coalitions, BaseStation, CoalitionMode, ContractBounds, Market, MobileUser, PenaltyTerms, RiskThresholds,
    SensingTarget,
};
use crate::matching::{EngineConfig, ReservePrice, ResourceGrid, VmaxEstimate, VolunteerEstimate};
use crate::values::{
    compute_geometry, fit_zeta, CrlbChannel, LinkQuality, Position2D, Subchannels, ValueWeights, DEFAULT_B0_HZ,
};

/// Where each link's sensing capability comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KappaSource {
    /// Drawn uniformly from `[lo, hi]`.
    Range { lo: f64, hi: f64 },
    /// `theta / zeta` with `theta ~ U[0, 1]` and `zeta` fitted from the
    /// CRLB of the link geometry.
    Crlb,
}

/// Channel parameters for the CRLB fit. Antenna counts come from the
/// entities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrlbSettings {
    pub h: f64,
    pub rho: f64,
    pub sigma_s2: f64,
    pub t_s: f64,
    pub n_sub: u32,
    /// Power at which zeta is fitted, W. The fit is exact at any power.
    pub fit_power: f64,
}

impl Default for CrlbSettings {
    fn default() -> Self {
        Self { h: 1.0, rho: 1.0, sigma_s2: 1e-3, t_s: 1.0 / DEFAULT_B0_HZ, n_sub: 50, fit_power: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n_mus: usize,
    pub n_bss: usize,
    pub n_targets: usize,
    /// Side of the square deployment area, m.
    pub area_m: f64,
    pub b0_hz: f64,
    pub part_prob: (f64, f64),
    pub n_tx: (u32, u32),
    pub n_rx: (u32, u32),
    pub bandwidth_mhz: (f64, f64),
    pub power_dbw: (f64, f64),
    /// bit/s.
    pub rate_req: (f64, f64),
    pub sensing_req: (f64, f64),
    /// Gain-to-noise ratio at 1 m; `xi = gain * d^-exponent`.
    pub channel_gain: f64,
    pub path_loss_exp: f64,
    /// Distances are clamped to at least this many metres.
    pub min_distance_m: f64,
    pub kappa: KappaSource,
    pub crlb: CrlbSettings,
    pub weights: ValueWeights,
    pub trading: TradingConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_mus: 60,
            n_bss: 5,
            n_targets: 8,
            area_m: 800.0,
            b0_hz: DEFAULT_B0_HZ,
            part_prob: (0.64, 0.96),
            n_tx: (8, 16),
            n_rx: (4, 8),
            bandwidth_mhz: (80.0, 120.0),
            power_dbw: (10.0, 20.0),
            rate_req: (0.01, 10.0),
            sensing_req: (1.0, 100.0),
            channel_gain: 1e9,
            path_loss_exp: 2.5,
            min_distance_m: 1.0,
            kappa: KappaSource::Range { lo: 0.002, hi: 0.02 },
            crlb: CrlbSettings::default(),
            weights: ValueWeights::default(),
            trading: TradingConfig::default(),
        }
    }
}

fn check_range<T: PartialOrd + Copy + std::fmt::Display>(name: &str, r: (T, T)) -> Result<()> {
    if r.0 > r.1 {
        return Err(Error::arg(format!("{name}: lower bound {} exceeds upper bound {}", r.0, r.1)));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("part_prob", self.part_prob)?;
        check_range("n_tx", self.n_tx)?;
        check_range("n_rx", self.n_rx)?;
        check_range("bandwidth_mhz", self.bandwidth_mhz)?;
        check_range("power_dbw", self.power_dbw)?;
        check_range("rate_req", self.rate_req)?;
        check_range("sensing_req", self.sensing_req)?;
        if self.part_prob.0 < 0.0 || self.part_prob.1 > 1.0 {
            return Err(Error::arg("part_prob must lie in [0, 1]"));
        }
        if self.n_bss == 0 {
            return Err(Error::arg("need at least one base station"));
        }
        if self.n_targets == 0 && self.n_mus > 0 {
            return Err(Error::arg("users need at least one sensing target"));
        }
        if !(self.area_m > 0.0) || !(self.b0_hz > 0.0) || !(self.channel_gain > 0.0) || !(self.min_distance_m > 0.0) {
            return Err(Error::arg("area, b0, channel gain and minimum distance must be positive"));
        }
        if self.n_tx.0 == 0 || self.n_rx.0 == 0 {
            return Err(Error::arg("antenna counts must be at least 1"));
        }
        if self.bandwidth_mhz.0 * 1e6 < self.b0_hz {
            return Err(Error::arg("base station bandwidth must cover at least one subchannel"));
        }
        if let KappaSource::Range { lo, hi } = self.kappa {
            check_range("kappa", (lo, hi))?;
            if lo < 0.0 {
                return Err(Error::arg("kappa must be >= 0"));
            }
        }
        self.weights.validate()?;
        self.trading.validate()
    }
}

/// Market-mechanism parameters shared by every strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TradingConfig {
    pub bounds: ContractBounds,
    /// Bandwidth grid step, subchannels.
    pub b_step: u32,
    /// Power grid step, W.
    pub p_step: f64,
    pub reserve: ReservePrice,
    pub penalties: PenaltyTerms,
    pub risk: RiskThresholds,
    /// Overbooking rate for strategies that overbook, both resources.
    pub overbooking: f64,
    /// `None` uses 1% of the mean reserve price.
    pub bid_step: Option<f64>,
    pub volunteers: VolunteerEstimate,
    pub vmax: VmaxEstimate,
    pub engine: EngineConfig,
    pub interaction: InteractionModel,
}

impl Default for TradingConfig {
    fn default() -> Self {
        Self {
            bounds: ContractBounds { b_min: Subchannels(20), b_max: Subchannels(100), p_min: 0.5, p_max: 2.0 },
            b_step: 20,
            p_step: 0.5,
            reserve: ReservePrice::default(),
            penalties: PenaltyTerms::default(),
            risk: RiskThresholds::default(),
            overbooking: 0.2,
            bid_step: None,
            volunteers: VolunteerEstimate { exact_limit: 12, ..VolunteerEstimate::default() },
            vmax: VmaxEstimate::default(),
            engine: EngineConfig::default(),
            interaction: InteractionModel::default(),
        }
    }
}

impl TradingConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.risk.validate()?;
        if !(self.overbooking >= 0.0) {
            return Err(Error::arg("overbooking rate must be >= 0"));
        }
        if self.penalties.pel_u_frac < 0.0 || self.penalties.pel_s_frac < 0.0 {
            return Err(Error::arg("penalty fractions must be >= 0"));
        }
        if let Some(s) = self.bid_step {
            if !(s > 0.0) {
                return Err(Error::arg("bid step must be positive"));
            }
        }
        check_range("interaction delay", self.interaction.delay_ms)?;
        check_range("MU transmit power", self.interaction.mu_power_w)?;
        check_range("BS transmit power", self.interaction.bs_power_w)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<ResourceGrid> {
        ResourceGrid::new(&self.bounds, self.b_step, self.p_step)
    }
}

/// Cost of one negotiation message: a delay and the sender's transmit power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionModel {
    pub delay_ms: (f64, f64),
    pub mu_power_w: (f64, f64),
    pub bs_power_w: (f64, f64),
}

impl Default for InteractionModel {
    fn default() -> Self {
        Self { delay_ms: (1.0, 15.0), mu_power_w: (0.2, 0.4), bs_power_w: (6.0, 20.0) }
    }
}

/// A fully drawn population plus the mechanism parameters it is traded under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub seed: u64,
    pub b0_hz: f64,
    pub weights: ValueWeights,
    pub trading: TradingConfig,
    pub users: Vec<MobileUser>,
    /// Overbooking rates are zero here; strategies set their own.
    pub base_stations: Vec<BaseStation>,
    pub targets: Vec<SensingTarget>,
    /// Row-major `users x base_stations`.
    pub links: Vec<LinkQuality>,
}

impl Scenario {
    /// Market view with the given coalition structure and overbooking rate.
    pub fn market(&self, mode: CoalitionMode, overbooking: f64) -> Result<Market> {
        let mut m = Market::new(
            self.users.clone(),
            self.base_stations.clone(),
            form_coalitions(&self.users, mode),
            self.links.clone(),
            self.weights,
            self.b0_hz,
        )?;
        m.set_overbooking(overbooking, overbooking);
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.trading.validate()?;
        for u in &self.users {
            if u.target >= self.targets.len() {
                return Err(Error::arg(format!("user {} senses unknown target {}", u.id, u.target)));
            }
        }
        self.market(CoalitionMode::Singleton, 0.0).map(|_| ())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read scenario {}: {e}", path.display())))?;
        let s: Scenario = serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("{}: invalid scenario: {e}", path.display())))?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn bs_layout(n: usize, area: f64, rng: &mut ChaCha8Rng) -> Vec<Position2D> {
    let corners_center = [(0.0, 0.0), (area, 0.0), (0.0, area), (area, area), (area / 2.0, area / 2.0)];
    match n {
        5 => corners_center.iter().map(|&(x, y)| Position2D::new(x, y)).collect(),
        7 => corners_center
            .iter()
            .chain(&[(area / 2.0, 0.0), (area / 2.0, area)])
            .map(|&(x, y)| Position2D::new(x, y))
            .collect(),
        _ => (0..n).map(|_| uniform_point(rng, (0.0, area), (0.0, area))).collect(),
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, xr: (f64, f64), yr: (f64, f64)) -> Position2D {
    Position2D::new(rng.gen_range(xr.0..=xr.1), rng.gen_range(yr.0..=yr.1))
}

fn draw_bs(cfg: &ScenarioConfig, id: usize, location: Position2D, rng: &mut ChaCha8Rng) -> BaseStation {
    let mhz = rng.gen_range(cfg.bandwidth_mhz.0..=cfg.bandwidth_mhz.1);
    let dbw = rng.gen_range(cfg.power_dbw.0..=cfg.power_dbw.1);
    BaseStation {
        id,
        location,
        bandwidth: Subchannels::floor_hz(mhz * 1e6, cfg.b0_hz),
        power: 10f64.powf(dbw / 10.0),
        n_tx: rng.gen_range(cfg.n_tx.0..=cfg.n_tx.1),
        overbook_b: 0.0,
        overbook_p: 0.0,
    }
}

fn draw_user(cfg: &ScenarioConfig, id: usize, location: Position2D, rng: &mut ChaCha8Rng) -> MobileUser {
    MobileUser {
        id,
        location,
        target: rng.gen_range(0..cfg.n_targets),
        rate_req: rng.gen_range(cfg.rate_req.0..=cfg.rate_req.1),
        sensing_req: rng.gen_range(cfg.sensing_req.0..=cfg.sensing_req.1),
        n_rx: rng.gen_range(cfg.n_rx.0..=cfg.n_rx.1),
        part_prob: rng.gen_range(cfg.part_prob.0..=cfg.part_prob.1),
    }
}

fn draw_links(
    cfg: &ScenarioConfig,
    users: &[MobileUser],
    bss: &[BaseStation],
    targets: &[SensingTarget],
    rng: &mut ChaCha8Rng,
) -> Vec<LinkQuality> {
    let mut links = Vec::with_capacity(users.len() * bss.len());
    for u in users {
        for b in bss {
            let d = u.location.distance(&b.location).max(cfg.min_distance_m);
            let xi = cfg.channel_gain * d.powf(-cfg.path_loss_exp);
            let ch = CrlbChannel {
                n_tx: b.n_tx,
                n_rx: u.n_rx,
                h: cfg.crlb.h,
                rho: cfg.crlb.rho,
                sigma_s2: cfg.crlb.sigma_s2,
                t_s: cfg.crlb.t_s,
                n_sub: cfg.crlb.n_sub,
            };
            let geom = compute_geometry(u.location, b.location, targets[u.target].location);
            // A degenerate geometry gives no usable position fix.
            let zeta = fit_zeta(&ch, &geom, cfg.crlb.fit_power).unwrap_or(f64::INFINITY);
            let kappa = match cfg.kappa {
                KappaSource::Range { lo, hi } => rng.gen_range(lo..=hi),
                KappaSource::Crlb => rng.gen::<f64>() / zeta,
            };
            links.push(LinkQuality { xi, kappa, zeta });
        }
    }
    links
}

/// Draws a scenario in the square deployment area. Five and seven stations
/// use fixed symmetric layouts; other counts are placed uniformly.
pub fn gen_synthetic(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = (0.0, cfg.area_m);
    let bss: Vec<BaseStation> = bs_layout(cfg.n_bss, cfg.area_m, &mut rng)
        .into_iter()
        .enumerate()
        .map(|(j, p)| draw_bs(cfg, j, p, &mut rng))
        .collect();
    let targets: Vec<SensingTarget> =
        (0..cfg.n_targets).map(|id| SensingTarget { id, location: uniform_point(&mut rng, area, area) }).collect();
    let users: Vec<MobileUser> = (0..cfg.n_mus)
        .map(|i| {
            let p = uniform_point(&mut rng, area, area);
            draw_user(cfg, i, p, &mut rng)
        })
        .collect();
    let links = draw_links(cfg, &users, &bss, &targets, &mut rng);
    let s = Scenario {
        id: format!("syn-{}bs-{}mu-{seed}", cfg.n_bss, cfg.n_mus),
        seed,
        b0_hz: cfg.b0_hz,
        weights: cfg.weights,
        trading: cfg.trading.clone(),
        users,
        base_stations: bss,
        targets,
        links,
    };
    s.validate()?;
    Ok(s)
}

const EARTH_RADIUS_M: f64 = 6_371_000.0;

fn read_lat_lon(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(lat), Some(lon)) = (find("latitude"), find("longitude")) else {
        return Err(Error::Input(format!("{}: needs LATITUDE and LONGITUDE columns", path.display())));
    };
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        // Line 1 is the header.
        let line = k as u64 + 2;
        let parse_err = |msg: String| Error::Parse { path: path.display().to_string(), line, msg };
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = rec.get(i).ok_or_else(|| parse_err(format!("missing {name}")))?;
            raw.parse::<f64>().map_err(|_| parse_err(format!("{name} {raw:?} is not a number")))
        };
        let (la, lo) = (field(lat, "latitude")?, field(lon, "longitude")?);
        if !(-90.0..=90.0).contains(&la) || !(-180.0..=180.0).contains(&lo) {
            return Err(parse_err(format!("coordinates ({la}, {lo}) out of range")));
        }
        out.push((la, lo));
    }
    if out.is_empty() {
        return Err(Error::Input(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

/// Builds a scenario from EUA-style site and user tables. `cfg.n_mus`
/// users are drawn from the user file without replacement (all of them if
/// the file has fewer); every site becomes a base station. Coordinates are
/// projected to metres about the centroid and targets are placed uniformly
/// over the bounding box.
pub fn load_eua(bs_file: &Path, user_file: &Path, cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    let sites = read_lat_lon(bs_file)?;
    let all_users = read_lat_lon(user_file)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.n_mus.min(all_users.len());
    let mut picked: Vec<usize> = sample(&mut rng, all_users.len(), n).into_vec();
    picked.sort_unstable();
    let chosen: Vec<(f64, f64)> = picked.iter().map(|&i| all_users[i]).collect();

    let pts: Vec<&(f64, f64)> = sites.iter().chain(&chosen).collect();
    let lat0 = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let lon0 = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let project = |&(la, lo): &(f64, f64)| {
        Position2D::new(
            EARTH_RADIUS_M * (lo - lon0).to_radians() * lat0.to_radians().cos(),
            EARTH_RADIUS_M * (la - lat0).to_radians(),
        )
    };
    let bs_pos: Vec<Position2D> = sites.iter().map(project).collect();
    let user_pos: Vec<Position2D> = chosen.iter().map(project).collect();
    let all: Vec<&Position2D> = bs_pos.iter().chain(&user_pos).collect();
    let xr = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let yr = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));

    let bss: Vec<BaseStation> = bs_pos.into_iter().enumerate().map(|(j, p)| draw_bs(cfg, j, p, &mut rng)).collect();
    let targets: Vec<SensingTarget> =
        (0..cfg.n_targets).map(|id| SensingTarget { id, location: uniform_point(&mut rng, xr, yr) }).collect();
    let users: Vec<MobileUser> =
        user_pos.into_iter().enumerate().map(|(i, p)| draw_user(cfg, i, p, &mut rng)).collect();
    let links = draw_links(cfg, &users, &bss, &targets, &mut rng);
    let s = Scenario {
        id: format!("eua-{}bs-{}mu-{seed}", bss.len(), users.len()),
        seed,
        b0_hz: cfg.b0_hz,
        weights: cfg.weights,
        trading: cfg.trading.clone(),
        users,
        base_stations: bss,
        targets,
        links,
    };
    s.validate()?;
    Ok(s)
}
