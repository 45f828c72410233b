//! Physical-layer valuation of ISAC resources.
//!
//! Communication is valued through the Shannon rate over `B` Hz split into
//! subchannels of width `b0`; sensing through the inverse position error bound,
//! which scales with `sqrt(N * P)` and is abstracted as `kappa * P^w2 * B^w3`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default subchannel width in Hz.
pub const DEFAULT_B0_HZ: f64 = 180_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A bandwidth allocation counted in subchannels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Subchannels(pub u32);

impl Subchannels {
    pub fn hz(self, b0: f64) -> f64 {
        f64::from(self.0) * b0
    }

    pub fn mhz(self, b0: f64) -> f64 {
        self.hz(b0) / 1e6
    }

    /// Converts a Hz amount that must be a positive integer multiple of `b0`.
    pub fn from_hz(hz: f64, b0: f64) -> Result<Self> {
        let n = subchannel_count(hz, b0)?;
        Ok(Subchannels(n))
    }

    /// Largest whole number of subchannels fitting in `hz`.
    pub fn floor_hz(hz: f64, b0: f64) -> Self {
        Subchannels((hz / b0 + 1e-9).floor().max(0.0) as u32)
    }
}

fn subchannel_count(hz: f64, b0: f64) -> Result<u32> {
    if !(b0 > 0.0) || !b0.is_finite() {
        return Err(Error::arg(format!("subchannel width must be positive, got {b0}")));
    }
    if !(hz > 0.0) || !hz.is_finite() {
        return Err(Error::arg(format!("bandwidth must be positive, got {hz}")));
    }
    let n = (hz / b0).round();
    if n < 1.0 || (n * b0 - hz).abs() > 1e-9 * hz.max(b0) || n > f64::from(u32::MAX) {
        return Err(Error::arg(format!("bandwidth {hz} Hz is not a positive integer multiple of {b0} Hz")));
    }
    Ok(n as u32)
}

/// Per (user, base station) link parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkQuality {
    /// Normalized channel gain `G * d^-gamma / sigma^2`.
    pub xi: f64,
    /// Sensing efficiency `theta / zeta`.
    pub kappa: f64,
    /// PEB coefficient in `PEB = zeta / sqrt(N P)`.
    pub zeta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueWeights {
    /// Value per bit/s of rate.
    pub omega1: f64,
    /// Power exponent of the sensing value, in [0, 1].
    pub omega2: f64,
    /// Bandwidth exponent of the sensing value, in [0, 1].
    pub omega3: f64,
    /// Value per unit of sensing accuracy.
    pub omega4: f64,
    /// Base station cost per watt delivered.
    pub omega5: f64,
}

impl ValueWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("omega1", self.omega1), ("omega4", self.omega4), ("omega5", self.omega5)] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::arg(format!("{name} must be finite and >= 0, got {w}")));
            }
        }
        for (name, w) in [("omega2", self.omega2), ("omega3", self.omega3)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::arg(format!("{name} must lie in [0, 1], got {w}")));
            }
        }
        Ok(())
    }
}

impl Default for ValueWeights {
    fn default() -> Self {
        Self { omega1: 1e-6, omega2: 0.5, omega3: 0.5, omega4: 0.5, omega5: 1.0 }
    }
}

/// Distances, round-trip delay and angles of a bistatic sensing link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingGeometry {
    pub d_mu_target: f64,
    pub d_target_bs: f64,
    /// Propagation delay MU -> target -> BS, seconds.
    pub tau: f64,
    /// Angle of departure at the BS, radians.
    pub theta: f64,
    /// Angle of arrival at the MU, radians.
    pub phi: f64,
}

/// Antenna and waveform description used by the CRLB oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrlbChannel {
    pub n_tx: u32,
    pub n_rx: u32,
    /// Reflection coefficient magnitude.
    pub h: f64,
    /// Path loss of the reflected path.
    pub rho: f64,
    /// Noise variance.
    pub sigma_s2: f64,
    /// Symbol duration, seconds.
    pub t_s: f64,
    /// Number of subchannels the waveform was configured with.
    pub n_sub: u32,
}

/// Variance coefficients and the resulting bound from the Fisher information.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrlbBound {
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta3: f64,
    pub j11: f64,
    pub j22: f64,
    pub peb: f64,
}

fn angle_from(dx: f64, dist: f64) -> f64 {
    if dist == 0.0 {
        return 0.0;
    }
    (dx / dist).clamp(-1.0, 1.0).acos()
}

pub fn compute_geometry(mu: Position2D, bs: Position2D, target: Position2D) -> SensingGeometry {
    let d_mu_target = mu.distance(&target);
    let d_target_bs = target.distance(&bs);
    let theta = angle_from(mu.x - target.x, d_mu_target);
    let phi = if d_target_bs == 0.0 { 0.0 } else { PI - angle_from(target.x - bs.x, d_target_bs) };
    SensingGeometry { d_mu_target, d_target_bs, tau: (d_mu_target + d_target_bs) / SPEED_OF_LIGHT, theta, phi }
}

/// Shannon rate in bit/s for `bandwidth_hz` with transmit power `power` (W).
pub fn comm_rate(bandwidth_hz: f64, power: f64, xi: f64, b0: f64) -> Result<f64> {
    subchannel_count(bandwidth_hz, b0)?;
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::arg(format!("power must be finite and >= 0, got {power}")));
    }
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::arg(format!("channel gain must be finite and >= 0, got {xi}")));
    }
    Ok(bandwidth_hz * (1.0 + b0 * power * xi / bandwidth_hz).log2())
}

pub fn comm_value(bandwidth_hz: f64, power: f64, xi: f64, b0: f64, w: &ValueWeights) -> Result<f64> {
    Ok(w.omega1 * comm_rate(bandwidth_hz, power, xi, b0)?)
}

pub fn peb_simplified(n_sub: u32, power: f64, zeta: f64) -> Result<f64> {
    if n_sub == 0 || power <= 0.0 {
        return Err(Error::UnboundedPeb { n_sub, power });
    }
    Ok(zeta / (f64::from(n_sub) * power).sqrt())
}

/// Sensing accuracy `1 / PEB` under the power-law abstraction.
pub fn sensing_accuracy(power: f64, bandwidth_hz: f64, kappa: f64, w: &ValueWeights) -> f64 {
    kappa * power.powf(w.omega2) * bandwidth_hz.powf(w.omega3)
}

pub fn sensing_value(power: f64, bandwidth_hz: f64, kappa: f64, w: &ValueWeights) -> f64 {
    w.omega4 * sensing_accuracy(power, bandwidth_hz, kappa, w)
}

/// Variance coefficients of the AoD, AoA and delay estimates.
pub fn crlb_zetas(ch: &CrlbChannel, geom: &SensingGeometry) -> Result<(f64, f64, f64)> {
    let cos_t = geom.theta.cos();
    if cos_t == 0.0 || cos_t.abs() < 1e-15 {
        return Err(Error::SingularGeometry);
    }
    if ch.n_tx == 0 || ch.n_rx == 0 || ch.n_sub == 0 || ch.h == 0.0 {
        return Err(Error::arg("CRLB channel needs nonzero antennas, subchannels and reflection"));
    }
    let nt = f64::from(ch.n_tx);
    let nr = f64::from(ch.n_rx);
    let n = f64::from(ch.n_sub);
    let base = 3.0 * ch.sigma_s2 * ch.rho;
    let h2 = ch.h * ch.h;
    let c2 = cos_t * cos_t;
    let zeta1 = base / (16.0 * PI * PI * h2 * nr * c2 * nt * (nt + 1.0) * (2.0 * nt + 1.0));
    let zeta2 = base / (16.0 * PI * PI * h2 * nt * c2 * nr * (nr + 1.0) * (2.0 * nr + 1.0));
    let zeta3 = base * n * n * ch.t_s * ch.t_s / (4.0 * PI * PI * h2 * nt * nr);
    Ok((zeta1, zeta2, zeta3))
}

/// Fisher-information diagonal and PEB for an allocation of `n_alloc`
/// subchannels at `power` watts.
///
/// The variance coefficients and the delay term's waveform factor are taken
/// at the channel's configured `n_sub`; the allocation enters only through the
/// leading `N * P` factor, so the bound is exactly proportional to
/// `1 / sqrt(n_alloc * power)`.
pub fn crlb_fim(ch: &CrlbChannel, geom: &SensingGeometry, power: f64, n_alloc: u32) -> Result<CrlbBound> {
    if n_alloc == 0 || power <= 0.0 {
        return Err(Error::UnboundedPeb { n_sub: n_alloc, power });
    }
    let (zeta1, zeta2, zeta3) = crlb_zetas(ch, geom)?;
    if geom.d_mu_target == 0.0 || geom.d_target_bs == 0.0 {
        return Err(Error::SingularGeometry);
    }
    let n_ref = f64::from(ch.n_sub);
    let delay = (n_ref + 1.0) * (2.0 * n_ref + 1.0) / (zeta3 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    let (st, ct) = geom.theta.sin_cos();
    let (sp, cp) = geom.phi.sin_cos();
    let d1 = geom.d_mu_target;
    let d2 = geom.d_target_bs;
    let scale = power * f64::from(n_alloc);
    let j11 = scale * (st * st / (zeta1 * d2 * d2) + ct * ct / (zeta2 * d1 * d1) + (ct + cp).powi(2) * delay);
    let j22 = scale * (ct * ct / (zeta1 * d2 * d2) + st * st / (zeta2 * d1 * d1) + (st + sp).powi(2) * delay);
    if !(j11 > 0.0) || !(j22 > 0.0) {
        return Err(Error::SingularGeometry);
    }
    Ok(CrlbBound { zeta1, zeta2, zeta3, j11, j22, peb: (1.0 / j11 + 1.0 / j22).sqrt() })
}

/// Bound at the channel's own subchannel count.
pub fn crlb_zeta_oracle(ch: &CrlbChannel, geom: &SensingGeometry, power: f64) -> Result<CrlbBound> {
    crlb_fim(ch, geom, power, ch.n_sub)
}

/// Back-fits `zeta` so that `zeta / sqrt(N P)` reproduces the oracle bound.
pub fn fit_zeta(ch: &CrlbChannel, geom: &SensingGeometry, power: f64) -> Result<f64> {
    let b = crlb_zeta_oracle(ch, geom, power)?;
    Ok(b.peb * (f64::from(ch.n_sub) * power).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn geometry_of_the_3_4_5_triangle() {
        let g = compute_geometry(Position2D::new(0.0, 0.0), Position2D::new(3.0, 0.0), Position2D::new(3.0, 4.0));
        assert_eq!(g.d_mu_target, 5.0);
        assert_eq!(g.d_target_bs, 4.0);
        assert!(close(g.tau, 9.0 / SPEED_OF_LIGHT, 1e-15));
        assert!(close(g.theta, (-0.6f64).acos(), 1e-12));
        assert!(close(g.theta, 2.2143, 1e-4));
        // target directly above the BS: arccos(0) = pi/2, so phi = pi/2
        assert!(close(g.phi, PI / 2.0, 1e-12));
    }

    #[test]
    fn coincident_points_give_zero_angles() {
        let p = Position2D::new(1.0, 1.0);
        let g = compute_geometry(p, p, p);
        assert_eq!(g.theta, 0.0);
        assert_eq!(g.phi, 0.0);
        assert_eq!(g.tau, 0.0);
    }

    #[test]
    fn rate_of_one_subchannel_at_unit_snr() {
        // B = b0, b0 * P * xi / B = 1  =>  R = b0 * log2(2) = b0
        let r = comm_rate(180e3, 1.0, 1.0 / 180e3 * 180e3, 180e3).unwrap();
        assert!(close(r, 180e3, 1e-12));
        let w = ValueWeights { omega1: 2.0, ..Default::default() };
        assert!(close(comm_value(180e3, 1.0, 1.0, 180e3, &w).unwrap(), 360e3, 1e-12));
    }

    #[test]
    fn rate_rejects_fractional_subchannels() {
        assert!(matches!(comm_rate(200e3, 1.0, 1.0, 180e3), Err(Error::InvalidArgument(_))));
        assert!(matches!(comm_rate(0.0, 1.0, 1.0, 180e3), Err(Error::InvalidArgument(_))));
        assert!(comm_rate(360e3, 1.0, 1.0, 180e3).is_ok());
    }

    #[test]
    fn sensing_value_square_roots() {
        let w = ValueWeights { omega2: 0.5, omega3: 0.5, omega4: 1.0, ..Default::default() };
        assert!(close(sensing_value(4.0, 9.0, 1.0, &w), 6.0, 1e-12));
    }

    #[test]
    fn peb_simplified_values_and_errors() {
        assert!(close(peb_simplified(4, 4.0, 8.0).unwrap(), 2.0, 1e-15));
        assert!(matches!(peb_simplified(0, 1.0, 1.0), Err(Error::UnboundedPeb { .. })));
        assert!(matches!(peb_simplified(3, 0.0, 1.0), Err(Error::UnboundedPeb { .. })));
    }

    fn channel() -> CrlbChannel {
        CrlbChannel { n_tx: 8, n_rx: 4, h: 0.8, rho: 1e-6, sigma_s2: 1e-3, t_s: 1e-7, n_sub: 16 }
    }

    #[test]
    fn oracle_matches_fitted_simplified_bound() {
        let g = compute_geometry(Position2D::new(10.0, 5.0), Position2D::new(-40.0, 20.0), Position2D::new(30.0, 60.0));
        let ch = channel();
        let zeta = fit_zeta(&ch, &g, 2.0).unwrap();
        let oracle = crlb_zeta_oracle(&ch, &g, 2.0).unwrap().peb;
        let simple = peb_simplified(ch.n_sub, 2.0, zeta).unwrap();
        assert!(close(oracle, simple, 1e-9));
    }

    #[test]
    fn oracle_rejects_vertical_departure() {
        // mu directly above target: x difference 0, theta = pi/2
        let g = compute_geometry(Position2D::new(0.0, 10.0), Position2D::new(5.0, 0.0), Position2D::new(0.0, 0.0));
        assert!(matches!(crlb_zeta_oracle(&channel(), &g, 1.0), Err(Error::SingularGeometry)));
    }

    #[test]
    fn subchannels_from_hz() {
        assert_eq!(Subchannels::from_hz(900e3, 180e3).unwrap(), Subchannels(5));
        assert!(Subchannels::from_hz(1e6, 180e3).is_err());
        assert_eq!(Subchannels::floor_hz(1e6, 180e3), Subchannels(5));
    }
}
