//! Frequency-domain channel model: position-dependent link powers with a
//! two-region tunnel excess loss, i.i.d. Rayleigh coefficients and AWGN.
//!
//! Links are modeled per subcarrier on flat fading coefficients, redrawn
//! independently for every space-time codeword block and held constant over
//! the block's symbol periods.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Result, SimError};
use crate::scalar::{complex_gaussian, Scalar};

/// Fixed path-loss offset at the 1 m reference distance, in dB.
const REFERENCE_LOSS_DB: f64 = 32.4;
/// Tunnel: total loss accumulated over the first high-loss region.
const TUNNEL_REGION1_LOSS_DB: f64 = 15.0;
/// Tunnel: extent of the high-loss region in meters.
const TUNNEL_REGION1_LEN_M: f64 = 50.0;
/// Tunnel: waveguide attenuation beyond the first region, dB per meter.
const TUNNEL_WAVEGUIDE_DB_PER_M: f64 = 0.06;
/// Distances below the 1 m reference are treated as the reference distance,
/// which caps the received power instead of letting the log term blow up
/// when the terminal crosses the base-station position.
const MIN_DISTANCE_M: f64 = 1.0;

/// A link power in both dB and linear form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPower<T> {
    pub db: T,
    pub linear: T,
}

impl<T: Scalar> LinkPower<T> {
    pub fn from_db(db: T) -> Self {
        Self {
            db,
            linear: T::lit(10.0).powf(db / T::lit(10.0)),
        }
    }

    pub fn amplitude(&self) -> T {
        self.linear.sqrt()
    }
}

/// Additive noise level, one variance per complex dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    pub sigma2: T,
}

/// How the first tunnel region accrues its loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TunnelLossModel {
    /// Loss ramps linearly from 0 to the full region-1 value.
    #[default]
    LinearRamp,
    /// Full region-1 loss applies from the first meter.
    Step,
}

/// Received power after distance-dependent path loss:
/// `P_rx = P_tx - (32.4 + 10 a log10(d))` in dB, reference distance 1 m.
pub fn path_loss_received_power<T: Scalar>(
    ps_db: T,
    distance: T,
    alpha: T,
) -> Result<LinkPower<T>> {
    if distance <= T::zero() {
        return Err(SimError::Domain(format!(
            "path loss needs a positive distance, got {distance}"
        )));
    }
    let loss = T::lit(REFERENCE_LOSS_DB) + T::lit(10.0) * alpha * distance.log10();
    Ok(LinkPower::from_db(ps_db - loss))
}

/// Excess attenuation for a receiver `depth` meters into the tunnel.
pub fn tunnel_excess_loss<T: Scalar>(depth: T, model: TunnelLossModel) -> T {
    let region1 = T::lit(TUNNEL_REGION1_LOSS_DB);
    let region1_len = T::lit(TUNNEL_REGION1_LEN_M);
    if depth <= T::zero() {
        return T::zero();
    }
    if depth <= region1_len {
        match model {
            TunnelLossModel::LinearRamp => region1 * depth / region1_len,
            TunnelLossModel::Step => region1,
        }
    } else {
        region1 + T::lit(TUNNEL_WAVEGUIDE_DB_PER_M) * (depth - region1_len)
    }
}

/// `count` i.i.d. circularly-symmetric complex Gaussian coefficients with
/// unit average power.
pub fn draw_rayleigh<T: Scalar, R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Complex<T>> {
    (0..count).map(|_| complex_gaussian(rng, T::one())).collect()
}

/// Complex AWGN vector with variance `sigma2` per entry. `sigma2 = 0` is the
/// exact noiseless loopback mode.
pub fn awgn<T: Scalar, R: Rng + ?Sized>(
    dimension: usize,
    sigma2: T,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    if sigma2 < T::zero() {
        return Err(SimError::Domain(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    if sigma2 == T::zero() {
        return Ok(vec![Complex::new(T::zero(), T::zero()); dimension]);
    }
    Ok((0..dimension)
        .map(|_| complex_gaussian(rng, sigma2))
        .collect())
}

/// Distance inputs for one update position: everything the link budget needs.
#[derive(Debug, Clone)]
pub struct LinkGeometry<T> {
    pub d_bs_mt: T,
    pub d_bs_relay: Vec<T>,
    pub d_relay_mt: Vec<T>,
    /// Depth of the terminal inside the tunnel, if it is inside.
    pub mt_tunnel_depth: Option<T>,
}

/// Position-dependent link powers for one update position.
#[derive(Debug, Clone)]
pub struct LinkBudget<T> {
    /// Received power at each relay from the source.
    pub p_source_relay: Vec<LinkPower<T>>,
    /// Received power at the destination from the source (phase 1).
    pub p_source_dest: LinkPower<T>,
    /// Received power at the destination from each relay (phase 2).
    pub p_relay_dest: Vec<LinkPower<T>>,
}

/// Computes all link powers. Tunnel excess loss applies only to links whose
/// receive end is inside the tunnel: source->destination and
/// relay->destination while the terminal is in the tunnel.
pub fn link_budget<T: Scalar>(
    ps_db: T,
    alpha: T,
    geometry: &LinkGeometry<T>,
    tunnel_model: TunnelLossModel,
) -> Result<LinkBudget<T>> {
    let floor = T::lit(MIN_DISTANCE_M);
    let excess = geometry
        .mt_tunnel_depth
        .map_or(T::zero(), |d| tunnel_excess_loss(d, tunnel_model));

    let p_source_relay = geometry
        .d_bs_relay
        .iter()
        .map(|&d| path_loss_received_power(ps_db, d.max(floor), alpha))
        .collect::<Result<Vec<_>>>()?;

    let direct = path_loss_received_power(ps_db, geometry.d_bs_mt.max(floor), alpha)?;
    let p_source_dest = LinkPower::from_db(direct.db - excess);

    let p_relay_dest = geometry
        .d_relay_mt
        .iter()
        .map(|&d| {
            path_loss_received_power(ps_db, d.max(floor), alpha)
                .map(|p| LinkPower::from_db(p.db - excess))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LinkBudget {
        p_source_relay,
        p_source_dest,
        p_relay_dest,
    })
}

/// One block-fading draw: every coefficient i.i.d. Rayleigh, constant over
/// the symbol periods of one space-time codeword.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T> {
    /// Source -> relay coefficient, one per selected relay.
    pub h_source_relay: Vec<Complex<T>>,
    /// Source -> destination coefficient, one per receive antenna.
    pub h_source_dest: Vec<Complex<T>>,
    /// Relay -> destination coefficients, `[antenna][relay]`.
    pub h_relay_dest: Vec<Vec<Complex<T>>>,
    pub powers: LinkBudget<T>,
}

impl<T: Scalar> ChannelRealization<T> {
    pub fn draw<R: Rng + ?Sized>(
        powers: LinkBudget<T>,
        n_antennas: usize,
        rng: &mut R,
    ) -> Self {
        let n_relays = powers.p_source_relay.len();
        let h_source_relay = draw_rayleigh(n_relays, rng);
        let h_source_dest = draw_rayleigh(n_antennas, rng);
        let h_relay_dest = (0..n_antennas)
            .map(|_| draw_rayleigh(n_relays, rng))
            .collect();
        Self {
            h_source_relay,
            h_source_dest,
            h_relay_dest,
            powers,
        }
    }

    pub fn n_relays(&self) -> usize {
        self.h_source_relay.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.h_source_dest.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{derive_rng, Stream};

    #[test]
    fn path_loss_at_reference_distance() {
        let p = path_loss_received_power::<f64>(0.0, 1.0, 3.5).unwrap();
        assert!((p.db + 32.4).abs() < 1e-12);
    }

    #[test]
    fn path_loss_at_ten_meters() {
        let p = path_loss_received_power::<f64>(0.0, 10.0, 3.5).unwrap();
        assert!((p.db + 67.4).abs() < 1e-12);
    }

    #[test]
    fn path_loss_doubling_distance() {
        let alpha: f64 = 2.8;
        let p1 = path_loss_received_power(5.0, 120.0, alpha).unwrap();
        let p2 = path_loss_received_power(5.0, 240.0, alpha).unwrap();
        let expect = -10.0 * alpha * 2.0f64.log10();
        assert!((p2.db - p1.db - expect).abs() < 1e-12);
    }

    #[test]
    fn path_loss_rejects_nonpositive_distance() {
        assert!(path_loss_received_power::<f64>(0.0, 0.0, 3.5).is_err());
        assert!(path_loss_received_power::<f64>(0.0, -4.0, 3.5).is_err());
    }

    #[test]
    fn path_loss_monotone_in_distance_and_alpha() {
        let mut prev = f64::INFINITY;
        for d in [1.0, 2.0, 10.0, 55.0, 400.0, 999.0] {
            let p = path_loss_received_power::<f64>(0.0, d, 3.5).unwrap().db;
            assert!(p < prev);
            prev = p;
        }
        let a = path_loss_received_power::<f64>(0.0, 50.0, 2.0).unwrap().db;
        let b = path_loss_received_power::<f64>(0.0, 50.0, 3.5).unwrap().db;
        assert!(b < a);
    }

    #[test]
    fn tunnel_loss_region_boundaries() {
        assert_eq!(tunnel_excess_loss::<f64>(0.0, TunnelLossModel::LinearRamp), 0.0);
        let at50 = tunnel_excess_loss::<f64>(50.0, TunnelLossModel::LinearRamp);
        assert!((at50 - 15.0).abs() < 1e-12);
        let at150 = tunnel_excess_loss::<f64>(150.0, TunnelLossModel::LinearRamp);
        assert!((at150 - 21.0).abs() < 1e-12);
    }

    #[test]
    fn tunnel_loss_continuous_and_nondecreasing() {
        let mut prev: f64 = -1.0;
        for i in 0..=2000 {
            let d = i as f64 * 0.1;
            let l = tunnel_excess_loss::<f64>(d, TunnelLossModel::LinearRamp);
            assert!(l >= prev);
            prev = l;
        }
        // Continuity across the region boundary.
        let below = tunnel_excess_loss::<f64>(49.999, TunnelLossModel::LinearRamp);
        let above = tunnel_excess_loss::<f64>(50.001, TunnelLossModel::LinearRamp);
        assert!((above - below).abs() < 1e-2);
    }

    #[test]
    fn tunnel_loss_step_variant() {
        assert_eq!(tunnel_excess_loss::<f64>(0.0, TunnelLossModel::Step), 0.0);
        assert!((tunnel_excess_loss::<f64>(1.0, TunnelLossModel::Step) - 15.0).abs() < 1e-12);
        assert!((tunnel_excess_loss::<f64>(150.0, TunnelLossModel::Step) - 21.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_moments() {
        let mut rng = derive_rng(11, Stream::Frame, 0, 0);
        let n = 1_000_000;
        let h = draw_rayleigh::<f64, _>(n, &mut rng);
        let mean_pow: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean_pow - 1.0).abs() < 0.005, "E|h|^2 = {mean_pow}");
        let var_re: f64 = h.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        let var_im: f64 = h.iter().map(|z| z.im * z.im).sum::<f64>() / n as f64;
        assert!((var_re - 0.5).abs() < 0.005);
        assert!((var_im - 0.5).abs() < 0.005);
    }

    #[test]
    fn rayleigh_deterministic_per_seed() {
        let mut a = derive_rng(3, Stream::Frame, 1, 2);
        let mut b = derive_rng(3, Stream::Frame, 1, 2);
        assert_eq!(
            draw_rayleigh::<f64, _>(32, &mut a),
            draw_rayleigh::<f64, _>(32, &mut b)
        );
    }

    #[test]
    fn awgn_zero_variance_is_exactly_zero() {
        let mut rng = derive_rng(1, Stream::Frame, 0, 0);
        let v = awgn::<f64, _>(16, 0.0, &mut rng).unwrap();
        assert!(v.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }

    #[test]
    fn awgn_variance_matches() {
        let mut rng = derive_rng(2, Stream::Frame, 0, 0);
        let sigma2 = 0.37;
        let n = 1_000_000;
        let v = awgn::<f64, _>(n, sigma2, &mut rng).unwrap();
        let mean_pow: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean_pow - sigma2).abs() < 0.01 * sigma2);
    }

    #[test]
    fn awgn_independent_seeds_uncorrelated() {
        let n = 100_000;
        let mut a = derive_rng(10, Stream::Frame, 0, 0);
        let mut b = derive_rng(10, Stream::Frame, 0, 1);
        let va = awgn::<f64, _>(n, 1.0, &mut a).unwrap();
        let vb = awgn::<f64, _>(n, 1.0, &mut b).unwrap();
        let corr: f64 = va
            .iter()
            .zip(&vb)
            .map(|(x, y)| (x * y.conj()).re)
            .sum::<f64>()
            / n as f64;
        assert!(corr.abs() < 0.01, "cross-correlation {corr}");
    }

    #[test]
    fn budget_applies_tunnel_loss_to_receive_end_links_only() {
        let geo = LinkGeometry::<f64> {
            d_bs_mt: 100.0,
            d_bs_relay: vec![100.0],
            d_relay_mt: vec![100.0],
            mt_tunnel_depth: Some(150.0),
        };
        let in_tunnel = link_budget(0.0, 3.5, &geo, TunnelLossModel::LinearRamp).unwrap();
        let open = link_budget(
            0.0,
            3.5,
            &LinkGeometry {
                mt_tunnel_depth: None,
                ..geo
            },
            TunnelLossModel::LinearRamp,
        )
        .unwrap();
        // BS->relay unaffected, both destination-bound links attenuated by 21 dB.
        assert_eq!(in_tunnel.p_source_relay[0].db, open.p_source_relay[0].db);
        assert!((open.p_source_dest.db - in_tunnel.p_source_dest.db - 21.0).abs() < 1e-9);
        assert!((open.p_relay_dest[0].db - in_tunnel.p_relay_dest[0].db - 21.0).abs() < 1e-9);
    }

    #[test]
    fn budget_clamps_sub_reference_distances() {
        let geo = LinkGeometry::<f64> {
            d_bs_mt: 0.0,
            d_bs_relay: vec![0.5],
            d_relay_mt: vec![2.0],
            mt_tunnel_depth: None,
        };
        let b = link_budget(0.0, 3.5, &geo, TunnelLossModel::LinearRamp).unwrap();
        assert!((b.p_source_dest.db + 32.4).abs() < 1e-12);
        assert!((b.p_source_relay[0].db + 32.4).abs() < 1e-12);
    }
}
