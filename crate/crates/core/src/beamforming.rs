//! Collaborative beamforming: array factor, phase errors, link budget and CB energy.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{watts_to_dbm, NetworkConfig};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Point};

/// The set of nodes transmitting together in one CB round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbSelection {
    pub node_ids: Vec<usize>,
    /// Excitation weights in [0, 1], aligned with `node_ids`.
    pub weights: Vec<f64>,
    pub sink: usize,
}

impl CbSelection {
    /// Unit excitation for every node.
    pub fn unit(node_ids: Vec<usize>, sink: usize) -> Self {
        let weights = vec![1.0; node_ids.len()];
        Self {
            node_ids,
            weights,
            sink,
        }
    }
}

/// Direction seen from the array centre: elevation in [0, pi], azimuth in [-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub elevation: f64,
    pub azimuth: f64,
}

impl Direction {
    pub const BROADSIDE: Direction = Direction {
        elevation: 0.0,
        azimuth: PI / 2.0,
    };
}

/// Distance from element `(r_k, delta_k)` (polar, array-centred) to a far point at `range` in `dir`.
fn element_range(r_k: f64, delta_k: f64, range: f64, dir: Direction) -> f64 {
    (range * range + r_k * r_k - 2.0 * r_k * range * dir.azimuth.sin() * (dir.elevation - delta_k).cos()).sqrt()
}

/// Magnitude of the array factor.
///
/// Initial phases are steered towards `target` at `range` meters; the factor
/// is evaluated in direction `look` with per-element phase errors added.
pub fn array_factor(
    elements: &[Point],
    weights: &[f64],
    phase_errors: &[f64],
    target: Direction,
    look: Direction,
    range: f64,
    wavelength: f64,
) -> Result<f64> {
    if elements.is_empty() {
        return Err(Error::EmptySelection);
    }
    assert_eq!(elements.len(), weights.len());
    assert_eq!(elements.len(), phase_errors.len());
    let center = centroid(elements).expect("non-empty");
    let k = 2.0 * PI / wavelength;
    let (mut re, mut im) = (0.0, 0.0);
    for ((p, &w), &err) in elements.iter().zip(weights).zip(phase_errors) {
        let (dx, dy) = (p.x - center.x, p.y - center.y);
        let r_k = (dx * dx + dy * dy).sqrt();
        let delta_k = dy.atan2(dx);
        let steer = -k * element_range(r_k, delta_k, range, target);
        let phase = steer + k * element_range(r_k, delta_k, range, look) + err;
        re += w * phase.cos();
        im += w * phase.sin();
    }
    Ok((re * re + im * im).sqrt())
}

/// Array factor towards the steering target itself.
pub fn array_factor_on_target(weights: &[f64], phase_errors: &[f64]) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (&w, &err) in weights.iter().zip(phase_errors) {
        re += w * err.cos();
        im += w * err.sin();
    }
    (re * re + im * im).sqrt()
}

/// Draws `n` phase errors from a zero-mean Tikhonov (von Mises) law with concentration `kappa`.
///
/// `kappa == 0` gives uniform angles on (-pi, pi]; infinite `kappa` gives zeros.
pub fn sample_phase_errors(n: usize, kappa: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| sample_von_mises(kappa, rng)).collect()
}

/// Best and Fisher's wrapped-Cauchy rejection sampler.
pub fn sample_von_mises(kappa: f64, rng: &mut impl Rng) -> f64 {
    if kappa.is_infinite() {
        return 0.0;
    }
    if kappa < 1e-9 {
        // (-pi, pi]
        return PI - 2.0 * PI * rng.gen::<f64>();
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.gen();
        let z = (PI * u1).cos();
        let f = ((1.0 + r * z) / (r + z)).clamp(-1.0, 1.0);
        let c = kappa * (r - f);
        let u2: f64 = rng.gen();
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.gen();
            let theta = f.acos();
            return if u3 > 0.5 { theta } else { -theta };
        }
    }
}

/// Received power, SNR and achievable rate at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub received_power_w: f64,
    pub received_power_dbm: f64,
    pub snr_db: f64,
    pub rate_bps: f64,
    /// Horizontal distance from the array centroid to the base station.
    pub distance: f64,
    pub af_magnitude: f64,
    /// Received power meets the configured minimum.
    pub delivered: bool,
}

/// Two-ray link budget of a virtual array with effective `P_t G_t = P0 |AF|^2`.
pub fn link_budget(
    elements: &[Point],
    weights: &[f64],
    phase_errors: &[f64],
    config: &NetworkConfig,
) -> Result<LinkBudget> {
    if elements.is_empty() {
        return Err(Error::EmptySelection);
    }
    let center = centroid(elements).expect("non-empty");
    let distance = center.distance(&config.bs_position);
    let af = array_factor_on_target(weights, phase_errors);
    Ok(budget_from_af(af, distance, config))
}

pub fn budget_from_af(af: f64, distance: f64, config: &NetworkConfig) -> LinkBudget {
    let ht2 = config.node_height * config.node_height;
    let hr2 = config.bs_height * config.bs_height;
    let received_power_w = config.node_tx_power * af * af * ht2 * hr2 / distance.powi(4);
    let received_power_dbm = watts_to_dbm(received_power_w);
    let snr = received_power_w / config.noise_power_w();
    let rate_bps = config.bandwidth * (1.0 + snr).log2();
    LinkBudget {
        received_power_w,
        received_power_dbm,
        snr_db: 10.0 * snr.log10(),
        rate_bps,
        distance,
        af_magnitude: af,
        delivered: received_power_w > 0.0 && received_power_dbm >= config.min_rx_power,
    }
}

/// Per-node and total energy for transmitting `final_bits` at `rate_bps`.
pub fn cb_energy(weights: &[f64], final_bits: f64, rate_bps: f64, config: &NetworkConfig) -> (Vec<f64>, f64) {
    assert!(rate_bps > 0.0, "CB rate must be positive");
    let airtime = final_bits / rate_bps;
    let per_node: Vec<f64> = weights.iter().map(|w| w * w * config.node_tx_power * airtime).collect();
    let total = per_node.iter().sum();
    (per_node, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn line(n: usize, spacing: f64) -> Vec<Point> {
        (0..n).map(|i| Point::new(90.0 + spacing * i as f64, 100.0)).collect()
    }

    #[test]
    fn single_element_unit_factor() {
        let af = array_factor(
            &[Point::new(1.0, 2.0)],
            &[1.0],
            &[0.0],
            Direction::BROADSIDE,
            Direction::BROADSIDE,
            1100.0,
            0.125,
        )
        .unwrap();
        assert!((af - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_sum_towards_target() {
        let pts = line(10, 2.3);
        let target = Direction {
            elevation: 0.4,
            azimuth: 1.1,
        };
        let af = array_factor(&pts, &[1.0; 10], &[0.0; 10], target, target, 1100.0, 0.125).unwrap();
        assert!((af - 10.0).abs() < 1e-9, "{af}");
    }

    #[test]
    fn off_target_never_exceeds_weight_sum() {
        let pts = line(10, 2.3);
        let look = Direction {
            elevation: 1.0,
            azimuth: 0.3,
        };
        let af = array_factor(&pts, &[1.0; 10], &[0.0; 10], Direction::BROADSIDE, look, 1100.0, 0.125).unwrap();
        assert!(af <= 10.0 + 1e-9);
    }

    #[test]
    fn empty_selection_rejected() {
        assert!(array_factor(&[], &[], &[], Direction::BROADSIDE, Direction::BROADSIDE, 1.0, 1.0).is_err());
        assert!(link_budget(&[], &[], &[], &NetworkConfig::default()).is_err());
    }

    #[test]
    fn huge_kappa_concentrates_at_zero() {
        let mut rng = stream(1, Stream::PhaseError);
        let errs = sample_phase_errors(1000, 1e6, &mut rng);
        assert!(errs.iter().all(|e| e.abs() < 0.01));
        let af = array_factor(
            &line(10, 2.0),
            &[1.0; 10],
            &errs[..10],
            Direction::BROADSIDE,
            Direction::BROADSIDE,
            1100.0,
            0.125,
        )
        .unwrap();
        assert!((af - 10.0).abs() < 1e-2);
        let perfect = sample_phase_errors(10, f64::INFINITY, &mut rng);
        assert!((array_factor_on_target(&[1.0; 10], &perfect) - 10.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_angles_when_kappa_zero() {
        let mut rng = stream(2, Stream::PhaseError);
        let errs = sample_phase_errors(100_000, 0.0, &mut rng);
        assert!(errs.iter().all(|e| *e > -PI && *e <= PI));
        let (c, s) = errs.iter().fold((0.0, 0.0), |(c, s), e| (c + e.cos(), s + e.sin()));
        let resultant = (c * c + s * s).sqrt() / errs.len() as f64;
        assert!(resultant < 0.02, "{resultant}");
    }

    /// I1(x)/I0(x) from the power series of the modified Bessel functions.
    fn bessel_ratio(x: f64) -> f64 {
        let (mut i0, mut i1) = (0.0, 0.0);
        let mut term0 = 1.0; // (x/2)^(2m) / (m!)^2
        for m in 0..200 {
            let mf = m as f64;
            if m > 0 {
                term0 *= (x / 2.0) * (x / 2.0) / (mf * mf);
            }
            i0 += term0;
            i1 += term0 * (x / 2.0) / (mf + 1.0);
        }
        i1 / i0
    }

    #[test]
    fn mean_resultant_length_matches_bessel_ratio() {
        let expected = bessel_ratio(10.0);
        assert!((expected - 0.9486).abs() < 1e-4, "{expected}");
        let mut rng = stream(3, Stream::PhaseError);
        let errs = sample_phase_errors(100_000, 10.0, &mut rng);
        let mean_cos = errs.iter().map(|e| e.cos()).sum::<f64>() / errs.len() as f64;
        let mean_sin = errs.iter().map(|e| e.sin()).sum::<f64>() / errs.len() as f64;
        let resultant = (mean_cos * mean_cos + mean_sin * mean_sin).sqrt();
        assert!((resultant - expected).abs() < 0.01, "{resultant} vs {expected}");
    }

    #[test]
    fn reference_link_budget() {
        let cfg = NetworkConfig::default();
        let b = budget_from_af(10.0, 1100.0, &cfg);
        let expected_w = 100.0 * 0.1 * 2.25 * 400.0 / 1100f64.powi(4);
        assert!(((b.received_power_w - expected_w) / expected_w).abs() < 1e-12);
        assert!((b.received_power_w - 6.15e-9).abs() < 0.01e-9);
        assert!((b.received_power_dbm + 52.1).abs() < 0.2);
        assert!(!b.delivered, "-52.11 dBm is just under the -52 dBm floor");
        assert!((b.rate_bps - 2.39e6).abs() < 0.01e6, "{}", b.rate_bps);
        assert!((b.snr_db - 72.0).abs() < 0.5, "{}", b.snr_db);
    }

    #[test]
    fn zero_weights_fail_delivery() {
        let cfg = NetworkConfig::default();
        let b = link_budget(&line(3, 1.0), &[0.0; 3], &[0.0; 3], &cfg).unwrap();
        assert_eq!(b.received_power_w, 0.0);
        assert!(!b.delivered);
    }

    #[test]
    fn fourth_power_distance_law() {
        let cfg = NetworkConfig::default();
        let near = budget_from_af(5.0, 500.0, &cfg);
        let far = budget_from_af(5.0, 1000.0, &cfg);
        assert!((near.received_power_w / far.received_power_w - 16.0).abs() < 1e-9);
    }

    #[test]
    fn cb_energy_arithmetic() {
        let cfg = NetworkConfig::default();
        let (per, total) = cb_energy(&[1.0; 10], 1e6, 2.39e6, &cfg);
        assert_eq!(per.len(), 10);
        assert!((total - 0.41841).abs() < 1e-4);
        let (_, half) = cb_energy(&[1.0; 10], 5e5, 2.39e6, &cfg);
        assert!((half * 2.0 - total).abs() < 1e-15);
        let (per, _) = cb_energy(&[0.0, 1.0], 1e6, 2.39e6, &cfg);
        assert_eq!(per[0], 0.0);
    }
}
