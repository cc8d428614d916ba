//! Power-splitting relay signal model.
//!
//! Each relay splits its received power: a fraction `rho_i` feeds the
//! information path (amplified and forwarded on the harvested energy), the
//! remaining `1 - rho_i` feeds the harvester. The end-to-end destination SINR
//! is a scalar rational function of the split ratios built from a handful of
//! per-link channel aggregates, so the whole second hop reduces to cheap
//! scalar evaluations once the aggregates are computed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, NetworkConfig};
use crate::error::Error;
use crate::ia::AlignmentSolution;
use crate::linalg::fro_sq;
use crate::Result;

/// The K power-splitting ratios, each confined to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsVector {
    rho: Vec<f64>,
}

impl PsVector {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if rho.iter().any(|&r| !(0.0..=1.0).contains(&r) || r.is_nan()) {
            return Err(Error::Domain(format!(
                "all PS ratios must lie in [0, 1], got {rho:?}"
            )));
        }
        Ok(PsVector { rho })
    }

    /// All-equal split vector.
    pub fn uniform(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.rho[i]
    }

    /// Replaces one coordinate, preserving the bounds invariant.
    pub fn set(&mut self, i: usize, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) || value.is_nan() {
            return Err(Error::Domain(format!("PS ratio {value} out of [0, 1]")));
        }
        self.rho[i] = value;
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rho
    }

    /// Euclidean distance to another split vector.
    pub fn distance(&self, other: &PsVector) -> f64 {
        self.rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Scalar channel aggregates that fully determine every destination SINR.
///
/// Indexing convention: `y[j][i]` and `c[j][i]` describe the path through
/// relay j into destination i; diagonals are the desired-signal terms.
/// `relay_noise[i]` is the effective noise power at relay i's information
/// path; it equals `sigma2` under perfect alignment and absorbs residual
/// cross-link leakage for unaligned baselines.
#[derive(Debug, Clone)]
pub struct LinkAggregates {
    /// Total received signal power at each relay (all sources, path loss applied).
    pub x: Vec<f64>,
    /// Second-hop signal-path gains `y[j][i]`.
    pub y: Vec<Vec<f64>>,
    /// Direct effective-channel powers `b[i]`.
    pub b: Vec<f64>,
    /// Second-hop raw channel powers `c[j][i]`.
    pub c: Vec<Vec<f64>>,
    /// Effective d x d direct channels after alignment.
    pub heff: Vec<DMatrix<Complex64>>,
    /// Per-relay information-path noise power.
    pub relay_noise: Vec<f64>,
}

/// Computes all aggregates for one aligned realization.
pub fn compute_aggregates(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    sol: &AlignmentSolution,
) -> LinkAggregates {
    let k = cfg.k;
    let tau = cfg.tau;
    let heff: Vec<DMatrix<Complex64>> = (0..k)
        .map(|i| sol.u[i].adjoint() * &ch.h[i][i] * &sol.v[i])
        .collect();
    let x = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| cfg.p[j] * cfg.r[j][i].powf(-tau) * fro_sq(&(&ch.h[j][i] * &sol.v[j])))
                .sum()
        })
        .collect();
    let b = (0..k)
        .map(|i| cfg.r[i][i].powf(-tau) * fro_sq(&heff[i]))
        .collect();
    // The relay transmit signal lives in the U_j column space, so the
    // second-hop gain applies G_ji to U_j before the d x d effective channel.
    let y = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| {
                    cfg.m_dist[j][i].powf(-tau)
                        * cfg.r[j][j].powf(-tau)
                        * fro_sq(&(&ch.g[j][i] * &sol.u[j] * &heff[j]))
                })
                .collect()
        })
        .collect();
    let c = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| cfg.m_dist[j][i].powf(-tau) * fro_sq(&ch.g[j][i]))
                .collect()
        })
        .collect();
    LinkAggregates {
        x,
        y,
        b,
        c,
        heff,
        relay_noise: vec![cfg.sigma2; k],
    }
}

/// Energy harvested by relay i during the first slot: `eta (1 - rho_i) X_i`.
/// Noise harvesting is neglected.
pub fn harvested_energy(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    rho_i: f64,
    i: usize,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho_i) {
        return Err(Error::Domain(format!("rho_{i} = {rho_i} out of [0, 1]")));
    }
    Ok(cfg.eta * (1.0 - rho_i) * agg.x[i])
}

/// Amplify-and-forward normalization `1 / sqrt(rho_i p_i b_ii + sigma_R_i^2)`.
pub fn amplification_coeff(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    rho_i: f64,
    i: usize,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho_i) {
        return Err(Error::Domain(format!("rho_{i} = {rho_i} out of [0, 1]")));
    }
    Ok(1.0 / (rho_i * cfg.p[i] * agg.b[i] + agg.relay_noise[i]).sqrt())
}

/// End-to-end SINR at destination i for a given split vector.
///
/// Numerator: desired signal through relay i. Denominator: cross-relay
/// interference, forwarded relay noise, and destination noise scaled by the
/// harvesting efficiency.
pub fn sinr_destination(cfg: &NetworkConfig, agg: &LinkAggregates, rho: &PsVector, i: usize) -> f64 {
    let s2 = cfg.sigma2;
    let ri = rho.get(i);
    let gi = ri * cfg.p[i] * agg.b[i] + agg.relay_noise[i];
    let num = (1.0 - ri) * agg.x[i] * ri * cfg.p[i] * agg.y[i][i] / gi;
    let mut den = s2 / cfg.eta;
    den += (1.0 - ri) * agg.x[i] * agg.c[i][i] * agg.relay_noise[i] / gi;
    for j in 0..cfg.k {
        if j == i {
            continue;
        }
        let rj = rho.get(j);
        let gj = rj * cfg.p[j] * agg.b[j] + agg.relay_noise[j];
        den += (1.0 - rj) * agg.x[j] * (rj * cfg.p[j] * agg.y[j][i] + agg.c[j][i] * agg.relay_noise[j])
            / gj;
    }
    num / den
}

/// High-SNR simplification of the destination SINR: the forwarded-noise and
/// self-noise denominator terms are dropped and the harvesting efficiency is
/// folded into both signal paths.
pub fn sinr_high_snr(cfg: &NetworkConfig, agg: &LinkAggregates, rho: &PsVector, i: usize) -> f64 {
    let ri = rho.get(i);
    let gi = ri * cfg.p[i] * agg.b[i] + agg.relay_noise[i];
    let num = cfg.eta * (1.0 - ri) * agg.x[i] * ri * cfg.p[i] * agg.y[i][i] / gi;
    let mut den = cfg.sigma2;
    for j in 0..cfg.k {
        if j == i {
            continue;
        }
        let rj = rho.get(j);
        let gj = rj * cfg.p[j] * agg.b[j] + agg.relay_noise[j];
        den += cfg.eta * (1.0 - rj) * agg.x[j] * rj * cfg.p[j] * agg.y[j][i] / gj;
    }
    num / den
}

/// Half-duplex link rate `(B/2) log2(1 + gamma)`.
pub fn link_rate(gamma: f64, bandwidth: f64) -> f64 {
    0.5 * bandwidth * (1.0 + gamma).log2()
}

/// Network sum rate for a given split vector.
pub fn sum_rate(cfg: &NetworkConfig, agg: &LinkAggregates, rho: &PsVector) -> f64 {
    (0..cfg.k)
        .map(|i| link_rate(sinr_destination(cfg, agg, rho, i), cfg.bandwidth))
        .sum()
}
