//! Network scenario description and seeded Rayleigh MIMO channel generation.
//!
//! Channels follow a quasi-static block Rayleigh fading model: every entry of
//! every hop matrix is an i.i.d. draw from CN(0,1) (real and imaginary parts
//! each N(0, 1/2)). Path loss `d^-tau` is kept separate from the fading draw
//! and applied by the consumers of a realization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Static scenario description for the K x K x K two-hop network.
///
/// Distances are dimensionless; powers and noise are linear-scale watts.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NetworkConfig {
    /// Number of source-relay-destination links.
    pub k: usize,
    /// Antennas per source.
    pub m: usize,
    /// Antennas per relay.
    pub n: usize,
    /// Antennas per destination.
    pub l: usize,
    /// Per-source transmit power, length K.
    pub p: Vec<f64>,
    /// Source-to-relay distances, `r[i][j]` = distance S_i to R_j.
    pub r: Vec<Vec<f64>>,
    /// Relay-to-destination distances, `m_dist[i][j]` = distance R_i to D_j.
    pub m_dist: Vec<Vec<f64>>,
    /// Path-loss exponent, >= 2.
    pub tau: f64,
    /// Energy conversion efficiency, 0 < eta <= 1.
    pub eta: f64,
    /// Noise variance sigma^2, shared by relays and destinations.
    pub sigma2: f64,
    /// Bandwidth in hertz. Defaults to 1 so rates read as bits/s/Hz.
    pub bandwidth: f64,
}

impl NetworkConfig {
    /// Symmetric scenario with unit distances and equal powers.
    pub fn symmetric(k: usize, m: usize, n: usize, l: usize, power: f64) -> Self {
        NetworkConfig {
            k,
            m,
            n,
            l,
            p: vec![power; k],
            r: vec![vec![1.0; k]; k],
            m_dist: vec![vec![1.0; k]; k],
            tau: 3.0,
            eta: 0.5,
            sigma2: 0.01,
            bandwidth: 1.0,
        }
    }

    /// Validates all invariants; returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.m < 1 || self.n < 1 || self.l < 1 {
            return Err(Error::Config("K, M, N, L must all be >= 1".into()));
        }
        if self.p.len() != self.k {
            return Err(Error::Config(format!(
                "p has length {}, expected K = {}",
                self.p.len(),
                self.k
            )));
        }
        if self.p.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Config("all transmit powers must be > 0".into()));
        }
        for (name, d) in [("r", &self.r), ("m", &self.m_dist)] {
            if d.len() != self.k || d.iter().any(|row| row.len() != self.k) {
                return Err(Error::Config(format!("{name} must be a K x K matrix")));
            }
            if d.iter().flatten().any(|&v| !(v > 0.0)) {
                return Err(Error::Config(format!(
                    "{name} distances must all be strictly positive"
                )));
            }
        }
        if !(self.tau >= 2.0) {
            return Err(Error::Config("tau must be >= 2".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config("eta must lie in (0, 1]".into()));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::Config("sigma2 must be > 0".into()));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::Config("B must be > 0".into()));
        }
        Ok(())
    }

    /// Parses a config from its JSON document form (see [`RawNetworkConfig`]).
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawNetworkConfig = serde_json::from_str(text)?;
        raw.build()
    }
}

/// Scalar-or-matrix distance field: a scalar sets every diagonal entry, with
/// cross distances defaulting to 1; a full K x K array is taken verbatim.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DistanceSpec {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl DistanceSpec {
    fn expand(&self, k: usize) -> Vec<Vec<f64>> {
        match self {
            DistanceSpec::Scalar(diag) => {
                let mut m = vec![vec![1.0; k]; k];
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = *diag;
                }
                m
            }
            DistanceSpec::Matrix(m) => m.clone(),
        }
    }
}

/// Scalar-or-vector power field: a scalar is broadcast to all K sources.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PowerSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// On-disk JSON form of [`NetworkConfig`].
#[derive(Debug, Clone, Deserialize)]
pub struct RawNetworkConfig {
    #[serde(alias = "K")]
    pub k: usize,
    #[serde(alias = "M")]
    pub m: usize,
    #[serde(alias = "N")]
    pub n: usize,
    #[serde(alias = "L")]
    pub l: usize,
    pub p: PowerSpec,
    #[serde(default = "unit_distance")]
    pub r: DistanceSpec,
    #[serde(default = "unit_distance", rename = "m_dist", alias = "mdist")]
    pub m_dist: DistanceSpec,
    pub tau: f64,
    pub eta: f64,
    pub sigma2: f64,
    #[serde(alias = "B", default = "default_bandwidth")]
    pub bandwidth: f64,
}

fn unit_distance() -> DistanceSpec {
    DistanceSpec::Scalar(1.0)
}

fn default_bandwidth() -> f64 {
    1.0
}

impl RawNetworkConfig {
    pub fn build(&self) -> Result<NetworkConfig> {
        let p = match &self.p {
            PowerSpec::Scalar(v) => vec![*v; self.k],
            PowerSpec::Vector(v) => v.clone(),
        };
        let cfg = NetworkConfig {
            k: self.k,
            m: self.m,
            n: self.n,
            l: self.l,
            p,
            r: self.r.expand(self.k),
            m_dist: self.m_dist.expand(self.k),
            tau: self.tau,
            eta: self.eta,
            sigma2: self.sigma2,
            bandwidth: self.bandwidth,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One quasi-static fading draw for the whole network.
///
/// `h[i][j]` is the N x M channel from source i to relay j; `g[i][j]` is the
/// L x N channel from relay i to destination j. Entries are CN(0,1).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: Vec<Vec<DMatrix<Complex64>>>,
    pub g: Vec<Vec<DMatrix<Complex64>>>,
    pub seed: u64,
}

/// Free-space style power attenuation `d^-tau`.
pub fn path_loss(d: f64, tau: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be > 0, got {d}")));
    }
    if !(tau >= 2.0) {
        return Err(Error::Domain(format!("tau must be >= 2, got {tau}")));
    }
    Ok(d.powf(-tau))
}

fn cn01_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    // Column-major fill, matching nalgebra's storage order.
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Draws all K^2 first-hop and K^2 second-hop matrices for one realization.
///
/// The same `(cfg, seed)` pair reproduces the realization bit-for-bit; the
/// generator is ChaCha8, so streams are portable across platforms.
pub fn sample_channels(cfg: &NetworkConfig, seed: u64) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = (0..cfg.k)
        .map(|_| {
            (0..cfg.k)
                .map(|_| cn01_matrix(cfg.n, cfg.m, &mut rng))
                .collect()
        })
        .collect();
    let g = (0..cfg.k)
        .map(|_| {
            (0..cfg.k)
                .map(|_| cn01_matrix(cfg.l, cfg.n, &mut rng))
                .collect()
        })
        .collect();
    Ok(ChannelRealization { h, g, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_known_values() {
        assert_eq!(path_loss(1.0, 3.0).unwrap(), 1.0);
        assert_eq!(path_loss(2.0, 3.0).unwrap(), 0.125);
        assert_eq!(path_loss(1.0, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn path_loss_rejects_bad_domain() {
        assert!(path_loss(0.0, 3.0).is_err());
        assert!(path_loss(-1.0, 3.0).is_err());
        assert!(path_loss(1.0, 1.5).is_err());
    }

    #[test]
    fn path_loss_monotone() {
        let mut prev = f64::INFINITY;
        for d in [0.5, 1.0, 1.5, 2.0, 4.0, 10.0] {
            let a = path_loss(d, 3.0).unwrap();
            assert!(a < prev);
            prev = a;
        }
        // decreasing in tau for d > 1
        assert!(path_loss(2.0, 3.0).unwrap() < path_loss(2.0, 2.0).unwrap());
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = NetworkConfig::symmetric(3, 4, 4, 4, 1.0);
        let a = sample_channels(&cfg, 42).unwrap();
        let b = sample_channels(&cfg, 42).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.h[i][j], b.h[i][j]);
                assert_eq!(a.g[i][j], b.g[i][j]);
            }
        }
        let c = sample_channels(&cfg, 43).unwrap();
        assert_ne!(a.h[0][0], c.h[0][0]);
    }

    #[test]
    fn matrix_dimensions_follow_config() {
        let mut cfg = NetworkConfig::symmetric(2, 3, 4, 5, 1.0);
        cfg.m = 3;
        cfg.n = 4;
        cfg.l = 5;
        let ch = sample_channels(&cfg, 7).unwrap();
        assert_eq!(ch.h[0][1].nrows(), 4);
        assert_eq!(ch.h[0][1].ncols(), 3);
        assert_eq!(ch.g[1][0].nrows(), 5);
        assert_eq!(ch.g[1][0].ncols(), 4);
    }

    #[test]
    fn fading_moments_match_cn01() {
        // >= 1e5 draws; tolerance 3 standard errors.
        let cfg = NetworkConfig::symmetric(2, 5, 5, 5, 1.0);
        let mut n = 0usize;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        let mut sum_re2 = 0.0;
        for seed in 0..500 {
            let ch = sample_channels(&cfg, seed).unwrap();
            for row in ch.h.iter().chain(ch.g.iter()) {
                for m in row {
                    for z in m.iter() {
                        sum += z;
                        sum_sq += z.norm_sqr();
                        sum_re2 += z.re * z.re;
                        n += 1;
                    }
                }
            }
        }
        let nf = n as f64;
        assert!(n >= 100_000);
        let mean = sum / nf;
        let se_mean = (0.5f64 / nf).sqrt();
        assert!(mean.re.abs() < 3.0 * se_mean, "mean.re = {}", mean.re);
        assert!(mean.im.abs() < 3.0 * se_mean, "mean.im = {}", mean.im);
        let var = sum_sq / nf;
        // |z|^2 is Exp(1): std = 1
        assert!((var - 1.0).abs() < 3.0 / nf.sqrt(), "var = {var}");
        let var_re = sum_re2 / nf;
        // re^2 has variance 2*(1/2)^2 = 1/2
        assert!(
            (var_re - 0.5).abs() < 3.0 * (0.5f64 / nf).sqrt(),
            "var_re = {var_re}"
        );
    }

    #[test]
    fn json_config_scalar_and_matrix_distances() {
        let text = r#"{
            "K": 2, "M": 4, "N": 4, "L": 4,
            "p": 1.0,
            "r": 1.0,
            "m_dist": [[1.0, 2.0], [2.0, 1.0]],
            "tau": 3.0, "eta": 0.5, "sigma2": 0.01
        }"#;
        let cfg = NetworkConfig::from_json(text).unwrap();
        assert_eq!(cfg.p, vec![1.0, 1.0]);
        assert_eq!(cfg.r, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(cfg.m_dist[0][1], 2.0);
        assert_eq!(cfg.bandwidth, 1.0);
    }

    #[test]
    fn json_config_rejects_invalid() {
        let text = r#"{"k": 2, "m": 4, "n": 4, "l": 4, "p": -1.0,
                       "tau": 3.0, "eta": 0.5, "sigma2": 0.01}"#;
        assert!(NetworkConfig::from_json(text).is_err());
        let text = r#"{"k": 2, "m": 4, "n": 4, "l": 4, "p": 1.0,
                       "tau": 1.0, "eta": 0.5, "sigma2": 0.01}"#;
        assert!(NetworkConfig::from_json(text).is_err());
    }
}
