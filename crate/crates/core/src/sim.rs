//! Seeded Monte Carlo driver: per-trial pipeline, benchmark schemes, sweep
//! experiments, and CSV emission.
//!
//! Every quantity is a pure function of the configuration and a master seed.
//! Within a sweep point all schemes consume the identical channel realization
//! (common random numbers), so scheme comparisons are paired.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{sample_channels, ChannelRealization, NetworkConfig};
use crate::error::Error;
use crate::ia::{feasible_streams, run_iterative_ia, weighted_leakage, AlignmentSolution};
use crate::linalg::fro_sq;
use crate::optimizer::{optimize_ps, OptimizerSettings};
use crate::relay::{compute_aggregates, link_rate, sinr_destination, LinkAggregates, PsVector};
use crate::Result;

/// Leakage threshold used by trial pipelines.
pub const DEFAULT_IA_TOL: f64 = 1e-6;
/// Alternation cap used by trial pipelines.
pub const DEFAULT_IA_MAX_ITERS: usize = 5000;

/// Transmission schemes compared in the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Alignment plus optimized split ratios.
    Proposed,
    /// Alignment with uniformly random split ratios.
    RandomPs,
    /// Alignment with every split ratio fixed at 0.5.
    FixedPs,
    /// No alignment: identity precoders, dominant-subspace decoders, residual
    /// interference treated as extra relay noise; split ratios optimized.
    NoIa,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::RandomPs,
        Scheme::FixedPs,
        Scheme::NoIa,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::RandomPs => "random_ps",
            Scheme::FixedPs => "fixed_ps",
            Scheme::NoIa => "no_ia",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "random_ps" | "random" => Ok(Scheme::RandomPs),
            "fixed_ps" | "fixed" => Ok(Scheme::FixedPs),
            "no_ia" => Ok(Scheme::NoIa),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Everything recorded about one (realization, scheme) evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub scheme: Scheme,
    pub rho: Vec<f64>,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub leakage: f64,
    pub optimizer_outer_iterations: usize,
}

/// Sweep variable for [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TransmitPower,
    LinkCount,
}

/// A sweep experiment: one variable, a value grid, trials per point, and the
/// schemes to compare.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base: NetworkConfig,
    pub schemes: Vec<Scheme>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep values must be non-empty".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes must be non-empty".into()));
        }
        self.base.validate()
    }
}

/// One aggregated sweep result. Infeasible points are reported as warning
/// rows with `n_trials = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub scheme: Scheme,
    pub mean_sum_rate: f64,
    pub stderr: f64,
    pub n_trials: usize,
    pub n_failed: usize,
}

/// SplitMix64 step, used to derive independent per-trial seeds.
fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Unaligned benchmark: identity-column precoders, decoders from the dominant
/// left singular subspace of each direct channel. The residual cross-link
/// leakage at each relay is added to that relay's information-path noise.
pub fn no_ia_baseline(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
) -> Result<(AlignmentSolution, LinkAggregates)> {
    let d = feasible_streams(cfg.m, cfg.n, cfg.k);
    if d == 0 {
        return Err(Error::Config(format!(
            "no feasible stream count for M = {}, N = {}, K = {}",
            cfg.m, cfg.n, cfg.k
        )));
    }
    let v: Vec<DMatrix<Complex64>> = (0..cfg.k)
        .map(|_| {
            DMatrix::<Complex64>::identity(cfg.m, cfg.m)
                .columns(0, d)
                .into()
        })
        .collect();
    let u: Vec<DMatrix<Complex64>> = (0..cfg.k)
        .map(|i| {
            let svd = ch.h[i][i].clone().svd(true, false);
            let full_u = svd.u.expect("left singular vectors requested");
            full_u.columns(0, d).into()
        })
        .collect();
    let (num, den) = weighted_leakage(cfg, ch, &v, &u, d);
    let sol = AlignmentSolution {
        v,
        u,
        d,
        leakage: if den > 0.0 { num / den } else { 0.0 },
        iterations_used: 0,
    };
    let mut agg = compute_aggregates(cfg, ch, &sol);
    for i in 0..cfg.k {
        let leak: f64 = (0..cfg.k)
            .filter(|&j| j != i)
            .map(|j| {
                cfg.p[j]
                    * cfg.r[j][i].powf(-cfg.tau)
                    * fro_sq(&(sol.u[i].adjoint() * &ch.h[j][i] * &sol.v[j]))
            })
            .sum();
        agg.relay_noise[i] += leak;
    }
    Ok((sol, agg))
}

fn rho_for_scheme(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    scheme: Scheme,
    seed: u64,
    opt: &OptimizerSettings,
) -> Result<(PsVector, usize)> {
    match scheme {
        Scheme::Proposed | Scheme::NoIa => {
            let (rho, trace) = optimize_ps(cfg, agg, opt, mix(seed, 1))?;
            Ok((rho, trace.outer_iterations))
        }
        Scheme::FixedPs => Ok((PsVector::uniform(cfg.k, 0.5)?, 0)),
        Scheme::RandomPs => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 2));
            let rho = PsVector::new((0..cfg.k).map(|_| rng.gen_range(1e-6..1.0)).collect())?;
            Ok((rho, 0))
        }
    }
}

fn report(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    leakage: f64,
    seed: u64,
    scheme: Scheme,
    rho: PsVector,
    outer: usize,
) -> TrialReport {
    let sinr: Vec<f64> = (0..cfg.k)
        .map(|i| sinr_destination(cfg, agg, &rho, i))
        .collect();
    let rates: Vec<f64> = sinr.iter().map(|&g| link_rate(g, cfg.bandwidth)).collect();
    TrialReport {
        seed,
        scheme,
        rho: rho.as_slice().to_vec(),
        sum_rate: rates.iter().sum(),
        sinr,
        rates,
        leakage,
        optimizer_outer_iterations: outer,
    }
}

/// Runs one realization through every requested scheme, sharing the channel
/// draw and the alignment across the aligned schemes.
pub fn run_trial_set(
    cfg: &NetworkConfig,
    seed: u64,
    schemes: &[Scheme],
    opt: &OptimizerSettings,
) -> Result<Vec<TrialReport>> {
    cfg.validate()?;
    let d = feasible_streams(cfg.m, cfg.n, cfg.k);
    if d == 0 {
        return Err(Error::Config(format!(
            "no feasible stream count for M = {}, N = {}, K = {}",
            cfg.m, cfg.n, cfg.k
        )));
    }
    let ch = sample_channels(cfg, seed)?;
    let aligned = if schemes.iter().any(|s| *s != Scheme::NoIa) {
        let sol = run_iterative_ia(cfg, &ch, d, DEFAULT_IA_MAX_ITERS, DEFAULT_IA_TOL)?;
        let agg = compute_aggregates(cfg, &ch, &sol);
        Some((sol, agg))
    } else {
        None
    };
    let mut out = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let (agg, leakage) = match scheme {
            Scheme::NoIa => {
                let (sol, agg) = no_ia_baseline(cfg, &ch)?;
                (agg, sol.leakage)
            }
            _ => {
                let (sol, agg) = aligned.as_ref().expect("aligned pipeline prepared");
                (agg.clone(), sol.leakage)
            }
        };
        let (rho, outer) = rho_for_scheme(cfg, &agg, scheme, seed, opt)?;
        out.push(report(cfg, &agg, leakage, seed, scheme, rho, outer));
    }
    Ok(out)
}

/// One trial of one scheme: channel draw, alignment (or the unaligned
/// baseline), split-ratio selection, and rate evaluation.
pub fn run_trial(cfg: &NetworkConfig, seed: u64, scheme: Scheme) -> Result<TrialReport> {
    let opt = OptimizerSettings::default();
    Ok(run_trial_set(cfg, seed, &[scheme], &opt)?.remove(0))
}

fn config_for_point(spec: &SweepSpec, value: f64) -> Result<NetworkConfig> {
    let mut cfg = spec.base.clone();
    match spec.variable {
        SweepVariable::TransmitPower => {
            if !(value > 0.0) {
                return Err(Error::Config(format!("transmit power {value} must be > 0")));
            }
            cfg.p = vec![value; cfg.k];
        }
        SweepVariable::LinkCount => {
            let k = value as usize;
            if value.fract() != 0.0 || k < 1 {
                return Err(Error::Config(format!("link count {value} must be a positive integer")));
            }
            // Link-count sweeps rebuild a symmetric scenario from the base's
            // first link: equal powers, unit cross distances.
            cfg.k = k;
            cfg.p = vec![spec.base.p[0]; k];
            cfg.r = vec![vec![1.0; k]; k];
            cfg.m_dist = vec![vec![1.0; k]; k];
            for i in 0..k.min(spec.base.k) {
                cfg.r[i][i] = spec.base.r[i][i];
                cfg.m_dist[i][i] = spec.base.m_dist[i][i];
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

struct KahanSum {
    sum: f64,
    c: f64,
    sq: f64,
    n: usize,
}

impl KahanSum {
    fn new() -> Self {
        KahanSum { sum: 0.0, c: 0.0, sq: 0.0, n: 0 }
    }

    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
        self.sq += v * v;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Runs a full sweep: per grid value, `spec.trials` seeded trials for every
/// scheme on common channel realizations, reduced to mean and standard error.
pub fn run_sweep(spec: &SweepSpec, master_seed: u64) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let opt = OptimizerSettings::default();
    let mut rows = Vec::new();
    for (pi, &value) in spec.values.iter().enumerate() {
        let cfg = config_for_point(spec, value)?;
        if feasible_streams(cfg.m, cfg.n, cfg.k) == 0 {
            for &scheme in &spec.schemes {
                rows.push(SweepRow {
                    x: value,
                    scheme,
                    mean_sum_rate: f64::NAN,
                    stderr: f64::NAN,
                    n_trials: 0,
                    n_failed: spec.trials,
                });
            }
            continue;
        }
        let mut acc: Vec<KahanSum> = spec.schemes.iter().map(|_| KahanSum::new()).collect();
        let mut failed = vec![0usize; spec.schemes.len()];
        for t in 0..spec.trials {
            let seed = mix(mix(master_seed, pi as u64 + 1), t as u64);
            match run_trial_set(&cfg, seed, &spec.schemes, &opt) {
                Ok(reports) => {
                    for (s, rep) in reports.iter().enumerate() {
                        acc[s].add(rep.sum_rate);
                    }
                }
                Err(_) => {
                    for f in failed.iter_mut() {
                        *f += 1;
                    }
                }
            }
        }
        for (s, &scheme) in spec.schemes.iter().enumerate() {
            rows.push(SweepRow {
                x: value,
                scheme,
                mean_sum_rate: acc[s].mean(),
                stderr: acc[s].stderr(),
                n_trials: acc[s].n,
                n_failed: failed[s],
            });
        }
    }
    Ok(rows)
}

/// Renders sweep rows as a CSV document. Floats use shortest round-trip
/// formatting, so re-parsing recovers the exact values and the byte output is
/// a pure function of the rows.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("refusing to emit an empty table".into()));
    }
    let mut out = String::from("x,scheme,mean_sum_rate,stderr,n_trials,n_failed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.x, r.scheme, r.mean_sum_rate, r.stderr, r.n_trials, r.n_failed
        ));
    }
    Ok(out)
}

/// Writes a sweep table to disk as UTF-8 CSV.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, sweep_csv(rows)?)?;
    Ok(())
}

/// Renders an optimizer trace as CSV: `iter, rho_1..rho_K, sum_rate`.
pub fn trace_csv(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    trace: &crate::optimizer::OptimizerTrace,
) -> String {
    let mut out = String::from("iter");
    for i in 1..=cfg.k {
        out.push_str(&format!(",rho_{i}"));
    }
    out.push_str(",sum_rate\n");
    for (n, rho) in trace.rho_history.iter().enumerate() {
        out.push_str(&n.to_string());
        for r in rho {
            out.push_str(&format!(",{r}"));
        }
        let ps = PsVector::new(rho.clone()).expect("trace entries are feasible");
        out.push_str(&format!(",{}\n", crate::relay::sum_rate(cfg, agg, &ps)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ia::verify_alignment;

    fn defaults(k: usize) -> NetworkConfig {
        NetworkConfig::symmetric(k, 4, 4, 4, 1.0)
    }

    #[test]
    fn fixed_scheme_uses_half_everywhere() {
        let cfg = defaults(3);
        let rep = run_trial(&cfg, 4, Scheme::FixedPs).unwrap();
        assert_eq!(rep.rho, vec![0.5; 3]);
        assert_eq!(rep.optimizer_outer_iterations, 0);
    }

    #[test]
    fn random_scheme_reproducible_and_interior() {
        let cfg = defaults(3);
        let a = run_trial(&cfg, 4, Scheme::RandomPs).unwrap();
        let b = run_trial(&cfg, 4, Scheme::RandomPs).unwrap();
        assert_eq!(a.rho, b.rho);
        assert!(a.rho.iter().all(|&r| r > 0.0 && r < 1.0));
        let c = run_trial(&cfg, 5, Scheme::RandomPs).unwrap();
        assert_ne!(a.rho, c.rho);
    }

    #[test]
    fn sum_rate_equals_rate_sum() {
        let cfg = defaults(3);
        let rep = run_trial(&cfg, 10, Scheme::Proposed).unwrap();
        let total: f64 = rep.rates.iter().sum();
        assert_eq!(rep.sum_rate, total);
        assert!(rep.leakage < DEFAULT_IA_TOL);
    }

    #[test]
    fn no_ia_baseline_leaks_but_works() {
        let cfg = defaults(3);
        let ch = sample_channels(&cfg, 12).unwrap();
        let (sol, agg) = no_ia_baseline(&cfg, &ch).unwrap();
        let (cross, direct) = verify_alignment(&sol, &cfg, &ch);
        assert!(cross > 0.0);
        assert!(direct > 0.0);
        assert!(agg.relay_noise.iter().all(|&v| v > cfg.sigma2));
    }

    #[test]
    fn no_ia_single_link_matches_proposed_structure() {
        let cfg = defaults(1);
        let ch = sample_channels(&cfg, 3).unwrap();
        let (_, agg) = no_ia_baseline(&cfg, &ch).unwrap();
        // no interference to leak: relay noise stays at sigma2
        assert_eq!(agg.relay_noise, vec![cfg.sigma2]);
    }

    #[test]
    fn trial_errors_on_infeasible_network() {
        let cfg = NetworkConfig::symmetric(5, 1, 1, 1, 1.0);
        assert!(run_trial(&cfg, 0, Scheme::Proposed).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_paired() {
        let spec = SweepSpec {
            variable: SweepVariable::TransmitPower,
            values: vec![0.5, 2.0],
            trials: 3,
            base: defaults(2),
            schemes: vec![Scheme::Proposed, Scheme::FixedPs],
        };
        let a = run_sweep(&spec, 99).unwrap();
        let b = run_sweep(&spec, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|r| r.n_trials == 3 && r.n_failed == 0));
        let csv1 = sweep_csv(&a).unwrap();
        let csv2 = sweep_csv(&b).unwrap();
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn sweep_marks_infeasible_points() {
        let spec = SweepSpec {
            variable: SweepVariable::LinkCount,
            values: vec![2.0, 9.0],
            trials: 2,
            base: defaults(2),
            schemes: vec![Scheme::Proposed],
        };
        let rows = run_sweep(&spec, 1).unwrap();
        assert_eq!(rows[0].n_trials, 2);
        assert_eq!(rows[1].n_trials, 0);
        assert!(rows[1].mean_sum_rate.is_nan());
    }

    #[test]
    fn empty_table_rejected() {
        assert!(sweep_csv(&[]).is_err());
    }

    #[test]
    fn csv_round_trips_values() {
        let rows = vec![SweepRow {
            x: 0.1,
            scheme: Scheme::Proposed,
            mean_sum_rate: 1.234567890123456,
            stderr: 0.07,
            n_trials: 10,
            n_failed: 0,
        }];
        let text = sweep_csv(&rows).unwrap();
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.1);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 1.234567890123456);
    }
}
