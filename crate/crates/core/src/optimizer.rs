//! Per-link power-splitting optimization.
//!
//! Each destination SINR, viewed as a function of its own relay's split ratio
//! with the other ratios held fixed, vanishes at both endpoints and has a
//! unique interior maximum. The optimizer finds that maximum as the root of
//! the analytic first derivative with safeguarded Newton iteration, sweeps the
//! links Gauss-Seidel style until the split vector stops moving, and seeds the
//! sweep with a closed-form high-SNR ratio. A dense grid scan is kept as an
//! independent validation oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::NetworkConfig;
use crate::error::Error;
use crate::relay::{sinr_destination, LinkAggregates, PsVector};
use crate::Result;

/// Initial split vector for the coordinate sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Closed-form high-SNR ratio per link.
    HighSnr,
    /// The same fixed ratio on every link.
    Fixed(f64),
    /// Uniform draws in (0, 1) from the run seed.
    Random,
}

/// Tolerances and iteration caps for the optimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    /// Outer-loop convergence threshold on `||rho(n+1) - rho(n)||_2`.
    pub epsilon: f64,
    /// Newton stopping tolerance on `|f(rho)|`.
    pub newton_tol: f64,
    pub max_outer_iters: usize,
    pub max_newton_iters: usize,
    pub init_mode: InitMode,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            epsilon: 1e-3,
            newton_tol: 1e-10,
            max_outer_iters: 100,
            max_newton_iters: 50,
            init_mode: InitMode::HighSnr,
        }
    }
}

/// Per-sweep record of the optimizer's progress.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerTrace {
    /// Split vector after each outer iteration, starting with the initializer.
    pub rho_history: Vec<Vec<f64>>,
    /// Destination SINRs evaluated at each recorded split vector.
    pub per_iteration_sinrs: Vec<Vec<f64>>,
    pub converged: bool,
    pub outer_iterations: usize,
}

/// Diagnostic scalars of the derivative's rational-function decomposition for
/// one link: `t` the self-noise coefficient, `z3` the signal-path gain,
/// `z1`/`z2` the interference-sum coefficients, and `s` the high-SNR
/// interference total.
#[derive(Debug, Clone)]
pub struct DerivativeContext {
    pub t: f64,
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub s: f64,
    pub link: usize,
}

impl DerivativeContext {
    pub fn new(cfg: &NetworkConfig, agg: &LinkAggregates, rho: &PsVector, i: usize) -> Self {
        let s2 = cfg.sigma2;
        let pb = cfg.p[i] * agg.b[i];
        let mut z1 = -agg.x[i] * agg.c[i][i] * s2 + pb * s2;
        let mut z2 = 0.0;
        let mut s = 0.0;
        for j in 0..cfg.k {
            if j == i {
                continue;
            }
            let rj = rho.get(j);
            let gj = rj * cfg.p[j] * agg.b[j] + s2;
            let wj = cfg.eta * (1.0 - rj) * agg.x[j];
            z1 += wj * (pb + s2) * (rj * cfg.p[j] * agg.y[j][i] + agg.c[j][i] * s2) / gj;
            z2 += wj * agg.y[j][i] * rj * cfg.p[j] / gj + wj * agg.c[j][i] * s2 / gj;
            s += wj * rj * cfg.p[j] * agg.y[j][i] / gj;
        }
        DerivativeContext {
            t: agg.x[i] * agg.c[i][i] * s2,
            z1,
            z2,
            z3: agg.x[i] * cfg.p[i] * agg.y[i][i],
            s,
            link: i,
        }
    }
}

/// Cross-link interference total entering destination i's SINR denominator;
/// constant in `rho_i`.
fn interference_sum(cfg: &NetworkConfig, agg: &LinkAggregates, rho: &PsVector, i: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..cfg.k {
        if j == i {
            continue;
        }
        let rj = rho.get(j);
        let gj = rj * cfg.p[j] * agg.b[j] + agg.relay_noise[j];
        s += (1.0 - rj) * agg.x[j] * (rj * cfg.p[j] * agg.y[j][i] + agg.c[j][i] * agg.relay_noise[j])
            / gj;
    }
    s
}

/// Exact partial derivative of the destination SINR with respect to the link's
/// own split ratio, by quotient-rule differentiation of the closed form.
pub fn sinr_derivative(cfg: &NetworkConfig, agg: &LinkAggregates, rho: &PsVector, i: usize) -> f64 {
    let r = rho.get(i);
    let a = cfg.p[i] * agg.b[i];
    let sr = agg.relay_noise[i];
    let g = r * a + sr;
    let kn = agg.x[i] * cfg.p[i] * agg.y[i][i];
    let num = kn * (r - r * r) / g;
    let dnum = kn * ((1.0 - 2.0 * r) * g - a * (r - r * r)) / (g * g);
    let t = agg.x[i] * agg.c[i][i] * sr;
    let den = interference_sum(cfg, agg, rho, i) + t * (1.0 - r) / g + cfg.sigma2 / cfg.eta;
    let dden = t * (-g - a * (1.0 - r)) / (g * g);
    (dnum * den - num * dden) / (den * den)
}

const BRACKET_LO: f64 = 1e-9;
const BRACKET_HI: f64 = 1.0 - 1e-9;

/// Root of the derivative on (0, 1): Newton steps with a bisection safeguard
/// on the sign-change bracket. Newton's own slope comes from central finite
/// differences of the analytic first derivative.
pub fn newton_root(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    rho: &PsVector,
    i: usize,
    settings: &OptimizerSettings,
) -> Result<f64> {
    let f = |r: f64| {
        let mut probe = rho.clone();
        probe.set(i, r).expect("probe inside (0, 1)");
        sinr_derivative(cfg, agg, &probe, i)
    };
    let mut lo = BRACKET_LO;
    let mut hi = BRACKET_HI;
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::Degenerate(format!(
            "derivative of link {i} has no sign change on (0, 1); \
             the direct gain is likely zero"
        )));
    }
    let mut x = rho.get(i).clamp(lo, hi);
    for _ in 0..settings.max_newton_iters {
        let fx = f(x);
        if fx.abs() < settings.newton_tol {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let h = 1e-7;
        let slope = (f((x + h).min(BRACKET_HI)) - f((x - h).max(BRACKET_LO))) / (2.0 * h);
        let mut next = x - fx / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        x = next;
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(x)
}

/// Closed-form high-SNR split ratio: the admissible root of the endpoint
/// quadratic, `(-2 sigma^2 + sqrt(4 sigma^2 (sigma^2 + p b))) / (2 p b)`.
/// Always lies in (0, 1/2).
pub fn init_ps_high_snr(cfg: &NetworkConfig, agg: &LinkAggregates, i: usize) -> Result<f64> {
    let pb = cfg.p[i] * agg.b[i];
    if !(pb > 0.0) {
        return Err(Error::Degenerate(format!(
            "link {i} has zero direct gain (p_i b_ii = {pb})"
        )));
    }
    let s2 = agg.relay_noise[i];
    let delta = 4.0 * s2 * (s2 + pb);
    Ok((-2.0 * s2 + delta.sqrt()) / (2.0 * pb))
}

fn initial_vector(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<PsVector> {
    match settings.init_mode {
        InitMode::HighSnr => {
            let rho: Result<Vec<f64>> =
                (0..cfg.k).map(|i| init_ps_high_snr(cfg, agg, i)).collect();
            PsVector::new(rho?)
        }
        InitMode::Fixed(v) => PsVector::uniform(cfg.k, v),
        InitMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            PsVector::new((0..cfg.k).map(|_| rng.gen_range(1e-6..1.0)).collect())
        }
    }
}

/// Gauss-Seidel coordinate sweep: link i's update at outer iteration n+1 sees
/// the already-updated ratios of links 1..i-1 and the previous ratios of the
/// rest. Terminates when the sweep moves the vector less than `epsilon` in
/// Euclidean norm.
pub fn optimize_ps(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<(PsVector, OptimizerTrace)> {
    let mut rho = initial_vector(cfg, agg, settings, seed)?;
    let record_sinrs = |rho: &PsVector| {
        (0..cfg.k)
            .map(|i| sinr_destination(cfg, agg, rho, i))
            .collect::<Vec<_>>()
    };
    let mut trace = OptimizerTrace {
        rho_history: vec![rho.as_slice().to_vec()],
        per_iteration_sinrs: vec![record_sinrs(&rho)],
        converged: false,
        outer_iterations: 0,
    };
    for n in 0..settings.max_outer_iters {
        let prev = rho.clone();
        for i in 0..cfg.k {
            let star = newton_root(cfg, agg, &rho, i, settings)?;
            rho.set(i, star)?;
        }
        trace.rho_history.push(rho.as_slice().to_vec());
        trace.per_iteration_sinrs.push(record_sinrs(&rho));
        trace.outer_iterations = n + 1;
        if rho.distance(&prev) < settings.epsilon {
            trace.converged = true;
            break;
        }
    }
    Ok((rho, trace))
}

/// Exhaustive scan of one coordinate over `{0, step, 2 step, ..., 1}`,
/// maximizing the exact SINR. Validation oracle for [`newton_root`].
pub fn grid_oracle(
    cfg: &NetworkConfig,
    agg: &LinkAggregates,
    i: usize,
    rho_others: &PsVector,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::Domain(format!("grid step {step} out of (0, 0.1]")));
    }
    let mut probe = rho_others.clone();
    let mut best_rho = 0.0;
    let mut best_val = f64::NEG_INFINITY;
    let n = (1.0 / step).ceil() as usize;
    for k in 0..=n {
        let r = (k as f64 * step).min(1.0);
        probe.set(i, r)?;
        let v = sinr_destination(cfg, agg, &probe, i);
        if v > best_val {
            best_val = v;
            best_rho = r;
        }
    }
    Ok(best_rho)
}
