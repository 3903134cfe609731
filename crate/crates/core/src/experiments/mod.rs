//! Reproducible experiment drivers behind the `acspin` subcommands.
//!
//! Every driver is deterministic given its seed: per-task seeds are derived
//! from the master seed, work is spread over a rayon pool sized by
//! `ACSTATE_WORKERS`, and results are collected in a fixed order.

pub mod generate;
pub mod grid;
pub mod powerlaw;
pub mod table;
pub mod trace;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use generate::{generate, GenerateConfig, ProtocolFile};
pub use grid::{
    control_error_grid, noise_grid, BoundaryPoint, ControlErrorConfig, ControlErrorGrid,
    ControlErrorType, GridContext, GridProtocol, NoiseGrid, NoiseGridConfig, NoiseRegime,
};
pub use powerlaw::{powerlaw, PowerLawConfig, PowerLawReport};
pub use table::Table;
pub use trace::multipole_trace;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "ACSTATE_WORKERS";

/// Runs `f` on a pool with `ACSTATE_WORKERS` threads (rayon's default when unset).
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{WORKERS_ENV}={v} is not a worker count"))
        })?;
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(pool.install(f))
}

/// Seed of task `k` under master seed `seed`: first word of ChaCha stream `k`.
pub fn task_seed(seed: u64, k: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng.next_u64()
}

/// `n` points 10^lo .. 10^hi, evenly spaced in the exponent.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && hi <= lo) {
        return Err(Error::InvalidArgument(format!(
            "bad log grid 10^{lo}..10^{hi} with {n} points"
        )));
    }
    if n == 1 {
        return Ok(vec![10f64.powf(lo)]);
    }
    Ok((0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect())
}

/// Least-squares line through (log10 x, log10 y).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    /// log10 of the prefactor.
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.log10(), b.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(PowerFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// First x where `a − b` changes sign from negative to non-negative, with
/// linear interpolation of log a − log b in log x. `None` if `a < b` never
/// holds at the start or never stops holding.
pub fn log_crossover(x: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let g: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(p, q)| p.log10() - q.log10())
        .collect();
    if g.first().is_none_or(|&g0| g0 >= 0.0) {
        return None;
    }
    let k = g.iter().position(|&v| v >= 0.0)?;
    let (x0, x1) = (x[k - 1].log10(), x[k].log10());
    let t = -g[k - 1] / (g[k] - g[k - 1]);
    Some(10f64.powf(x0 + t * (x1 - x0)))
}

/// Shortest round-trip formatting; identical values print identically.
pub(crate) fn num(x: f64) -> String {
    format!("{x:e}")
}
