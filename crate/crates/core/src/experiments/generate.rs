//! Protocol generation: closed-form or optimized cycles plus a state report.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    analytic_params, apply_protocol, canonical_cycles, cost_accounting, deviations_by_order,
    optimize_min_squeezing, optimize_protocol, Budget, ControlCycle, OptimizeOptions, ProtocolCost,
};
use crate::spin::Spin;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub j: f64,
    pub t: u32,
    /// Cycle count; defaults to [`default_cycles`].
    pub n_c: Option<usize>,
    pub seed: u64,
    /// Use closed-form parameters instead of the optimizer.
    pub analytic: bool,
    /// Prefer the solution with the least total squeezing.
    pub min_squeezing: bool,
    pub max_starts: usize,
    /// Deviation 1 − A_t below which the run counts as converged.
    pub target: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            j: 2.0,
            t: 2,
            n_c: None,
            seed: 0,
            analytic: false,
            min_squeezing: false,
            max_starts: 32,
            target: 1e-10,
        }
    }
}

/// Cycles that suffice for order t over the tested spin range.
pub fn default_cycles(t: u32) -> usize {
    if t <= 1 {
        1
    } else {
        t as usize + 1
    }
}

/// Parameter file shared by `generate` and `multipole-trace`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub j: f64,
    pub t: u32,
    pub n_c: usize,
    /// "analytic" or "optimized".
    pub method: String,
    pub seed: Option<u64>,
    pub cycles: Vec<ControlCycle>,
    /// 1 − A_s for s = 1..=t.
    pub deviations: Vec<f64>,
    pub deviation: f64,
    pub cost: ProtocolCost,
    /// Cost of the canonical equivalent protocol.
    pub canonical_cost: ProtocolCost,
    pub converged: bool,
}

impl ProtocolFile {
    pub fn from_cycles(
        spin: Spin,
        t: u32,
        cycles: Vec<ControlCycle>,
        method: &str,
        seed: Option<u64>,
        target: f64,
    ) -> Result<Self> {
        let state = apply_protocol(spin, &cycles)?;
        let deviations = deviations_by_order(&state, t)?;
        let deviation = *deviations
            .last()
            .ok_or_else(|| Error::InvalidArgument("order t must be ≥ 1".into()))?;
        Ok(Self {
            j: spin.j(),
            t,
            n_c: cycles.len(),
            method: method.to_string(),
            seed,
            cost: cost_accounting(&cycles),
            canonical_cost: cost_accounting(&canonical_cycles(spin, &cycles)),
            deviations,
            deviation,
            converged: deviation < target,
            cycles,
        })
    }

    pub fn spin(&self) -> Result<Spin> {
        Spin::new(self.j)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

pub fn generate(cfg: &GenerateConfig) -> Result<ProtocolFile> {
    let spin = Spin::new(cfg.j)?;
    if cfg.t == 0 {
        return Err(Error::InvalidArgument("order t must be ≥ 1".into()));
    }
    if cfg.analytic {
        let cycles = analytic_params(spin, cfg.t, true)?;
        return ProtocolFile::from_cycles(spin, cfg.t, cycles, "analytic", None, cfg.target);
    }
    let n_c = cfg.n_c.unwrap_or_else(|| default_cycles(cfg.t));
    let opts = OptimizeOptions {
        budget: Budget {
            max_starts: cfg.max_starts,
            target: cfg.target,
            ..Budget::default()
        },
        seed: cfg.seed,
        ..OptimizeOptions::default()
    };
    let res = if cfg.min_squeezing {
        optimize_min_squeezing(spin, cfg.t, n_c, &opts, 1e-8)?
    } else {
        optimize_protocol(spin, cfg.t, n_c, &opts)?
    };
    ProtocolFile::from_cycles(
        spin,
        cfg.t,
        res.cycles,
        "optimized",
        Some(cfg.seed),
        cfg.target,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_tetrahedron_report() {
        let cfg = GenerateConfig {
            analytic: true,
            ..GenerateConfig::default()
        };
        let f = generate(&cfg).unwrap();
        assert!(f.converged && f.deviation < 1e-10);
        assert_eq!(f.deviations.len(), 2);
        assert_eq!(f.n_c, 3);
        let back: ProtocolFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn unreachable_order_is_not_converged() {
        let cfg = GenerateConfig {
            t: 3,
            max_starts: 2,
            ..GenerateConfig::default()
        };
        let f = generate(&cfg).unwrap();
        assert!(!f.converged);
        assert!(f.deviation > 1e-4);
    }
}
