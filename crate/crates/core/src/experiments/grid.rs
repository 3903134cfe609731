//! Noise-strength and control-error sweeps of the protected protocols.
//!
//! Both sweeps evaluate cells through [`GridContext::evaluate`]: for every
//! noise instance the unit-norm disorder and dipolar terms are combined at
//! (δ, Δ), each strategy's schedule is simulated with the given flip-angle
//! errors, and distance and infidelity are averaged over instances.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate, GenerateConfig};
use super::{
    fit_power_law, log_crossover, log_grid, num, task_seed, with_workers, PowerFit, Table,
};
use crate::dd::dcg::{ghz_pulses, protocol_pulses, target_propagator};
use crate::dd::{
    protected_schedule, simulate_schedule, ControlSchedule, DDSequence, DcgSequences, FlipErrors,
    LeakageProbe, Strategy,
};
use crate::ensemble::{Ensemble, NoiseComponents, NoiseInstance};
use crate::error::{Error, Result};
use crate::linalg::{CVector, Propagator};
use crate::metrics::{distance, infidelity};
use crate::protocol::{analytic_params, ControlCycle};
use crate::spin::{coherent_y, SpinState};

pub const NOISE_SCHEMA: &str = "noise_grid/1";
pub const CONTROL_SCHEMA: &str = "control_error_grid/1";

/// Pulse amplitude; noise strengths are quoted in units of it.
const CHI: f64 = 1.0;

/// State-preparation protocol simulated on the ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridProtocol {
    /// Closed-form order-t protocol for j = N/2, from the +y coherent state.
    Anticoherent { t: u32 },
    /// Least-squeezing optimized order-t protocol with `n_c` cycles for
    /// j = N/2, from the +y coherent state.
    Optimized { t: u32, n_c: usize, seed: u64 },
    /// Given cycles, from the +y coherent state.
    Cycles { cycles: Vec<ControlCycle> },
    /// R_x(π/2) then squeezing by π/2, from the +z coherent state.
    Ghz,
}

impl GridProtocol {
    fn build(&self, ens: &Ensemble) -> Result<(Vec<Vec<crate::dd::PulseSegment>>, CVector)> {
        let spin = ens.spin();
        match self {
            GridProtocol::Anticoherent { t } => {
                let cycles = analytic_params(spin, *t, true)?;
                Ok((
                    protocol_pulses(&cycles, CHI)?,
                    ens.embed(&coherent_y(spin))?,
                ))
            }
            GridProtocol::Optimized { t, n_c, seed } => {
                let f = generate(&GenerateConfig {
                    j: spin.j(),
                    t: *t,
                    n_c: Some(*n_c),
                    seed: *seed,
                    min_squeezing: true,
                    ..GenerateConfig::default()
                })?;
                if !f.converged {
                    return Err(Error::InvalidArgument(format!(
                        "no order-{t} protocol with {n_c} cycles found (deviation {:e})",
                        f.deviation
                    )));
                }
                Ok((
                    protocol_pulses(&f.cycles, CHI)?,
                    ens.embed(&coherent_y(spin))?,
                ))
            }
            GridProtocol::Cycles { cycles } => {
                Ok((protocol_pulses(cycles, CHI)?, ens.embed(&coherent_y(spin))?))
            }
            GridProtocol::Ghz => Ok((ghz_pulses(CHI)?, ens.embed(&SpinState::basis(spin, 0))?)),
        }
    }
}

/// Sequence files; the shipped ones when unset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceFiles {
    pub full: Option<PathBuf>,
    pub rwa: Option<PathBuf>,
}

impl SequenceFiles {
    pub fn load(&self) -> Result<DcgSequences> {
        let shipped = DcgSequences::shipped();
        Ok(DcgSequences {
            full: match &self.full {
                Some(p) => DDSequence::load(p)?,
                None => shipped.full,
            },
            rwa: match &self.rwa {
                Some(p) => DDSequence::load(p)?,
                None => shipped.rwa,
            },
        })
    }
}

/// Everything a cell evaluation needs, built once per sweep.
pub struct GridContext {
    ens: Ensemble,
    psi0: CVector,
    target: Propagator,
    strategies: Vec<Strategy>,
    schedules: Vec<ControlSchedule>,
    instances: Vec<NoiseComponents>,
    sequences: DcgSequences,
}

/// Instance-averaged figures of merit of one strategy in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub strategy: Strategy,
    pub mean_distance: f64,
    pub mean_infidelity: f64,
    pub mean_noise_norm: f64,
}

impl GridContext {
    pub fn new(
        n: usize,
        protocol: &GridProtocol,
        strategies: &[Strategy],
        instances: usize,
        seed: u64,
        rwa: bool,
        files: &SequenceFiles,
    ) -> Result<Self> {
        if instances == 0 || strategies.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one instance and one strategy".into(),
            ));
        }
        let ens = Ensemble::new(n)?;
        let (cycles, psi0) = protocol.build(&ens)?;
        let target = target_propagator(&cycles, &ens)?;
        let instances = (0..instances as u64)
            .map(|k| NoiseInstance::draw(n, rwa, task_seed(seed, k))?.unit_components())
            .collect::<Result<Vec<_>>>()?;
        let probe = LeakageProbe::new(
            ens.clone(),
            vec![instances[0].disorder.clone(), instances[0].dipolar.clone()],
        );
        let sequences = files.load()?;
        let schedules = strategies
            .iter()
            .map(|&s| protected_schedule(s, &cycles, &sequences, CHI, Some(&probe)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ens,
            psi0,
            target,
            strategies: strategies.to_vec(),
            schedules,
            instances,
            sequences,
        })
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn schedule(&self, s: Strategy) -> Option<&ControlSchedule> {
        self.strategies
            .iter()
            .position(|&x| x == s)
            .map(|i| &self.schedules[i])
    }

    pub fn sequences(&self) -> &DcgSequences {
        &self.sequences
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ens
    }

    /// Averages over instances for strategy index `k` at (δ, Δ).
    pub fn evaluate_strategy(
        &self,
        k: usize,
        delta: f64,
        dipolar: f64,
        errors: &FlipErrors,
    ) -> Result<CellStats> {
        let (mut d, mut inf, mut norm) = (0.0, 0.0, 0.0);
        for comps in &self.instances {
            let h = comps.combine(delta, dipolar);
            let u = simulate_schedule(&self.schedules[k], &self.ens, &h, errors)?;
            d += distance(&u, &self.target)?;
            inf += infidelity(&u, &self.target, &self.psi0)?;
            norm += h.operator_norm();
        }
        let m = self.instances.len() as f64;
        Ok(CellStats {
            strategy: self.strategies[k],
            mean_distance: d / m,
            mean_infidelity: inf / m,
            mean_noise_norm: norm / m,
        })
    }

    /// All strategies at (δ, Δ), in strategy order.
    pub fn evaluate(
        &self,
        delta: f64,
        dipolar: f64,
        errors: &FlipErrors,
    ) -> Result<Vec<CellStats>> {
        (0..self.strategies.len())
            .map(|k| self.evaluate_strategy(k, delta, dipolar, errors))
            .collect()
    }

    /// Parallel evaluation of many cells; output order follows `cells`.
    fn evaluate_cells(&self, cells: &[(f64, f64, FlipErrors)]) -> Result<Vec<CellStats>> {
        let ns = self.strategies.len();
        let tasks: Vec<(usize, usize)> = (0..cells.len())
            .flat_map(|c| (0..ns).map(move |k| (c, k)))
            .collect();
        with_workers(|| {
            tasks
                .par_iter()
                .map(|&(c, k)| {
                    let (delta, dipolar, errors) = &cells[c];
                    self.evaluate_strategy(k, *delta, *dipolar, errors)
                })
                .collect::<Result<Vec<_>>>()
        })?
    }

    fn provenance(&self, table: &mut Table) {
        table.set_meta("full_sequence", self.sequences.full.name());
        table.set_meta("full_sequence_sha256", self.sequences.full.source_sha256());
        table.set_meta("rwa_sequence", self.sequences.rwa.name());
        table.set_meta("rwa_sequence_sha256", self.sequences.rwa.source_sha256());
    }
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseGridConfig {
    pub n: usize,
    pub protocol: GridProtocol,
    /// log10 range of δ/χ = ‖H_dis‖/χ.
    pub delta_exp: (f64, f64),
    /// log10 range of Δ/χ = ‖H_dd‖/χ.
    pub dipolar_exp: (f64, f64),
    pub points: usize,
    pub instances: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    pub seed: u64,
    pub rwa: bool,
    #[serde(default)]
    pub sequences: SequenceFiles,
}

impl Default for NoiseGridConfig {
    fn default() -> Self {
        Self {
            n: 4,
            protocol: GridProtocol::Optimized {
                t: 2,
                n_c: 2,
                seed: 1,
            },
            delta_exp: (-3.0, -1.0),
            dipolar_exp: (-3.0, -1.0),
            points: 8,
            instances: 20,
            strategies: default_strategies(),
            seed: 0,
            rwa: true,
            sequences: SequenceFiles::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseCell {
    pub delta: f64,
    pub dipolar: f64,
    pub stats: CellStats,
}

/// Where a DCG strategy stops beating NoDD along one edge of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub strategy: Strategy,
    /// Noise strength (δ/χ on the disorder edge, Δ/χ on the dipolar edge).
    pub at: f64,
    /// Strategy's infidelity interpolated to the crossover.
    pub infidelity: f64,
}

#[derive(Clone, Debug)]
pub struct NoiseGrid {
    pub deltas: Vec<f64>,
    pub dipolars: Vec<f64>,
    pub cells: Vec<NoiseCell>,
    /// Along the smallest-Δ row, per strategy.
    pub disorder_crossovers: Vec<Crossover>,
    /// Along the smallest-δ column, per strategy.
    pub dipolar_crossovers: Vec<Crossover>,
    pub table: Table,
}

impl NoiseGrid {
    pub fn cell(&self, delta_idx: usize, dipolar_idx: usize, s: Strategy) -> Option<&NoiseCell> {
        let (d, q) = (self.deltas[delta_idx], self.dipolars[dipolar_idx]);
        self.cells
            .iter()
            .find(|c| c.delta == d && c.dipolar == q && c.stats.strategy == s)
    }

    pub fn disorder_crossover(&self, s: Strategy) -> Option<&Crossover> {
        self.disorder_crossovers.iter().find(|c| c.strategy == s)
    }

    pub fn dipolar_crossover(&self, s: Strategy) -> Option<&Crossover> {
        self.dipolar_crossovers.iter().find(|c| c.strategy == s)
    }
}

fn log_interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    let k = x
        .iter()
        .position(|&v| v >= at)
        .unwrap_or(x.len() - 1)
        .max(1);
    let t = (at.log10() - x[k - 1].log10()) / (x[k].log10() - x[k - 1].log10());
    10f64.powf(y[k - 1].log10() + t * (y[k].log10() - y[k - 1].log10()))
}

/// Crossovers of each DCG strategy against NoDD along a line of cells.
fn edge_crossovers(x: &[f64], line: &[Vec<CellStats>]) -> Vec<Crossover> {
    let Some(base) = line
        .first()
        .and_then(|v| v.iter().position(|c| c.strategy == Strategy::NoDd))
    else {
        return Vec::new();
    };
    let nodd: Vec<f64> = line.iter().map(|v| v[base].mean_distance).collect();
    let mut out = Vec::new();
    for k in 0..line[0].len() {
        let s = line[0][k].strategy;
        if s == Strategy::NoDd {
            continue;
        }
        let dist: Vec<f64> = line.iter().map(|v| v[k].mean_distance).collect();
        if let Some(at) = log_crossover(x, &dist, &nodd) {
            let inf: Vec<f64> = line.iter().map(|v| v[k].mean_infidelity).collect();
            out.push(Crossover {
                strategy: s,
                at,
                infidelity: log_interp(x, &inf, at),
            });
        }
    }
    out
}

pub fn noise_grid(cfg: &NoiseGridConfig) -> Result<NoiseGrid> {
    let ctx = GridContext::new(
        cfg.n,
        &cfg.protocol,
        &cfg.strategies,
        cfg.instances,
        cfg.seed,
        cfg.rwa,
        &cfg.sequences,
    )?;
    let deltas = log_grid(cfg.delta_exp.0, cfg.delta_exp.1, cfg.points)?;
    let dipolars = log_grid(cfg.dipolar_exp.0, cfg.dipolar_exp.1, cfg.points)?;
    let pts: Vec<(f64, f64, FlipErrors)> = deltas
        .iter()
        .flat_map(|&d| dipolars.iter().map(move |&q| (d, q, FlipErrors::none())))
        .collect();
    let stats = ctx.evaluate_cells(&pts)?;
    let ns = cfg.strategies.len();
    let per_cell: Vec<Vec<CellStats>> = stats.chunks(ns).map(<[CellStats]>::to_vec).collect();
    let cells: Vec<NoiseCell> = pts
        .iter()
        .zip(&per_cell)
        .flat_map(|(p, v)| {
            v.iter().map(move |s| NoiseCell {
                delta: p.0,
                dipolar: p.1,
                stats: *s,
            })
        })
        .collect();

    let nq = dipolars.len();
    let row: Vec<Vec<CellStats>> = (0..deltas.len())
        .map(|i| per_cell[i * nq].clone())
        .collect();
    let col: Vec<Vec<CellStats>> = (0..nq).map(|k| per_cell[k].clone()).collect();
    let disorder_crossovers = edge_crossovers(&deltas, &row);
    let dipolar_crossovers = edge_crossovers(&dipolars, &col);

    let mut table = Table::new(
        NOISE_SCHEMA,
        &[
            "delta",
            "dipolar",
            "strategy",
            "mean_distance",
            "mean_infidelity",
            "mean_noise_norm",
        ],
    );
    table.set_meta("config", serde_json::to_string(cfg)?);
    table.set_meta("seed", cfg.seed);
    table.set_meta(
        "grid",
        format!(
            "delta 10^{:?} dipolar 10^{:?} points {}",
            cfg.delta_exp, cfg.dipolar_exp, cfg.points
        ),
    );
    ctx.provenance(&mut table);
    for (name, list) in [
        ("disorder_crossover", &disorder_crossovers),
        ("dipolar_crossover", &dipolar_crossovers),
    ] {
        for c in list {
            table.set_meta(
                &format!("{name}_{}", c.strategy),
                format!("at {} infidelity {}", c.at, c.infidelity),
            );
        }
    }
    for c in &cells {
        table.push(vec![
            num(c.delta),
            num(c.dipolar),
            c.stats.strategy.to_string(),
            num(c.stats.mean_distance),
            num(c.stats.mean_infidelity),
            num(c.stats.mean_noise_norm),
        ]);
    }
    Ok(NoiseGrid {
        deltas,
        dipolars,
        cells,
        disorder_crossovers,
        dipolar_crossovers,
        table,
    })
}

/// Which pulses carry the flip-angle error ε.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlErrorType {
    /// Decoupling pulses only.
    Dd,
    /// Every pulse, ε = ε_str = ε_id.
    BpType1,
    /// Every pulse, ε = ε_str = −ε_id.
    BpType2,
}

impl ControlErrorType {
    pub const ALL: [ControlErrorType; 3] = [
        ControlErrorType::Dd,
        ControlErrorType::BpType1,
        ControlErrorType::BpType2,
    ];

    pub fn errors(self, eps: f64) -> FlipErrors {
        match self {
            ControlErrorType::Dd => FlipErrors::decoupling_only(eps),
            ControlErrorType::BpType1 => FlipErrors::type_one(eps),
            ControlErrorType::BpType2 => FlipErrors::type_two(eps),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ControlErrorType::Dd => "dd",
            ControlErrorType::BpType1 => "bp_type1",
            ControlErrorType::BpType2 => "bp_type2",
        }
    }
}

impl std::str::FromStr for ControlErrorType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown error type {s}")))
    }
}

/// Which noise term dominates at fixed ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRegime {
    /// ‖H_dd‖ = ratio·‖H_dis‖.
    Disorder,
    /// ‖H_dis‖ = ratio·‖H_dd‖.
    Interaction,
}

impl NoiseRegime {
    /// (δ, Δ) for dominant strength `s`.
    pub fn split(self, s: f64, ratio: f64) -> (f64, f64) {
        match self {
            NoiseRegime::Disorder => (s, ratio * s),
            NoiseRegime::Interaction => (ratio * s, s),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseRegime::Disorder => "disorder",
            NoiseRegime::Interaction => "interaction",
        }
    }
}

impl std::str::FromStr for NoiseRegime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [NoiseRegime::Disorder, NoiseRegime::Interaction]
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown regime {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlErrorConfig {
    pub n: usize,
    pub protocol: GridProtocol,
    pub error_type: ControlErrorType,
    pub regime: NoiseRegime,
    /// Subdominant-to-dominant norm ratio.
    pub ratio: f64,
    /// log10 range of the dominant noise norm over χ.
    pub h_exp: (f64, f64),
    pub h_points: usize,
    /// log10 range of ε; an ε = 0 column is always added.
    pub eps_exp: (f64, f64),
    pub eps_points: usize,
    pub instances: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    pub seed: u64,
    pub rwa: bool,
    #[serde(default)]
    pub sequences: SequenceFiles,
}

impl Default for ControlErrorConfig {
    fn default() -> Self {
        Self {
            n: 4,
            protocol: GridProtocol::Ghz,
            error_type: ControlErrorType::Dd,
            regime: NoiseRegime::Disorder,
            ratio: 0.1,
            h_exp: (-4.0, -2.0),
            h_points: 8,
            eps_exp: (-8.0, -0.5),
            eps_points: 16,
            instances: 20,
            strategies: default_strategies(),
            seed: 0,
            rwa: true,
            sequences: SequenceFiles::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlErrorCell {
    /// Dominant noise norm over χ.
    pub h: f64,
    pub delta: f64,
    pub dipolar: f64,
    pub eps: f64,
    pub stats: CellStats,
}

/// ε at which the best DCG strategy stops beating NoDD, for one h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub h: f64,
    pub eps_star: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ControlErrorGrid {
    pub hs: Vec<f64>,
    /// Leading 0 followed by the log grid.
    pub epss: Vec<f64>,
    pub cells: Vec<ControlErrorCell>,
    pub boundary: Vec<BoundaryPoint>,
    /// log ε* against log h over the rows with a crossing.
    pub boundary_fit: Option<PowerFit>,
    /// ε at which control errors double the best DCG distance, for each h.
    pub limit: Vec<BoundaryPoint>,
    pub limit_fit: Option<PowerFit>,
    pub table: Table,
}

impl ControlErrorGrid {
    pub fn cell(&self, h_idx: usize, eps_idx: usize, s: Strategy) -> Option<&ControlErrorCell> {
        let (h, e) = (self.hs[h_idx], self.epss[eps_idx]);
        self.cells
            .iter()
            .find(|c| c.h == h && c.eps == e && c.stats.strategy == s)
    }
}

pub fn control_error_grid(cfg: &ControlErrorConfig) -> Result<ControlErrorGrid> {
    if !(cfg.ratio > 0.0) {
        return Err(Error::InvalidArgument("norm ratio must be positive".into()));
    }
    let ctx = GridContext::new(
        cfg.n,
        &cfg.protocol,
        &cfg.strategies,
        cfg.instances,
        cfg.seed,
        cfg.rwa,
        &cfg.sequences,
    )?;
    let hs = log_grid(cfg.h_exp.0, cfg.h_exp.1, cfg.h_points)?;
    let mut epss = vec![0.0];
    epss.extend(log_grid(cfg.eps_exp.0, cfg.eps_exp.1, cfg.eps_points)?);
    let pts: Vec<(f64, f64, FlipErrors)> = hs
        .iter()
        .flat_map(|&h| {
            let (d, q) = cfg.regime.split(h, cfg.ratio);
            epss.iter().map(move |&e| (d, q, cfg.error_type.errors(e)))
        })
        .collect();
    let stats = ctx.evaluate_cells(&pts)?;
    let ns = cfg.strategies.len();
    let ne = epss.len();
    let mut cells = Vec::with_capacity(stats.len());
    for (i, chunk) in stats.chunks(ns).enumerate() {
        let (h, eps) = (hs[i / ne], epss[i % ne]);
        for s in chunk {
            cells.push(ControlErrorCell {
                h,
                delta: pts[i].0,
                dipolar: pts[i].1,
                eps,
                stats: *s,
            });
        }
    }

    let nodd = cfg.strategies.iter().position(|&s| s == Strategy::NoDd);
    let dcg: Vec<usize> = (0..ns)
        .filter(|&k| cfg.strategies[k] != Strategy::NoDd)
        .collect();
    let mut boundary = Vec::new();
    let mut limit = Vec::new();
    if !dcg.is_empty() {
        for (i, &h) in hs.iter().enumerate() {
            let row = &stats[i * ne * ns..(i + 1) * ne * ns];
            let at = |e: usize, k: usize| row[e * ns + k].mean_distance;
            let best = |e: usize| dcg.iter().map(|&k| at(e, k)).fold(f64::INFINITY, f64::min);
            let best_eps: Vec<f64> = (1..ne).map(best).collect();
            let doubled = vec![2.0 * best(0); ne - 1];
            limit.push(BoundaryPoint {
                h,
                eps_star: log_crossover(&epss[1..], &best_eps, &doubled),
            });
            if let Some(b) = nodd {
                let base: Vec<f64> = (1..ne).map(|e| at(e, b)).collect();
                boundary.push(BoundaryPoint {
                    h,
                    eps_star: log_crossover(&epss[1..], &best_eps, &base),
                });
            }
        }
    }
    let fit = |pts: &[BoundaryPoint]| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts
            .iter()
            .filter_map(|p| p.eps_star.map(|e| (p.h, e)))
            .unzip();
        fit_power_law(&x, &y)
    };
    let boundary_fit = fit(&boundary);
    let limit_fit = fit(&limit);

    let mut table = Table::new(
        CONTROL_SCHEMA,
        &[
            "h",
            "delta",
            "dipolar",
            "eps",
            "strategy",
            "mean_distance",
            "mean_infidelity",
            "mean_noise_norm",
        ],
    );
    table.set_meta("config", serde_json::to_string(cfg)?);
    table.set_meta("seed", cfg.seed);
    table.set_meta(
        "grid",
        format!(
            "h 10^{:?} x {} eps 0 + 10^{:?} x {}",
            cfg.h_exp, cfg.h_points, cfg.eps_exp, cfg.eps_points
        ),
    );
    ctx.provenance(&mut table);
    table.set_meta("boundary", serde_json::to_string(&boundary)?);
    table.set_meta("limit", serde_json::to_string(&limit)?);
    for (name, f) in [("boundary_fit", boundary_fit), ("limit_fit", limit_fit)] {
        if let Some(f) = f {
            table.set_meta(
                name,
                format!("slope {} log10_prefactor {}", f.slope, f.intercept),
            );
        }
    }
    for c in &cells {
        table.push(vec![
            num(c.h),
            num(c.delta),
            num(c.dipolar),
            num(c.eps),
            c.stats.strategy.to_string(),
            num(c.stats.mean_distance),
            num(c.stats.mean_infidelity),
            num(c.stats.mean_noise_norm),
        ]);
    }
    Ok(ControlErrorGrid {
        hs,
        epss,
        cells,
        boundary,
        boundary_fit,
        limit,
        limit_fit,
        table,
    })
}
