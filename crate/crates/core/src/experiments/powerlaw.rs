//! Large-j scaling of the order-2 squeezing parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_power_law, num, with_workers, PowerFit, Table};
use crate::error::Result;
use crate::multipole::AcEvaluator;
use crate::protocol::{order2_cycles, powerlaw_seeds, refine_order2, ProtocolSimulator};
use crate::spin::Spin;

pub const SCHEMA: &str = "powerlaw/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawConfig {
    pub js: Vec<u32>,
}

impl Default for PowerLawConfig {
    fn default() -> Self {
        Self {
            js: vec![20, 25, 32, 40, 50, 63, 80, 100, 126, 160, 200],
        }
    }
}

impl PowerLawConfig {
    pub fn range(j_min: u32, j_max: u32, points: usize) -> Result<Self> {
        let g = super::log_grid((j_min as f64).log10(), (j_max as f64).log10(), points)?;
        let mut js: Vec<u32> = g.iter().map(|x| x.round() as u32).collect();
        js.dedup();
        Ok(Self { js })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawRow {
    pub j: u32,
    pub eta2_seed: f64,
    pub eta3_seed: f64,
    pub deviation_seed: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawReport {
    pub rows: Vec<PowerLawRow>,
    pub eta2_fit: Option<PowerFit>,
    pub eta3_fit: Option<PowerFit>,
    pub table: Table,
}

fn row(j: u32) -> Result<PowerLawRow> {
    let spin = Spin::new(j as f64)?;
    let (e2, e3) = powerlaw_seeds(spin);
    let sim = ProtocolSimulator::new(spin);
    let ac = AcEvaluator::new(spin, 2)?;
    let deviation_seed = ac.deviation(&sim.run(&order2_cycles(spin, e2, e3)));
    let (eta2, eta3, deviation) = refine_order2(spin, e2, e3)?;
    Ok(PowerLawRow {
        j,
        eta2_seed: e2,
        eta3_seed: e3,
        deviation_seed,
        eta2,
        eta3,
        deviation,
    })
}

pub fn powerlaw(cfg: &PowerLawConfig) -> Result<PowerLawReport> {
    let mut js = cfg.js.clone();
    js.sort_unstable();
    js.dedup();
    let rows = with_workers(|| js.par_iter().map(|&j| row(j)).collect::<Result<Vec<_>>>())??;
    let x: Vec<f64> = rows.iter().map(|r| r.j as f64).collect();
    let eta2_fit = fit_power_law(&x, &rows.iter().map(|r| r.eta2.abs()).collect::<Vec<_>>());
    let eta3_fit = fit_power_law(&x, &rows.iter().map(|r| r.eta3.abs()).collect::<Vec<_>>());
    let mut table = Table::new(
        SCHEMA,
        &[
            "j",
            "eta2_seed",
            "eta3_seed",
            "deviation_seed",
            "eta2",
            "eta3",
            "deviation",
        ],
    );
    table.set_meta("js", format!("{js:?}"));
    for (name, f) in [("eta2_fit", eta2_fit), ("eta3_fit", eta3_fit)] {
        if let Some(f) = f {
            table.set_meta(
                name,
                format!("slope {} log10_prefactor {}", f.slope, f.intercept),
            );
        }
    }
    for r in &rows {
        table.push(vec![
            r.j.to_string(),
            num(r.eta2_seed),
            num(r.eta3_seed),
            num(r.deviation_seed),
            num(r.eta2),
            num(r.eta3),
            num(r.deviation),
        ]);
    }
    Ok(PowerLawReport {
        rows,
        eta2_fit,
        eta3_fit,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_range_report() {
        let r = powerlaw(&PowerLawConfig { js: vec![12, 8, 8] }).unwrap();
        assert_eq!(r.rows.iter().map(|r| r.j).collect::<Vec<_>>(), vec![8, 12]);
        assert!(r
            .rows
            .iter()
            .all(|r| r.deviation < 1e-6 && r.deviation <= r.deviation_seed));
        assert_eq!(r.table.rows.len(), 2);
        assert_eq!(r.table.schema(), Some(SCHEMA));
    }

    #[test]
    fn range_is_deduplicated() {
        let c = PowerLawConfig::range(20, 200, 11).unwrap();
        assert_eq!(c.js.first(), Some(&20));
        assert_eq!(c.js.last(), Some(&200));
    }
}
