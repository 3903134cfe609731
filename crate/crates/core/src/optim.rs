//! Nelder-Mead simplex search with seeded, reproducible multi-start.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop once every vertex is within this distance (max norm) of the best.
    pub xtol: f64,
    /// Stop once worst - best objective falls below this.
    pub ftol: f64,
    pub max_evals: usize,
    /// Fresh simplices rebuilt around the optimum after convergence.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.3,
            xtol: 1e-12,
            ftol: 1e-14,
            max_evals: 6000,
            restarts: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Tolerance reached before the evaluation budget ran out.
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let mut best = self.simplex_run(&mut f, x0, self.initial_step, self.max_evals);
        let mut step = self.initial_step;
        for _ in 0..self.restarts {
            let left = self.max_evals.saturating_sub(best.evals);
            if left == 0 {
                break;
            }
            step *= 0.1;
            let again = self.simplex_run(&mut f, &best.x, step, left);
            let evals = best.evals + again.evals;
            let improved = again.f < best.f;
            if improved {
                best = Minimum { evals, ..again };
            } else {
                best.evals = evals;
                best.converged &= again.converged;
                break;
            }
        }
        best
    }

    fn simplex_run(
        &self,
        f: &mut impl FnMut(&[f64]) -> f64,
        x0: &[f64],
        step: f64,
        budget: usize,
    ) -> Minimum {
        let n = x0.len();
        if n == 0 {
            return Minimum {
                x: vec![],
                f: f(&[]),
                evals: 1,
                converged: true,
            };
        }
        // adaptive coefficients (Gao and Han) keep the method effective beyond a few dimensions
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += step;
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
        let mut converged = false;
        while evals < budget {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            let spread = vals[n] - vals[0];
            let diameter = pts[1..]
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&pts[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter < self.xtol || spread < self.ftol {
                converged = true;
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / nf)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < vals[0] {
                let xe = along(alpha * beta);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            // outside contraction if the reflection helped at all, inside otherwise
            let xc = if fr < vals[n] {
                along(alpha * gamma)
            } else {
                along(-gamma)
            };
            let fc = eval(&xc, &mut evals);
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                let p: Vec<f64> = pts[i]
                    .iter()
                    .zip(&pts[0])
                    .map(|(a, b)| b + delta * (a - b))
                    .collect();
                vals[i] = eval(&p, &mut evals);
                pts[i] = p;
            }
        }
        let (ibest, _) =
            vals.iter().enumerate().fold(
                (0, f64::INFINITY),
                |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
            );
        Minimum {
            x: pts[ibest].clone(),
            f: vals[ibest],
            evals,
            converged,
        }
    }
}

/// Independent Nelder-Mead runs from seeded random starting points.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiStart {
    pub starts: usize,
    /// Starts per parallel batch; the early-exit check runs between batches, so
    /// results do not depend on the worker count.
    pub batch: usize,
    /// Stop after the first batch whose best value is below this.
    pub target: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct MultiStartResult {
    /// Every completed run, in start order.
    pub runs: Vec<Minimum>,
    pub best: usize,
}

impl MultiStartResult {
    pub fn best(&self) -> &Minimum {
        &self.runs[self.best]
    }

    pub fn evaluations(&self) -> usize {
        self.runs.iter().map(|r| r.evals).sum()
    }
}

/// Generator for start `k`: independent ChaCha stream under the master seed.
pub fn start_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

impl MultiStart {
    pub fn run<F, S>(&self, nm: &NelderMead, objective: F, sample: S) -> MultiStartResult
    where
        F: Fn(&[f64]) -> f64 + Sync,
        S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
    {
        let batch = self.batch.max(1);
        let mut runs: Vec<Minimum> = Vec::with_capacity(self.starts);
        let mut k0 = 0;
        while k0 < self.starts {
            let k1 = (k0 + batch).min(self.starts);
            let chunk: Vec<Minimum> = (k0..k1)
                .into_par_iter()
                .map(|k| {
                    let x0 = sample(&mut start_rng(self.seed, k));
                    nm.minimize(&objective, &x0)
                })
                .collect();
            runs.extend(chunk);
            k0 = k1;
            if let Some(t) = self.target {
                if runs.iter().any(|r| r.f < t) {
                    break;
                }
            }
        }
        let best = (0..runs.len()).fold(0, |b, i| if runs[i].f < runs[b].f { i } else { b });
        MultiStartResult { runs, best }
    }
}
