//! Rotation + squeezing state-preparation protocol and its optimization.
//!
//! Each cycle applies R_y(θ) then S_z(η) to the +y coherent state. The first
//! cycle always has θ = 0, so n_C cycles carry 2 n_C - 1 free parameters,
//! packed as [θ_2..θ_nC, η_1..η_nC].

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::multipole::AcEvaluator;
use crate::optim::{Minimum, MultiStart, NelderMead};
use crate::spin::{apply_squeezing, coherent_y, Spin, SpinState, YRotor};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlCycle {
    pub theta: f64,
    pub eta: f64,
}

impl ControlCycle {
    pub fn new(theta: f64, eta: f64) -> Self {
        Self { theta, eta }
    }
}

fn check_first(cycles: &[ControlCycle]) -> Result<()> {
    match cycles.first() {
        Some(c) if c.theta != 0.0 => Err(Error::InvalidArgument(format!(
            "first cycle must have θ = 0, got {}",
            c.theta
        ))),
        _ => Ok(()),
    }
}

/// Applies the protocol with a cached Jy eigendecomposition.
#[derive(Clone, Debug)]
pub struct ProtocolSimulator {
    spin: Spin,
    rotor: YRotor,
    initial: CVector,
}

impl ProtocolSimulator {
    pub fn new(spin: Spin) -> Self {
        Self {
            spin,
            rotor: YRotor::new(spin),
            initial: coherent_y(spin).into_amplitudes(),
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn initial(&self) -> &CVector {
        &self.initial
    }

    pub fn rotor(&self) -> &YRotor {
        &self.rotor
    }

    /// Runs the cycles from `psi`, skipping zero rotations.
    pub fn run_from(
        &self,
        mut psi: CVector,
        cycles: impl IntoIterator<Item = ControlCycle>,
    ) -> CVector {
        for c in cycles {
            if c.theta != 0.0 {
                psi = self.rotor.apply(c.theta, &psi);
            }
            apply_squeezing(self.spin, c.eta, &mut psi);
        }
        psi
    }

    pub fn run(&self, cycles: &[ControlCycle]) -> CVector {
        self.run_from(self.initial.clone(), cycles.iter().copied())
    }

    /// States after every pulse, starting with the initial state. Rotations by
    /// zero are still recorded so step indices line up with the schedule.
    pub fn trace(&self, cycles: &[ControlCycle]) -> Vec<(String, CVector)> {
        let mut out = vec![("initial".to_string(), self.initial.clone())];
        let mut psi = self.initial.clone();
        for (i, c) in cycles.iter().enumerate() {
            if i > 0 || c.theta != 0.0 {
                psi = self.rotor.apply(c.theta, &psi);
                out.push((format!("R{}", i + 1), psi.clone()));
            }
            apply_squeezing(self.spin, c.eta, &mut psi);
            out.push((format!("S{}", i + 1), psi.clone()));
        }
        out
    }
}

/// |ψ> = Π_i S_z(η_i) R_y(θ_i) |+y>.
pub fn apply_protocol(spin: Spin, cycles: &[ControlCycle]) -> Result<SpinState> {
    check_first(cycles)?;
    let psi = ProtocolSimulator::new(spin).run(cycles);
    SpinState::normalized(spin, psi)
}

/// |<φ|ψ>|².
pub fn state_fidelity_up_to_phase(psi: &SpinState, phi: &SpinState) -> Result<f64> {
    if psi.spin() != phi.spin() {
        return Err(Error::DimensionMismatch {
            expected: phi.spin().dim(),
            got: psi.spin().dim(),
        });
    }
    Ok(psi.overlap(phi).norm_sqr().min(1.0))
}

pub fn cycles_from_params(x: &[f64], n_c: usize) -> Vec<ControlCycle> {
    assert_eq!(x.len(), 2 * n_c - 1);
    (0..n_c)
        .map(|i| ControlCycle::new(if i == 0 { 0.0 } else { x[i - 1] }, x[n_c - 1 + i]))
        .collect()
}

pub fn params_from_cycles(cycles: &[ControlCycle]) -> Vec<f64> {
    cycles[1..]
        .iter()
        .map(|c| c.theta)
        .chain(cycles.iter().map(|c| c.eta))
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolCost {
    pub total_rotation: f64,
    pub total_squeezing: f64,
}

/// Σ|θ_i| and Σ|η_i| as given.
pub fn cost_accounting(cycles: &[ControlCycle]) -> ProtocolCost {
    ProtocolCost {
        total_rotation: cycles.iter().map(|c| c.theta.abs()).sum(),
        total_squeezing: cycles.iter().map(|c| c.eta.abs()).sum(),
    }
}

/// Representative of x modulo `period` in [lo, lo + period).
fn reduce(x: f64, period: f64, lo: f64) -> f64 {
    let r = (x - lo).rem_euclid(period) + lo;
    if r >= lo + period {
        lo
    } else {
        r
    }
}

/// Canonical representative of an equivalent protocol, for reporting.
///
/// R_y(π) commutes with S_z and fixes |+y> up to phase, and an extra R_y(π) at
/// the end is a rotation of the final state, so every θ_i is defined mod π and
/// is reported in [0, π). The mirror (θ, η) -> (-θ, -η) yields the complex
/// conjugate state up to a rotation; of the two mirror images the one with
/// θ_2 in [0, π/2] is kept. Each η_i is reduced to (-P/2, P/2] with P the
/// squeezing recurrence period.
pub fn canonical_cycles(spin: Spin, cycles: &[ControlCycle]) -> Vec<ControlCycle> {
    let p = spin.squeezing_period();
    let form = |sign: f64| -> Vec<ControlCycle> {
        cycles
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let th = if i == 0 {
                    0.0
                } else {
                    reduce(sign * c.theta, PI, 0.0)
                };
                let mut eta = reduce(sign * c.eta, p, -p / 2.0);
                if eta == -p / 2.0 {
                    eta = p / 2.0;
                }
                ControlCycle::new(th, eta)
            })
            .collect()
    };
    let plus = form(1.0);
    match plus.get(1) {
        Some(c) if c.theta > FRAC_PI_2 => form(-1.0),
        _ => plus,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Budget {
    pub max_starts: usize,
    pub max_evals_per_start: usize,
    /// Deviation at which the search stops and the result counts as converged.
    pub target: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_starts: 32,
            max_evals_per_start: 6000,
            target: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeOptions {
    pub budget: Budget,
    pub seed: u64,
    pub nelder_mead: NelderMead,
    /// Starts per parallel batch.
    pub batch: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            budget: Budget::default(),
            seed: 0,
            nelder_mead: NelderMead::default(),
            batch: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub spin: Spin,
    pub t: u32,
    pub cycles: Vec<ControlCycle>,
    pub final_state: SpinState,
    pub deviation: f64,
    pub evaluations: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Objective 1 - A_t over the packed parameter vector.
pub struct ProtocolObjective {
    sim: ProtocolSimulator,
    ac: AcEvaluator,
    n_c: usize,
}

impl ProtocolObjective {
    pub fn new(spin: Spin, t: u32, n_c: usize) -> Result<Self> {
        if n_c == 0 {
            return Err(Error::InvalidArgument("n_C must be at least 1".into()));
        }
        Ok(Self {
            sim: ProtocolSimulator::new(spin),
            ac: AcEvaluator::new(spin, t)?,
            n_c,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n_c - 1
    }

    pub fn deviation(&self, x: &[f64]) -> f64 {
        self.ac
            .deviation(&self.sim.run(&cycles_from_params(x, self.n_c)))
    }

    pub fn deviation_of(&self, cycles: &[ControlCycle]) -> f64 {
        self.ac.deviation(&self.sim.run(cycles))
    }

    /// Uniform θ in [-π, π], η in [-π/2, π/2].
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x: Vec<f64> = (1..self.n_c).map(|_| rng.random_range(-PI..=PI)).collect();
        x.extend((0..self.n_c).map(|_| rng.random_range(-FRAC_PI_2..=FRAC_PI_2)));
        x
    }

    fn result(
        &self,
        m: &Minimum,
        evaluations: usize,
        restarts_used: usize,
        target: f64,
    ) -> Result<OptimizationResult> {
        let cycles = cycles_from_params(&m.x, self.n_c);
        let psi = self.sim.run(&cycles);
        let deviation = self.ac.deviation(&psi);
        Ok(OptimizationResult {
            spin: self.sim.spin(),
            t: self.ac.order(),
            final_state: SpinState::normalized(self.sim.spin(), psi)?,
            cycles,
            deviation,
            evaluations,
            restarts_used,
            converged: deviation < target,
        })
    }
}

/// Multi-start Nelder-Mead on 1 - A_t.
pub fn optimize_protocol(
    spin: Spin,
    t: u32,
    n_c: usize,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    let obj = ProtocolObjective::new(spin, t, n_c)?;
    let nm = NelderMead {
        max_evals: opts.budget.max_evals_per_start,
        ..opts.nelder_mead.clone()
    };
    let ms = MultiStart {
        starts: opts.budget.max_starts,
        batch: opts.batch,
        target: Some(opts.budget.target),
        seed: opts.seed,
    };
    let res = ms.run(&nm, |x| obj.deviation(x), |r| obj.sample(r));
    obj.result(
        res.best(),
        res.evaluations(),
        res.runs.len(),
        opts.budget.target,
    )
}

/// Weight of Σ|η| in the squeezing-regularized polish.
pub const SQUEEZING_WEIGHT: f64 = 1e-4;

/// Table-1 style search: among anticoherent solutions, the one with the least
/// total squeezing (ties broken by total rotation), both measured on
/// [`canonical_cycles`].
///
/// Every start is run to completion; solutions below `ac_threshold` are
/// polished on deviation + w Σ|η| and then on the deviation alone.
pub fn optimize_min_squeezing(
    spin: Spin,
    t: u32,
    n_c: usize,
    opts: &OptimizeOptions,
    ac_threshold: f64,
) -> Result<OptimizationResult> {
    let obj = ProtocolObjective::new(spin, t, n_c)?;
    let nm = NelderMead {
        max_evals: opts.budget.max_evals_per_start,
        ..opts.nelder_mead.clone()
    };
    let ms = MultiStart {
        starts: opts.budget.max_starts,
        batch: opts.batch,
        target: None,
        seed: opts.seed,
    };
    let res = ms.run(&nm, |x| obj.deviation(x), |r| obj.sample(r));
    let mut evaluations = res.evaluations();
    let fine = NelderMead {
        initial_step: 1e-3,
        ..nm.clone()
    };
    let mut best: Option<(f64, f64, Minimum)> = None;
    for run in res.runs.iter().filter(|r| r.f < ac_threshold) {
        let penalized = fine.minimize(
            |x| {
                obj.deviation(x)
                    + SQUEEZING_WEIGHT * x[n_c - 1..].iter().map(|e| e.abs()).sum::<f64>()
            },
            &run.x,
        );
        let polished = fine.minimize(|x| obj.deviation(x), &penalized.x);
        evaluations += penalized.evals + polished.evals;
        let cand = if polished.f < ac_threshold {
            polished
        } else {
            run.clone()
        };
        let cost = cost_accounting(&canonical_cycles(spin, &cycles_from_params(&cand.x, n_c)));
        let key = (round6(cost.total_squeezing), round6(cost.total_rotation));
        let better = match &best {
            None => true,
            Some((s, r, _)) => key < (*s, *r),
        };
        if better {
            best = Some((key.0, key.1, cand));
        }
    }
    let chosen = match best {
        Some((_, _, m)) => m,
        None => res.best().clone(),
    };
    obj.result(&chosen, evaluations, res.runs.len(), opts.budget.target)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// arccot(sqrt 2).
fn arccot_sqrt2() -> f64 {
    (1.0 / 2f64.sqrt()).atan()
}

/// Power-law squeezing seeds for the order-2 protocol at large j.
pub fn powerlaw_seeds(spin: Spin) -> (f64, f64) {
    let j = spin.j();
    (3.0 / (4.0 * (2.0 * j).sqrt()), 5.0 / (4.0 * j))
}

/// Cycles of the order-2 protocol with the given second and third squeezing.
pub fn order2_cycles(spin: Spin, eta2: f64, eta3: f64) -> Vec<ControlCycle> {
    vec![
        ControlCycle::new(0.0, FRAC_PI_2),
        ControlCycle::new(-PI / (4.0 * spin.j()), eta2),
        ControlCycle::new(FRAC_PI_2, eta3),
    ]
}

/// Closed-form parameters where they exist.
///
/// t = 1: the cat state in one cycle. t = 2: fixed rotations with exact
/// squeezing for j = 2 (tetrahedron) and j = 3 (octahedron, also order 3), and
/// power-law squeezing for larger j, optionally refined by a local search.
pub fn analytic_params(spin: Spin, t: u32, refine: bool) -> Result<Vec<ControlCycle>> {
    let two_j = spin.two_j();
    match (t, two_j) {
        (1, _) if two_j >= 2 => Ok(vec![ControlCycle::new(0.0, FRAC_PI_2)]),
        (2, 4) => Ok(order2_cycles(
            spin,
            -arccot_sqrt2() / 2.0,
            arccot_sqrt2() / 4.0,
        )),
        (2 | 3, 6) => Ok(order2_cycles(
            spin,
            -arccot_sqrt2() / 2.0,
            (PI - (2.0 * 2f64.sqrt()).atan()) / 8.0,
        )),
        (2, n) if n > 6 => {
            let (e2, e3) = powerlaw_seeds(spin);
            if refine {
                let (e2, e3, _) = refine_order2(spin, e2, e3)?;
                Ok(order2_cycles(spin, e2, e3))
            } else {
                Ok(order2_cycles(spin, e2, e3))
            }
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form parameters for j = {spin}, t = {t}; use optimize_protocol"
        ))),
    }
}

/// Local search over (η_2, η_3) of the order-2 protocol with fixed rotations.
/// Returns the refined pair and its deviation 1 - A_2.
pub fn refine_order2(spin: Spin, eta2: f64, eta3: f64) -> Result<(f64, f64, f64)> {
    let sim = ProtocolSimulator::new(spin);
    let ac = AcEvaluator::new(spin, 2)?;
    // everything before S_z(η_2) is fixed; R_y(π/2) is formed once
    let head = sim.run_from(sim.initial().clone(), [ControlCycle::new(0.0, FRAC_PI_2)]);
    let head = sim.rotor().apply(-PI / (4.0 * spin.j()), &head);
    let r3 = sim.rotor().propagator(FRAC_PI_2);
    let f = |x: &[f64]| {
        let mut psi = head.clone();
        apply_squeezing(spin, x[0], &mut psi);
        let mut psi = r3.apply(&psi);
        apply_squeezing(spin, x[1], &mut psi);
        ac.deviation(&psi)
    };
    let step = 0.2 * eta2.abs().min(eta3.abs()).max(1e-6);
    let nm = NelderMead {
        initial_step: step,
        ..NelderMead::default()
    };
    let m = nm.minimize(f, &[eta2, eta3]);
    Ok((m.x[0], m.x[1], m.f))
}

/// 1 - A_s for every order s = 1..=t.
pub fn deviations_by_order(state: &SpinState, t: u32) -> Result<Vec<f64>> {
    (1..=t)
        .map(|s| Ok(AcEvaluator::new(state.spin(), s)?.deviation(state.amplitudes())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::multipole::{ac_deviation_state, ac_measure_state};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spin(tj: u32) -> Spin {
        Spin::from_two_j(tj).unwrap()
    }

    #[test]
    fn empty_protocol_is_initial_state() {
        let s = spin(5);
        let out = apply_protocol(s, &[]).unwrap();
        assert_eq!(out, coherent_y(s));
        assert!(apply_protocol(s, &[ControlCycle::new(0.1, 0.2)]).is_err());
    }

    #[test]
    fn single_cycle_cat_state() {
        for tj in 2..=20 {
            let st = apply_protocol(spin(tj), &[ControlCycle::new(0.0, FRAC_PI_2)]).unwrap();
            assert!(ac_measure_state(&st, 1).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn tetrahedron_from_closed_form() {
        let s = spin(4);
        let st = apply_protocol(s, &analytic_params(s, 2, false).unwrap()).unwrap();
        // c1 |2,-2> + c2 |2,0> + c1 |2,2>
        let c1 = C64::new(-1.0 / 2f64.sqrt(), 1.0) / 6f64.sqrt();
        let c2 = C64::new(2f64.sqrt(), 1.0) / 6f64.sqrt();
        let mut v = CVector::zeros(5);
        v[0] = c1;
        v[2] = c2;
        v[4] = c1;
        let want = SpinState::new(s, v).unwrap();
        assert_abs_diff_eq!(
            state_fidelity_up_to_phase(&st, &want).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(ac_deviation_state(&st, 2).unwrap() < 1e-12);
    }

    #[test]
    fn squeezing_values_for_j2() {
        let cyc = analytic_params(spin(4), 2, false).unwrap();
        // arccot(x) = π/2 - atan(x)
        let acot = FRAC_PI_2 - 2f64.sqrt().atan();
        assert_abs_diff_eq!(cyc[1].eta, -acot / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cyc[2].eta, acot / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cyc[1].eta, -0.307740, epsilon = 1e-6);
        assert_abs_diff_eq!(cyc[2].eta, 0.153870, epsilon = 1e-6);
    }

    #[test]
    fn octahedron_from_closed_form() {
        let s = spin(6);
        let st = apply_protocol(s, &analytic_params(s, 3, false).unwrap()).unwrap();
        let a = st.amplitudes();
        // c1 |3,-3> + c2 |3,-1> - c2 |3,1> - c1 |3,3>
        let c1 = (C64::new(-241.0, 22.0 * 2f64.sqrt()) / 3.0).powf(0.125) * C64::new(0.0, -0.25);
        let c2 = C64::new(1.0, 11.0 * 2f64.sqrt()).powf(0.25) * C64::new(0.0, -5f64.sqrt() / 4.0)
            / 3f64.powf(0.625);
        assert_abs_diff_eq!(c1.norm(), 3f64.sqrt() / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c2.norm(), 5f64.sqrt() / 4.0, epsilon = 1e-12);
        for k in [1, 3, 5] {
            assert!(a[k].norm() < 1e-12);
        }
        assert_abs_diff_eq!(a[0].norm(), c1.norm(), epsilon = 1e-12);
        assert_abs_diff_eq!(a[2].norm(), c2.norm(), epsilon = 1e-12);
        assert!((a[0] + a[6]).norm() < 1e-12 && (a[2] + a[4]).norm() < 1e-12);
        assert!(ac_deviation_state(&st, 2).unwrap() < 1e-12);
        assert!(ac_deviation_state(&st, 3).unwrap() < 1e-12);
    }

    #[test]
    fn unsupported_closed_forms() {
        assert!(matches!(
            analytic_params(spin(4), 3, false),
            Err(Error::Unsupported(_))
        ));
        assert!(analytic_params(spin(2), 2, false).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let s = spin(3);
        let a = coherent_y(s);
        assert_abs_diff_eq!(
            state_fidelity_up_to_phase(&a, &a).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let b = SpinState::new(s, a.amplitudes() * C64::from_polar(1.0, 0.7)).unwrap();
        assert_abs_diff_eq!(
            state_fidelity_up_to_phase(&a, &b).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_eq!(
            state_fidelity_up_to_phase(&SpinState::basis(s, 0), &SpinState::basis(s, 1)).unwrap(),
            0.0
        );
        assert!(state_fidelity_up_to_phase(&a, &coherent_y(spin(2))).is_err());
    }

    #[test]
    fn cost_of_cat_protocol() {
        let cost = cost_accounting(&[ControlCycle::new(0.0, FRAC_PI_2)]);
        assert_eq!(
            cost,
            ProtocolCost {
                total_rotation: 0.0,
                total_squeezing: FRAC_PI_2
            }
        );
    }

    #[test]
    fn canonical_form_preserves_the_measure() {
        let s = spin(6);
        let cyc = vec![
            ControlCycle::new(0.0, 3.9),
            ControlCycle::new(-2.2, -0.4),
            ControlCycle::new(7.1, 0.2),
        ];
        let a = ac_deviation_state(&apply_protocol(s, &cyc).unwrap(), 3).unwrap();
        let can = canonical_cycles(s, &cyc);
        let b = ac_deviation_state(&apply_protocol(s, &can).unwrap(), 3).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert!(can[1].theta >= 0.0 && can[1].theta <= FRAC_PI_2);
        assert!(can
            .iter()
            .all(|c| c.theta >= 0.0 && c.theta < PI && c.eta.abs() <= PI));
    }

    #[test]
    fn optimizer_is_deterministic() {
        let opts = OptimizeOptions {
            seed: 3,
            budget: Budget {
                max_starts: 4,
                ..Budget::default()
            },
            ..Default::default()
        };
        let a = optimize_protocol(spin(4), 2, 2, &opts).unwrap();
        let b = optimize_protocol(spin(4), 2, 2, &opts).unwrap();
        assert_eq!(a, b);
        let psi = apply_protocol(spin(4), &a.cycles).unwrap();
        assert!((psi.amplitudes() - a.final_state.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn j2_reaches_order_two_in_two_cycles() {
        let opts = OptimizeOptions {
            seed: 1,
            ..Default::default()
        };
        let r = optimize_protocol(spin(4), 2, 2, &opts).unwrap();
        assert!(r.converged, "deviation {}", r.deviation);
        assert!(r.deviation < 1e-10);
    }

    proptest! {
        #[test]
        fn protocol_output_is_normalized(tj in 1u32..30, x in proptest::collection::vec(-10.0f64..10.0, 5)) {
            let s = spin(tj);
            let psi = ProtocolSimulator::new(s).run(&cycles_from_params(&x, 3));
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn packing_roundtrip(x in proptest::collection::vec(-3.0f64..3.0, 7)) {
            let cyc = cycles_from_params(&x, 4);
            prop_assert_eq!(cyc[0].theta, 0.0);
            prop_assert_eq!(params_from_cycles(&cyc), x);
        }
    }
}
