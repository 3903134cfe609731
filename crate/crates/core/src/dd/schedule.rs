//! Piecewise-constant control schedules on an ensemble, their noisy evolution,
//! and toggling-frame error operators.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{c, commutator, CMatrix, HermitianOperator, Propagator, C64, I};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Rotation { axis: [f64; 3] },
    SqueezingZ,
    Idle,
}

/// Which flip-angle error parameter a segment picks up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseRole {
    Target,
    Decoupling,
    Stretched,
    IdentityForward,
    IdentityReverse,
}

/// Rectangular pulse: H = amplitude·(1+ε)·G for `duration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub generator: Generator,
    pub amplitude: f64,
    pub duration: f64,
    pub role: PulseRole,
    #[serde(default)]
    pub flip_angle_error: f64,
}

fn unit(axis: [f64; 3]) -> Result<[f64; 3]> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if n < 1e-12 {
        return Err(Error::InvalidArgument("zero rotation axis".into()));
    }
    Ok(axis.map(|a| a / n))
}

impl PulseSegment {
    /// Rotation by `angle` at amplitude `chi`; the sign of the angle goes into the amplitude.
    pub fn rotation(axis: [f64; 3], angle: f64, chi: f64, role: PulseRole) -> Result<Self> {
        let axis = unit(axis)?;
        Self::timed(Generator::Rotation { axis }, angle, chi, role)
    }

    /// e^{−iη J_z²} at amplitude `chi`.
    pub fn squeezing(eta: f64, chi: f64, role: PulseRole) -> Result<Self> {
        Self::timed(Generator::SqueezingZ, eta, chi, role)
    }

    pub fn idle(duration: f64) -> Self {
        Self {
            generator: Generator::Idle,
            amplitude: 0.0,
            duration,
            role: PulseRole::Target,
            flip_angle_error: 0.0,
        }
    }

    fn timed(generator: Generator, angle: f64, chi: f64, role: PulseRole) -> Result<Self> {
        if !(chi > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pulse amplitude {chi} must be positive"
            )));
        }
        let amplitude = if angle < 0.0 { -chi } else { chi };
        Ok(Self {
            generator,
            amplitude,
            duration: angle.abs() / chi,
            role,
            flip_angle_error: 0.0,
        })
    }

    /// Ideal rotation or squeezing angle.
    pub fn angle(&self) -> f64 {
        self.amplitude * self.duration
    }

    /// Half amplitude, twice the duration.
    pub fn stretched(&self) -> Self {
        Self {
            amplitude: 0.5 * self.amplitude,
            duration: 2.0 * self.duration,
            role: PulseRole::Stretched,
            ..*self
        }
    }

    /// Time-antisymmetric reverse: −f(2τ − t).
    pub fn reversed(&self) -> Self {
        Self {
            amplitude: -self.amplitude,
            role: PulseRole::IdentityReverse,
            ..*self
        }
    }

    pub fn with_role(&self, role: PulseRole) -> Self {
        Self { role, ..*self }
    }

    pub fn generator_operator(&self, ens: &Ensemble) -> HermitianOperator {
        match self.generator {
            Generator::Rotation { axis } => ens.collective(axis),
            Generator::SqueezingZ => ens.jz2().clone(),
            Generator::Idle => HermitianOperator::zeros(ens.dim()),
        }
    }

    /// Control Hamiltonian including the flip-angle error.
    pub fn control_hamiltonian(&self, ens: &Ensemble) -> HermitianOperator {
        self.generator_operator(ens)
            .scale(self.amplitude * (1.0 + self.flip_angle_error))
    }

    fn same_pulse(&self, other: &Self) -> bool {
        self.generator == other.generator
            && self.amplitude.to_bits() == other.amplitude.to_bits()
            && self.duration.to_bits() == other.duration.to_bits()
            && self.flip_angle_error.to_bits() == other.flip_angle_error.to_bits()
    }
}

/// Flip-angle error parameters per pulse role.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlipErrors {
    /// ε: unprotected pulses and the forward half of identity gates.
    pub target: f64,
    pub decoupling: f64,
    pub stretched: f64,
    /// ε_id: reverse half of identity gates.
    pub identity: f64,
}

impl FlipErrors {
    pub fn none() -> Self {
        Self::default()
    }

    /// Errors in the decoupling pulses only.
    pub fn decoupling_only(eps: f64) -> Self {
        Self {
            decoupling: eps,
            ..Self::default()
        }
    }

    /// ε = ε_str = ε_id everywhere: identity gates stay exact identities.
    pub fn type_one(eps: f64) -> Self {
        Self {
            target: eps,
            decoupling: eps,
            stretched: eps,
            identity: eps,
        }
    }

    /// ε = ε_str = −ε_id: every identity gate misses the identity by O(ε).
    pub fn type_two(eps: f64) -> Self {
        Self {
            target: eps,
            decoupling: eps,
            stretched: eps,
            identity: -eps,
        }
    }

    pub fn for_role(&self, role: PulseRole) -> f64 {
        match role {
            PulseRole::Target | PulseRole::IdentityForward => self.target,
            PulseRole::Decoupling => self.decoupling,
            PulseRole::Stretched => self.stretched,
            PulseRole::IdentityReverse => self.identity,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub segments: Vec<PulseSegment>,
}

impl ControlSchedule {
    pub fn new(segments: Vec<PulseSegment>) -> Self {
        Self { segments }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn extend(&mut self, segs: impl IntoIterator<Item = PulseSegment>) {
        self.segments.extend(segs);
    }

    /// Copy with each segment's ε set from its role.
    pub fn with_errors(&self, errors: &FlipErrors) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| PulseSegment {
                flip_angle_error: errors.for_role(s.role),
                ..*s
            })
            .collect();
        Self { segments }
    }

    pub fn count_role(&self, role: PulseRole) -> usize {
        self.segments.iter().filter(|s| s.role == role).count()
    }
}

/// Stretched gate and identity gate sharing the target's first-order error.
#[derive(Clone, Debug, PartialEq)]
pub struct BalancedPair {
    pub stretched: Vec<PulseSegment>,
    pub identity: Vec<PulseSegment>,
}

/// Each segment stretched individually; the identity runs the target forward
/// and then the time-reversed, sign-flipped segments in reverse order.
pub fn balanced_pair(target: &[PulseSegment]) -> BalancedPair {
    let stretched = target.iter().map(PulseSegment::stretched).collect();
    let mut identity: Vec<PulseSegment> = target
        .iter()
        .map(|s| s.with_role(PulseRole::IdentityForward))
        .collect();
    identity.extend(target.iter().rev().map(PulseSegment::reversed));
    BalancedPair {
        stretched,
        identity,
    }
}

/// Exact piecewise evolution Π e^{−i(H_ctrl,k(1+ε_k) + H_err)Δt_k}, with the
/// flip-angle errors already stored on the segments.
pub fn evolve(
    segments: &[PulseSegment],
    ens: &Ensemble,
    h_err: Option<&HermitianOperator>,
) -> Result<Propagator> {
    let dim = ens.dim();
    if let Some(h) = h_err {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: h.dim(),
            });
        }
    }
    let mut cache: Vec<(PulseSegment, Propagator)> = Vec::new();
    let mut u = Propagator::identity(dim);
    for seg in segments {
        if seg.duration == 0.0 {
            continue;
        }
        let step = match cache.iter().find(|(s, _)| s.same_pulse(seg)) {
            Some((_, p)) => p.clone(),
            None => {
                let h = match h_err {
                    Some(h) => &seg.control_hamiltonian(ens) + h,
                    None => seg.control_hamiltonian(ens),
                };
                let p = h.eigh().exp(seg.duration);
                cache.push((*seg, p.clone()));
                p
            }
        };
        u = u.then(&step);
    }
    Ok(u)
}

/// Noise-free propagator of the ideal pulses.
pub fn ideal_propagator(segments: &[PulseSegment], ens: &Ensemble) -> Result<Propagator> {
    let clean: Vec<PulseSegment> = segments
        .iter()
        .map(|s| PulseSegment {
            flip_angle_error: 0.0,
            ..*s
        })
        .collect();
    evolve(&clean, ens, None)
}

/// Noisy evolution of a schedule with flip-angle errors assigned by pulse role.
pub fn simulate_schedule(
    schedule: &ControlSchedule,
    ens: &Ensemble,
    h_err: &HermitianOperator,
    errors: &FlipErrors,
) -> Result<Propagator> {
    evolve(&schedule.with_errors(errors).segments, ens, Some(h_err))
}

pub const QUADRATURE_POINTS: usize = 32;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(QUADRATURE_POINTS))
}

/// Largest phase advance per quadrature panel.
const PANEL_PHASE: f64 = 8.0;

/// Toggling-frame data for one segment: H in the generator eigenbasis, the
/// eigenvalue gaps scaled by the amplitude, and the frame at the segment start.
struct SegmentFrame {
    h_eig: CMatrix,
    omega: Vec<f64>,
    left: CMatrix,
    duration: f64,
}

impl SegmentFrame {
    /// U(t)†HU(t) at local time s.
    fn toggled(&self, s: f64) -> CMatrix {
        let d = self.h_eig.nrows();
        let mut m = self.h_eig.clone();
        for q in 0..d {
            for p in 0..d {
                m[(p, q)] *= C64::from_polar(1.0, self.omega[p * d + q] * s);
            }
        }
        &self.left * m * self.left.adjoint()
    }

    /// ∫_0^s U†HU exactly.
    fn integral_to(&self, s: f64) -> CMatrix {
        let d = self.h_eig.nrows();
        let mut m = self.h_eig.clone();
        for q in 0..d {
            for p in 0..d {
                let w = self.omega[p * d + q];
                let f = if (w * s).abs() < 1e-8 {
                    C64::new(s, 0.5 * w * s * s)
                } else {
                    (C64::from_polar(1.0, w * s) - c(1.0)) / (I * w)
                };
                m[(p, q)] *= f;
            }
        }
        &self.left * m * self.left.adjoint()
    }

    fn panels(&self) -> usize {
        let spread = self.omega.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        ((spread * self.duration / PANEL_PHASE).ceil() as usize).max(1)
    }
}

/// Walks the schedule and yields per-segment toggling frames.
fn frames(
    segments: &[PulseSegment],
    ens: &Ensemble,
    h: &HermitianOperator,
) -> Result<Vec<SegmentFrame>> {
    if h.dim() != ens.dim() {
        return Err(Error::DimensionMismatch {
            expected: ens.dim(),
            got: h.dim(),
        });
    }
    let d = ens.dim();
    let mut u = Propagator::identity(d);
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments.iter().filter(|s| s.duration > 0.0) {
        let g = seg.generator_operator(ens);
        let eig = g.eigh();
        let a = seg.amplitude * (1.0 + seg.flip_angle_error);
        let omega: Vec<f64> = (0..d * d)
            .map(|k| a * (eig.values[k / d] - eig.values[k % d]))
            .collect();
        let h_eig = eig.vectors.adjoint() * h.matrix() * &eig.vectors;
        let left = u.matrix().adjoint() * &eig.vectors;
        out.push(SegmentFrame {
            h_eig,
            omega,
            left,
            duration: seg.duration,
        });
        u = u.then(&eig.exp(a * seg.duration));
    }
    Ok(out)
}

/// Φ^[1] = ∫_0^T U†(t) H U(t) dt by 32-point Gauss–Legendre panels.
pub fn first_order_error(
    segments: &[PulseSegment],
    ens: &Ensemble,
    h: &HermitianOperator,
) -> Result<HermitianOperator> {
    let (x, w) = gl32();
    let d = ens.dim();
    let mut acc = CMatrix::zeros(d, d);
    for f in frames(segments, ens, h)? {
        let panels = f.panels();
        let width = f.duration / panels as f64;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(w) {
                acc += f.toggled(mid + 0.5 * width * xi) * c(0.5 * width * wi);
            }
        }
    }
    Ok(HermitianOperator::symmetrized(acc))
}

/// H_eff = Φ^[1]/τ, the finite-duration error Hamiltonian.
pub fn finite_duration_error(
    segments: &[PulseSegment],
    ens: &Ensemble,
    h: &HermitianOperator,
) -> Result<HermitianOperator> {
    let tau: f64 = segments.iter().map(|s| s.duration).sum();
    if tau == 0.0 {
        return Ok(HermitianOperator::zeros(ens.dim()));
    }
    Ok(first_order_error(segments, ens, h)?.scale(1.0 / tau))
}

/// Φ^[1] from the closed-form segment integrals; the quadrature cross-check.
pub fn first_order_error_exact(
    segments: &[PulseSegment],
    ens: &Ensemble,
    h: &HermitianOperator,
) -> Result<HermitianOperator> {
    let d = ens.dim();
    let mut acc = CMatrix::zeros(d, d);
    for f in frames(segments, ens, h)? {
        acc += f.integral_to(f.duration);
    }
    Ok(HermitianOperator::symmetrized(acc))
}

/// Φ^[2] = −(i/2)∫_0^T dt₁∫_0^{t₁} dt₂ [H̃(t₁), H̃(t₂)].
///
/// Within a segment the inner integral is done in closed form and the outer one
/// by Gauss–Legendre panels; segment pairs contribute [B_k, B_l] for k > l.
pub fn second_order_error(
    segments: &[PulseSegment],
    ens: &Ensemble,
    h: &HermitianOperator,
) -> Result<HermitianOperator> {
    let (x, w) = gl32();
    let d = ens.dim();
    let mut acc = CMatrix::zeros(d, d);
    let mut before = CMatrix::zeros(d, d);
    for f in frames(segments, ens, h)? {
        let panels = f.panels();
        let width = f.duration / panels as f64;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(w) {
                let s = mid + 0.5 * width * xi;
                acc += commutator(&f.toggled(s), &f.integral_to(s)) * c(0.5 * width * wi);
            }
        }
        let b = f.integral_to(f.duration);
        acc += commutator(&b, &before);
        before += b;
    }
    Ok(HermitianOperator::symmetrized(acc * (-0.5 * I)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_noise, NoiseInstance};
    use crate::linalg::max_abs;
    use std::f64::consts::PI;

    fn ens() -> Ensemble {
        Ensemble::new(3).unwrap()
    }

    fn rot(axis: [f64; 3], angle: f64) -> PulseSegment {
        PulseSegment::rotation(axis, angle, 1.0, PulseRole::Target).unwrap()
    }

    fn dist(u: &Propagator, v: &Propagator) -> f64 {
        let d = u.dim() as f64;
        let tr: C64 = (u.matrix() * v.matrix().adjoint()).trace();
        (1.0 - tr.norm() / d).max(0.0).sqrt()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(32);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..63 {
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k)).sum();
            let want = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert!((got - want).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn identity_gate_is_identity() {
        let e = ens();
        for target in [
            vec![rot([0.0, 1.0, 0.0], 0.9)],
            vec![PulseSegment::squeezing(-1.1, 1.0, PulseRole::Target).unwrap()],
            vec![
                rot([1.0, 0.0, 0.0], PI / 2.0),
                PulseSegment::squeezing(PI / 2.0, 1.0, PulseRole::Target).unwrap(),
            ],
        ] {
            let bp = balanced_pair(&target);
            let u = ideal_propagator(&bp.identity, &e).unwrap();
            assert!(max_abs(&(u.matrix() - CMatrix::identity(8, 8))) < 1e-12);
            let s = ideal_propagator(&bp.stretched, &e).unwrap();
            let t = ideal_propagator(&target, &e).unwrap();
            assert!(max_abs(&(s.matrix() - t.matrix())) < 1e-12);
            let tau: f64 = target.iter().map(|s| s.duration).sum();
            let tau_s: f64 = bp.stretched.iter().map(|s| s.duration).sum();
            assert!((tau_s - 2.0 * tau).abs() < 1e-15);
        }
    }

    #[test]
    fn balanced_pair_members_share_first_order_error() {
        let e = ens();
        let (_, h) = sample_noise(3, 0.3, 0.2, false, 8).unwrap();
        for target in [
            vec![rot([0.0, 1.0, 0.0], PI / 2.0)],
            vec![PulseSegment::squeezing(0.7, 1.0, PulseRole::Target).unwrap()],
            vec![
                rot([0.0, 1.0, 0.0], -1.3),
                PulseSegment::squeezing(0.4, 1.0, PulseRole::Target).unwrap(),
            ],
        ] {
            let bp = balanced_pair(&target);
            let a = finite_duration_error(&bp.stretched, &e, &h).unwrap();
            let b = finite_duration_error(&bp.identity, &e, &h).unwrap();
            let scale = max_abs(a.matrix());
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-8 * scale);
        }
    }

    #[test]
    fn squeezing_error_is_the_noise_itself() {
        let e = Ensemble::new(4).unwrap();
        let (_, h) = sample_noise(4, 0.6, 0.9, true, 3).unwrap();
        let seg = [PulseSegment::squeezing(1.2, 1.0, PulseRole::Target).unwrap()];
        let heff = finite_duration_error(&seg, &e, &h).unwrap();
        assert!(max_abs(&(heff.matrix() - h.matrix())) < 1e-12);
    }

    #[test]
    fn zero_noise_gives_zero_error() {
        let e = ens();
        let z = HermitianOperator::zeros(8);
        let seg = [rot([1.0, 0.0, 0.0], 1.0)];
        assert_eq!(
            max_abs(finite_duration_error(&seg, &e, &z).unwrap().matrix()),
            0.0
        );
        assert_eq!(
            max_abs(second_order_error(&seg, &e, &z).unwrap().matrix()),
            0.0
        );
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let e = Ensemble::new(4).unwrap();
        let (_, h) = sample_noise(4, 1.0, 1.0, false, 1).unwrap();
        let segs = vec![
            rot([0.0, 1.0, 0.0], 2.3),
            PulseSegment::squeezing(-2.9, 1.0, PulseRole::Target).unwrap(),
            rot([1.0, 1.0, 1.0], 4.0 * PI / 3.0),
        ];
        let a = first_order_error(&segs, &e, &h).unwrap();
        let b = first_order_error_exact(&segs, &e, &h).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn quadrature_matches_fine_step_integration() {
        let e = ens();
        let (_, h) = sample_noise(3, 0.5, 0.5, false, 21).unwrap();
        let segs = vec![
            rot([0.3, 1.0, -0.2], 1.7),
            PulseSegment::squeezing(0.8, 1.0, PulseRole::Target).unwrap(),
        ];
        let a = first_order_error(&segs, &e, &h).unwrap();
        // Midpoint rule on a 10× finer grid than one panel per radian.
        let mut acc = CMatrix::zeros(8, 8);
        let mut u = Propagator::identity(8);
        for seg in &segs {
            let steps = 20_000;
            let dt = seg.duration / steps as f64;
            let g = seg.control_hamiltonian(&e);
            let half = g.eigh().exp(0.5 * dt);
            let full = g.eigh().exp(dt);
            for _ in 0..steps {
                let mid = u.then(&half);
                acc += mid.matrix().adjoint() * h.matrix() * mid.matrix() * c(dt);
                u = u.then(&full);
            }
        }
        assert!(max_abs(&(a.matrix() - acc)) < 1e-7);
    }

    #[test]
    fn rotation_error_has_traceless_dipolar_part() {
        let n = 3;
        let e = Ensemble::new(n).unwrap();
        let inst = NoiseInstance::draw(n, true, 4).unwrap();
        let hd = inst.dipolar_hamiltonian().unwrap();
        let seg = [rot([0.4, 1.0, 0.3], 1.9)];
        let heff = finite_duration_error(&seg, &e, &hd).unwrap();
        let dim = (1 << n) as f64;
        let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for d in &inst.dipolar {
            let mut tr = 0.0;
            for a in axes {
                let op = crate::ensemble::pair_operator(n, d.i, d.j, a, a);
                tr += crate::linalg::hs_inner(&op, heff.matrix()).re / (dim / 16.0);
            }
            // Σ_α K_αα = Δ tr[3M − I].
            assert!(tr.abs() < 1e-10, "trace {tr}");
        }
    }

    #[test]
    fn magnus_terms_reproduce_evolution() {
        let e = ens();
        let segs = vec![
            rot([0.0, 1.0, 0.0], 1.2),
            PulseSegment::squeezing(0.9, 1.0, PulseRole::Target).unwrap(),
        ];
        let v = ideal_propagator(&segs, &e).unwrap();
        let mut prev = f64::NAN;
        for s in [1e-2, 5e-3] {
            let (_, h) = sample_noise(3, s, s, false, 2).unwrap();
            let u = evolve(&segs, &e, Some(&h)).unwrap();
            let p1 = first_order_error(&segs, &e, &h).unwrap();
            let p2 = second_order_error(&segs, &e, &h).unwrap();
            let approx = v.matrix() * (&p1 + &p2).eigh().exp(1.0).matrix();
            let resid = dist(&u, &Propagator::new_unchecked(approx));
            if prev.is_finite() {
                // Third-order residual: halving the noise divides it by about 8.
                assert!(resid < prev / 5.0, "{resid} vs {prev}");
            }
            prev = resid;
        }
    }

    #[test]
    fn flip_errors_by_role() {
        let t = FlipErrors::type_two(0.01);
        assert_eq!(t.for_role(PulseRole::IdentityReverse), -0.01);
        assert_eq!(t.for_role(PulseRole::IdentityForward), 0.01);
        let d = FlipErrors::decoupling_only(0.02);
        assert_eq!(d.for_role(PulseRole::Target), 0.0);
        assert_eq!(d.for_role(PulseRole::Decoupling), 0.02);
    }

    #[test]
    fn type_one_identity_gate_stays_exact() {
        let e = ens();
        let bp = balanced_pair(&[rot([0.0, 1.0, 0.0], 0.8)]);
        let sched =
            ControlSchedule::new(bp.identity.clone()).with_errors(&FlipErrors::type_one(0.05));
        let u = evolve(&sched.segments, &e, None).unwrap();
        assert!(max_abs(&(u.matrix() - CMatrix::identity(8, 8))) < 1e-12);
        let sched = ControlSchedule::new(bp.identity).with_errors(&FlipErrors::type_two(0.05));
        let u = evolve(&sched.segments, &e, None).unwrap();
        assert!(dist(&u, &Propagator::identity(8)) > 1e-3);
    }
}
