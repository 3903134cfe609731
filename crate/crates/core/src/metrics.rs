//! Gate distance, state infidelity, Magnus-series bounds and the analytic
//! regime estimates comparing protected and unprotected pulses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, Propagator, C64};

/// Convergence radius in the general Magnus-term bound.
pub const MAGNUS_RADIUS: f64 = 1.0868;

fn check_dims(u: &Propagator, v: &Propagator) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: u.dim(),
        });
    }
    Ok(())
}

/// √(1 − |Tr(UV†)|/d), insensitive to a global phase.
///
/// Evaluated as ‖W − e^{iφ}1‖_F/√(2d) with W = UV† and φ = arg Tr W, which
/// equals the definition exactly and keeps full relative precision down to
/// distances near machine epsilon.
pub fn distance(u: &Propagator, v: &Propagator) -> Result<f64> {
    check_dims(u, v)?;
    let d = u.dim();
    let w = u.matrix() * v.matrix().adjoint();
    let tr = w.trace();
    let phase = if tr.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        tr / tr.norm()
    };
    let mut sq = 0.0;
    for (k, z) in w.iter().enumerate() {
        let diag = k % (d + 1) == 0;
        sq += if diag {
            (z - phase).norm_sqr()
        } else {
            z.norm_sqr()
        };
    }
    Ok((sq / (2.0 * d as f64)).min(1.0).sqrt())
}

/// 1 − |⟨ψ₀|V†U|ψ₀⟩|².
pub fn infidelity(u: &Propagator, v: &Propagator, psi0: &CVector) -> Result<f64> {
    check_dims(u, v)?;
    if psi0.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: psi0.len(),
        });
    }
    let a = u.apply(psi0);
    let b = v.apply(psi0);
    Ok((1.0 - b.dotc(&a).norm_sqr()).max(0.0))
}

/// Infidelity averaged over Haar-random initial states:
/// d/(d+1)·(1 − |Tr(V†U)/d|²) = d/(d+1)·(2D² − D⁴).
pub fn average_infidelity(u: &Propagator, v: &Propagator) -> Result<f64> {
    let dist = distance(u, v)?;
    let d = u.dim() as f64;
    Ok(d / (d + 1.0) * (1.0 - (1.0 - dist * dist).powi(2)))
}

/// Distance between a system-bath propagator `u` (dimension d_s·d_b, system
/// factor first) and a system-only target `v`: √(1 − ‖Γ‖_Tr/(d_s d_b)) with
/// Γ = Tr_S[U(V† ⊗ 1_B)]. With d_b = 1 this is [`distance`].
pub fn bath_distance(u: &CMatrix, v: &Propagator, d_b: usize) -> Result<f64> {
    let d_s = v.dim();
    if d_b == 0 || u.nrows() != d_s * d_b || !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_b,
            got: u.nrows(),
        });
    }
    let w = u * v.matrix().adjoint().kronecker(&CMatrix::identity(d_b, d_b));
    let mut gamma = CMatrix::zeros(d_b, d_b);
    for s in 0..d_s {
        gamma += w.view((s * d_b, s * d_b), (d_b, d_b));
    }
    let trace_norm: f64 = gamma.svd(false, false).singular_values.iter().sum();
    Ok((1.0 - trace_norm / (d_s * d_b) as f64).max(0.0).sqrt())
}

/// Upper bound on ‖Φ^[n]‖: (τ‖H‖)²/2 for n = 2, π(τ‖H‖/ξ)^n otherwise.
pub fn magnus_bound(n: u32, tau: f64, norm_h: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("Magnus order starts at 1".into()));
    }
    let x = tau * norm_h;
    Ok(if n == 2 {
        0.5 * x * x
    } else {
        general_magnus_bound(n, x)
    })
}

/// π(x/ξ)^n for every order.
pub fn general_magnus_bound(n: u32, tau_norm: f64) -> f64 {
    std::f64::consts::PI * (tau_norm / MAGNUS_RADIUS).powi(n as i32)
}

/// Analytic distance bounds and error thresholds, all in units of the pulse
/// amplitude χ (h = ‖H_err‖/χ, ε dimensionless).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    /// (1/√2) γ h.
    pub nodd_bound: f64,
    /// (1/√2) ½ (αγh)².
    pub dcg_bound: f64,
    /// 2/(γα²): the DCG bound beats the NoDD bound below this h.
    pub dcg_advantage_limit: f64,
    /// λ = √(2/(γα²)).
    pub lambda: f64,
    /// Decoupling-pulse errors: ε ≲ λ√h − h.
    pub dd_error_threshold: f64,
    /// Type-I balanced-pair errors share the decoupling-error form.
    pub type1_threshold: f64,
    /// Type-II balanced-pair errors: ε ≲ x* − h with
    /// x* = [−(β−1) + √((β−1)² + 2γα²βh)]/(γα²).
    pub type2_threshold: f64,
    /// DD-pulse errors dominate the DCG once ε ≳ h.
    pub dd_dominated_above: f64,
    /// Balanced-pair errors dominate once βγε ≳ ½(αγh)², i.e. ε ≳ γα²h²/(2β).
    pub bp_dominated_above: f64,
}

pub fn regime_thresholds(alpha: f64, beta: f64, gamma: f64, h: f64) -> Result<RegimeThresholds> {
    if !(alpha >= 1.0 && beta >= 1.0 && gamma > 0.0 && h >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need α ≥ 1, β ≥ 1, γ > 0, h ≥ 0 (got {alpha}, {beta}, {gamma}, {h})"
        )));
    }
    let ga2 = gamma * alpha * alpha;
    let lambda = (2.0 / ga2).sqrt();
    let dd = lambda * h.sqrt() - h;
    let bm1 = beta - 1.0;
    let x_star = (-bm1 + (bm1 * bm1 + 2.0 * ga2 * beta * h).sqrt()) / ga2;
    Ok(RegimeThresholds {
        nodd_bound: gamma * h / 2f64.sqrt(),
        dcg_bound: 0.5 * (alpha * gamma * h).powi(2) / 2f64.sqrt(),
        dcg_advantage_limit: 2.0 / ga2,
        lambda,
        dd_error_threshold: dd,
        type1_threshold: dd,
        type2_threshold: x_star - h,
        dd_dominated_above: h,
        bp_dominated_above: ga2 * h * h / (2.0 * beta),
    })
}
