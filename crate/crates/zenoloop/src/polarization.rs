//! Single-photon polarization in the {|H>, |V>} basis, Jones-calculus style.
//!
//! Conventions:
//! * `prepare(theta)` gives cos(theta)|H> + sin(theta)|V> for theta in [0, pi/2].
//! * A half-wave plate with its fast axis at angle `a` is the reflection
//!   [[cos 2a, sin 2a], [sin 2a, -cos 2a]] — it maps |H> with axis theta/2
//!   to `prepare(theta)`.
//! * Pockels cells are ideal 90-degree rotators while active; activation
//!   failure is a stochastic no-op handled by the loop simulator.
//! * Global phase carries no physics here and is ignored throughout.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on |<psi|psi> - 1| for operations that require normalized input.
pub const NORM_TOL: f64 = 1e-9;

/// The measured observable: |H><H| - |V><V|, eigenvalue +1 on |H>, -1 on |V>.
pub struct PolarizationObservable;

impl PolarizationObservable {
    pub const EIGENVALUE_H: f64 = 1.0;
    pub const EIGENVALUE_V: f64 = -1.0;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub amp_h: Complex64,
    pub amp_v: Complex64,
}

/// Output port of a polarizing beam splitter, with its nominal polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    /// Nominal |H> port.
    Transmit,
    /// Nominal |V> port.
    Reflect,
}

impl PolarizationState {
    pub fn new(amp_h: Complex64, amp_v: Complex64) -> Self {
        Self { amp_h, amp_v }
    }

    pub fn horizontal() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn vertical() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn squared_norm(&self) -> f64 {
        self.amp_h.norm_sqr() + self.amp_v.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.squared_norm() - 1.0).abs() <= NORM_TOL
    }
}

/// cos(theta)|H> + sin(theta)|V>. `theta` must lie in [0, pi/2].
pub fn prepare(theta: f64) -> Result<PolarizationState> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid(
            "theta",
            format!("preparation angle must be in [0, pi/2], got {theta}"),
        ));
    }
    Ok(PolarizationState::new(
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(theta.sin(), 0.0),
    ))
}

/// `<O>` = |amp_h|^2 - |amp_v|^2 for a normalized state.
pub fn expectation(state: &PolarizationState) -> Result<f64> {
    let norm = state.squared_norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(state.amp_h.norm_sqr() * PolarizationObservable::EIGENVALUE_H
        + state.amp_v.norm_sqr() * PolarizationObservable::EIGENVALUE_V)
}

/// Half-wave plate with fast axis at `axis_angle`: the reflection
/// [[c, s], [s, -c]] with c = cos(2a), s = sin(2a). Unitary, hence
/// norm-preserving; applied twice it is the identity (up to phase).
pub fn hwp(state: &PolarizationState, axis_angle: f64) -> PolarizationState {
    let c = (2.0 * axis_angle).cos();
    let s = (2.0 * axis_angle).sin();
    PolarizationState::new(
        state.amp_h * c + state.amp_v * s,
        state.amp_h * s - state.amp_v * c,
    )
}

/// Rotate the polarization plane by `angle` (what an activated Pockels cell
/// does with `angle = pi/2`, up to a global phase).
pub fn rotate(state: &PolarizationState, angle: f64) -> PolarizationState {
    let c = angle.cos();
    let s = angle.sin();
    PolarizationState::new(
        state.amp_h * c - state.amp_v * s,
        state.amp_h * s + state.amp_v * c,
    )
}

/// Absorptive linear polarizer at `pass_angle`.
///
/// Returns the post-selected state (the pure state at `pass_angle`) and the
/// pass probability |<pass|psi>|^2 / <psi|psi>. Input may be unnormalized;
/// zero-norm input is an error.
pub fn polarizer_project(
    state: &PolarizationState,
    pass_angle: f64,
) -> Result<(PolarizationState, f64)> {
    let norm = state.squared_norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm {
            context: "polarizer projection",
        });
    }
    let c = pass_angle.cos();
    let s = pass_angle.sin();
    let amp = state.amp_h * c + state.amp_v * s;
    let prob = amp.norm_sqr() / norm;
    Ok((
        PolarizationState::new(Complex64::new(c, 0.0), Complex64::new(s, 0.0)),
        prob,
    ))
}

/// Route a photon through a polarizing beam splitter with cross-talk.
///
/// Ideal behavior transmits the H component and reflects the V component.
/// Cross-talk `eps` in [0, 1/2] sends an H-projected photon to the reflect
/// port (and vice versa) with probability `eps`. The two Born draws collapse
/// into one uniform: P(transmit) = |h|^2 (1-eps) + |v|^2 eps, normalized.
/// The output polarization is the chosen port's nominal one.
pub fn pbs_route<R: Rng + ?Sized>(
    state: &PolarizationState,
    crosstalk_eps: f64,
    rng: &mut R,
) -> Result<(Port, PolarizationState)> {
    if !(0.0..=0.5).contains(&crosstalk_eps) {
        return Err(Error::invalid(
            "crosstalk_eps",
            format!("must be in [0, 0.5], got {crosstalk_eps}"),
        ));
    }
    let norm = state.squared_norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm {
            context: "beam-splitter routing",
        });
    }
    let p_h = state.amp_h.norm_sqr() / norm;
    let p_transmit = p_h * (1.0 - crosstalk_eps) + (1.0 - p_h) * crosstalk_eps;
    let port = if rng.gen::<f64>() < p_transmit {
        Port::Transmit
    } else {
        Port::Reflect
    };
    let out = match port {
        Port::Transmit => PolarizationState::horizontal(),
        Port::Reflect => PolarizationState::vertical(),
    };
    Ok((port, out))
}
