//! The static elliptic billiard: collision map, first integral, saddle data
//! and the two separatrix branches through the major-axis orbit.
//!
//! States are `(φ, θ)` with `φ` taken modulo π (antipodal boundary points are
//! identified, which folds the two-periodic major-axis orbit to a fixed point)
//! and `θ ∈ (0, π)` the angle between the outgoing velocity and the positive
//! tangent.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::boundary::SemiAxes;
use crate::{Error, Result};

/// Distance from the saddle below which a state is snapped onto it.
const SADDLE_SNAP: f64 = 1e-10;

/// Offset applied to `θ` when the image lands exactly on a branch cut.
const BRANCH_NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenState {
    phi: f64,
    theta: f64,
}

impl FrozenState {
    /// Reduces `φ` into `[0, π)`; rejects `θ` outside `(0, π)`.
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !phi.is_finite() || !(theta > 0.0 && theta < PI) {
            return Err(Error::Domain(format!(
                "frozen state needs finite φ and θ in (0, π), got ({phi}, {theta})"
            )));
        }
        Ok(Self {
            phi: reduce_half_turn(phi),
            theta,
        })
    }

    /// The saddle `(0, π/2)`: bouncing along the major axis.
    pub fn saddle() -> Self {
        Self {
            phi: 0.0,
            theta: FRAC_PI_2,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn near_saddle(&self) -> bool {
        let d = self.phi.min(PI - self.phi);
        d < SADDLE_SNAP && (self.theta - FRAC_PI_2).abs() < SADDLE_SNAP
    }
}

/// `x mod π` in `[0, π)`, folding the rounding case `x mod π == π` to zero.
pub(crate) fn reduce_half_turn(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicData {
    /// Multiplier `(a+c)/(a−c) > 1` of the saddle.
    pub lambda: f64,
    /// `log λ`.
    pub h: f64,
    pub c: f64,
}

pub fn hyperbolic_data(a: f64, b: f64) -> HyperbolicData {
    let c = (a * a - b * b).sqrt();
    // (a+c)/(a−c) = (a+c)²/b², avoiding a − c cancellation for thin ellipses.
    let r = (a + c) / b;
    HyperbolicData {
        lambda: r * r,
        h: 2.0 * r.ln(),
        c,
    }
}

/// One collision of the billiard in the ellipse with semi-axes `a > b`.
pub fn step_frozen(s: FrozenState, a: f64, b: f64) -> Result<FrozenState> {
    if s.near_saddle() {
        return Ok(FrozenState::saddle());
    }
    match raw_step(s.phi, s.theta, a, b) {
        Some(next) => Ok(next),
        None => raw_step(s.phi, s.theta + BRANCH_NUDGE, a, b).ok_or_else(|| {
            Error::Branch(format!("image of ({}, {}) is grazing", s.phi, s.theta))
        }),
    }
}

fn raw_step(phi: f64, theta: f64, a: f64, b: f64) -> Option<FrozenState> {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let half = (b * (a * sp * ct + b * st * cp)).atan2(a * (b * cp * ct - a * sp * st));
    let phi1 = reduce_half_turn(2.0 * half - phi);
    let (sp1, cp1) = phi1.sin_cos();
    let theta1 = (-theta + (b * cp).atan2(a * sp) - (b * cp1).atan2(a * sp1)).rem_euclid(PI);
    (theta1 > 0.0 && theta1 < PI).then_some(FrozenState {
        phi: phi1,
        theta: theta1,
    })
}

/// `I = b² cos²θ − c² sin²θ sin²φ`, conserved by [`step_frozen`].
pub fn integral_i(s: FrozenState, a: f64, b: f64) -> f64 {
    let c2 = a * a - b * b;
    let (st, ct) = s.theta.sin_cos();
    b * b * ct * ct - c2 * st * st * s.phi.sin().powi(2)
}

/// Gradient of `I` in `(φ, θ, E, t)` for time-dependent axes.
pub fn integral_gradient(phi: f64, theta: f64, axes: &SemiAxes) -> [f64; 4] {
    let SemiAxes { a, a_dot, b, b_dot, c, .. } = *axes;
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let c2 = c * c;
    [
        -2.0 * c2 * st * st * sp * cp,
        -2.0 * b * b * ct * st - 2.0 * c2 * st * ct * sp * sp,
        0.0,
        2.0 * b * b_dot * ct * ct - 2.0 * (a * a_dot - b * b_dot) * st * st * sp * sp,
    ]
}

/// The two separatrix branches through the saddle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `tan θ = −b/(c sin φ)`.
    W1,
    /// `tan θ = b/(c sin φ)`; orbits contract `tan(φ/2)` by `λ` each step.
    W2,
}

pub fn separatrix_theta(phi: f64, a: f64, b: f64, branch: Branch) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::Domain(format!("separatrix graph undefined at φ = {phi}")));
    }
    let c = (a * a - b * b).sqrt();
    let w2 = b.atan2(c * phi.sin());
    Ok(match branch {
        Branch::W2 => w2,
        Branch::W1 => PI - w2,
    })
}

/// Point of `W₂` with `tan(φ/2) = ξ`, for `ξ > 0`.
pub fn w2_point(xi: f64, a: f64, b: f64) -> Result<FrozenState> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::Domain(format!("W2 coordinate ξ = {xi} must be positive")));
    }
    let c = (a * a - b * b).sqrt();
    Ok(FrozenState {
        phi: 2.0 * xi.atan(),
        theta: (b * (1.0 + xi * xi)).atan2(2.0 * c * xi),
    })
}

/// `τ = log tan(φ/2)`.
pub fn tau_coord(phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::Domain(format!("τ undefined at φ = {phi}")));
    }
    Ok((phi / 2.0).tan().ln())
}

/// Inverse of [`tau_coord`].
pub fn phi_of_tau(tau: f64) -> f64 {
    2.0 * tau.exp().atan()
}
