//! The full time-dependent collision map on `(φ, θ, E, t)`.
//!
//! Energies are rescaled: with physical speed `w` and `ε = 1/w*`, the state
//! carries `E = ε² 𝓔` and the physical speed is `v/ε` with `v = sqrt(2E)`.
//! The next collision is found by Newton's method on the implicit system
//! `γ(φ', t + ε s/v) = γ(φ, t) + s d`, in the unknowns flight length `s` and
//! landing parameter `φ'`.

use std::f64::consts::PI;

use crate::boundary::BoundaryModel;
use crate::frozen::reduce_half_turn;
use crate::solve::{brent, wrap_half_turn};
use crate::{Error, Result};

const MAX_NEWTON: usize = 50;

/// Newton stops once the position residual is below this multiple of `a`.
const NEWTON_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    phi: f64,
    theta: f64,
    energy: f64,
    t: f64,
    epsilon: f64,
}

impl PhaseState {
    /// `φ` is reduced mod π; `t` is kept unwrapped.
    pub fn new(phi: f64, theta: f64, energy: f64, t: f64, epsilon: f64) -> Result<Self> {
        if !(phi.is_finite() && t.is_finite()) {
            return Err(Error::Domain("φ and t must be finite".into()));
        }
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::Domain(format!("θ = {theta} not in (0, π)")));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::Domain(format!("E = {energy} must be positive")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("ε = {epsilon} must be positive")));
        }
        Ok(Self {
            phi: reduce_half_turn(phi),
            theta,
            energy,
            t,
            epsilon,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Rescaled energy `E`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Unwrapped time.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_mod1(&self) -> f64 {
        self.t.rem_euclid(1.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Physical energy `𝓔 = E/ε²`.
    pub fn physical_energy(&self) -> f64 {
        self.energy / (self.epsilon * self.epsilon)
    }

    pub fn speed(&self) -> f64 {
        (2.0 * self.energy).sqrt()
    }
}

/// Result of one collision together with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub state: PhaseState,
    /// The landing point lies on the lower half `φ ∈ [π, 2π)` of the curve.
    pub crossed: bool,
    /// Length of the free flight.
    pub flight: f64,
    /// Angle `θ*'` of the incoming velocity with the tangent at the landing
    /// point, so that the inward-pointing normal component is `v sin θ*'`.
    pub incidence: f64,
    /// Outward normal speed of the wall at impact.
    pub wall_speed: f64,
    pub iterations: usize,
    /// Position residual before each Newton update, then at the solution.
    pub residual_history: Vec<f64>,
    /// Residuals of: landing x, landing y, tangential momentum, normal
    /// reflection law, energy.
    pub residuals: [f64; 5],
}

/// One collision of the full map.
pub fn step_full(s: &PhaseState, boundary: &BoundaryModel) -> Result<Collision> {
    let v = s.speed();
    let guard = 2.0 * boundary.max_normal_speed();
    if v / s.epsilon <= guard {
        return Err(Error::LowEnergy {
            speed: v / s.epsilon,
            boundary_speed: guard,
        });
    }
    let raw = step_signed(s.phi, s.theta, s.energy, s.t, s.epsilon, boundary)?;
    Ok(raw.into_collision(s.epsilon))
}

/// Collision data for any real `ε`, including `ε = 0` (frozen boundary) and
/// negative values (analytic continuation used for central differences).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawCollision {
    pub phi: f64,
    pub phys_phi: f64,
    pub theta: f64,
    pub energy: f64,
    pub t: f64,
    pub flight: f64,
    pub incidence: f64,
    pub wall_speed: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub residuals: [f64; 5],
}

impl RawCollision {
    fn into_collision(self, epsilon: f64) -> Collision {
        Collision {
            state: PhaseState {
                phi: self.phi,
                theta: self.theta,
                energy: self.energy,
                t: self.t,
                epsilon,
            },
            crossed: self.phys_phi >= PI,
            flight: self.flight,
            incidence: self.incidence,
            wall_speed: self.wall_speed,
            iterations: self.iterations,
            residual_history: self.residual_history,
            residuals: self.residuals,
        }
    }
}

fn dot(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}

pub(crate) fn step_signed(
    phi: f64,
    theta: f64,
    energy: f64,
    t: f64,
    eps: f64,
    boundary: &BoundaryModel,
) -> Result<RawCollision> {
    let v = (2.0 * energy).sqrt();
    let p0 = boundary.curve_point(phi, t, true);
    let alpha = boundary.tangent_angle(phi, t);
    let psi = alpha + theta;
    let d = [psi.cos(), psi.sin()];
    let axes = boundary.semi_axes(t);
    let (a, b) = (axes.a, axes.b);

    // Forward root of the frozen ellipse chord as the initial guess.
    let qa = d[0] * d[0] / (a * a) + d[1] * d[1] / (b * b);
    let qb = 2.0 * (p0[0] * d[0] / (a * a) + p0[1] * d[1] / (b * b));
    let qc = p0[0] * p0[0] / (a * a) + p0[1] * p0[1] / (b * b) - 1.0;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    let chord = (-qb + disc.sqrt()) / (2.0 * qa);
    let x = [p0[0] + chord * d[0], p0[1] + chord * d[1]];
    let rate = eps / v;

    let newton = |mut s: f64, mut phi1: f64| -> Result<(f64, f64, usize, Vec<f64>)> {
        let mut history = Vec::new();
        let mut iterations = 0;
        loop {
            let tt = t + rate * s;
            let g = boundary.curve_point(phi1, tt, true);
            let f = [g[0] - p0[0] - s * d[0], g[1] - p0[1] - s * d[1]];
            let norm = f[0].hypot(f[1]);
            history.push(norm);
            if norm <= NEWTON_TOL * a {
                return Ok((s, phi1, iterations, history));
            }
            if iterations == MAX_NEWTON || !norm.is_finite() {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: norm,
                });
            }
            let gt = boundary.velocity(phi1, tt);
            let gp = boundary.tangent(phi1, tt);
            let j = [[gt[0] * rate - d[0], gp[0]], [gt[1] * rate - d[1], gp[1]]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            s += (-f[0] * j[1][1] + f[1] * j[0][1]) / det;
            phi1 += (-j[0][0] * f[1] + j[1][0] * f[0]) / det;
            iterations += 1;
        }
    };
    // Newton from the chord can slide back to the trivial root s = 0 when
    // the flight is short; then bracket the landing along the ray first.
    let (s, phi1, iterations, history) = match newton(chord, (x[1] / b).atan2(x[0] / a)) {
        Ok(found) if found.0 > SHORT_FLIGHT * a => found,
        first => match bracket_landing(p0, d, t, rate, boundary) {
            Some((s0, phi0)) => newton(s0, phi0)?,
            None => first?,
        },
    };
    if !(s > 0.0) {
        return Err(Error::Branch(format!("collision solve returned flight length {s}")));
    }

    let t1 = t + rate * s;
    let alpha1 = boundary.tangent_angle(phi1, t1);
    let n = boundary.outward_normal(phi1, t1);
    let u = boundary.normal_speed(phi1, t1);
    let vin = [v * d[0], v * d[1]];
    let approach = dot(vin, n);
    if approach <= eps * u {
        return Err(Error::OutwardCollision { theta: f64::NAN });
    }
    let kick = 2.0 * eps * u - 2.0 * approach;
    let vout = [vin[0] + kick * n[0], vin[1] + kick * n[1]];
    let energy1 = energy - 2.0 * eps * u * approach + 2.0 * eps * eps * u * u;
    let theta1 = (vout[1].atan2(vout[0]) - alpha1).rem_euclid(2.0 * PI);
    if !(theta1 > 0.0 && theta1 < PI) {
        return Err(Error::OutwardCollision { theta: theta1 });
    }
    let incidence = (alpha1 - psi).rem_euclid(2.0 * PI);

    // Independent reconstruction of the outgoing velocity from (E', θ').
    let g = boundary.curve_point(phi1, t1, true);
    let speed1 = (2.0 * energy1).sqrt();
    let w = [speed1 * (alpha1 + theta1).cos(), speed1 * (alpha1 + theta1).sin()];
    let tangent = [-n[1], n[0]];
    let residuals = [
        g[0] - p0[0] - s * d[0],
        g[1] - p0[1] - s * d[1],
        dot(w, tangent) - dot(vin, tangent),
        dot(w, n) + dot(vin, n) - 2.0 * eps * u,
        energy1 - 0.5 * dot(vout, vout),
    ];
    let phys_phi = phi1.rem_euclid(2.0 * PI);
    Ok(RawCollision {
        phi: reduce_half_turn(phys_phi),
        phys_phi,
        theta: theta1,
        energy: energy1,
        t: t1,
        flight: s,
        incidence,
        wall_speed: u,
        iterations,
        residual_history: history,
        residuals,
    })
}

/// Flights shorter than this fraction of the major semi-axis are taken to be
/// the trivial root at the departure point.
const SHORT_FLIGHT: f64 = 1e-6;

/// Signed distance-like function of the curve at time `t`: negative inside,
/// zero on the curve. Uses that each half of the curve is a graph over `x`.
fn outside(boundary: &BoundaryModel, p: [f64; 2], t: f64) -> f64 {
    let (a, b) = (boundary.a_poly().value(t), boundary.b_poly().value(t));
    let r = p[0] / a;
    if r.abs() >= 1.0 {
        return p[1].abs() + (p[0].abs() - a);
    }
    let sin = (1.0 - r * r).sqrt();
    p[1].abs() - b * sin * (1.0 + boundary.delta() * sin * sin)
}

/// First exit of the ray `p0 + s d` through the moving curve, located on a
/// log-spaced scan up to the curve's diameter and refined by Brent.
fn bracket_landing(p0: [f64; 2], d: [f64; 2], t: f64, rate: f64, boundary: &BoundaryModel) -> Option<(f64, f64)> {
    let point = |s: f64| [p0[0] + s * d[0], p0[1] + s * d[1]];
    let h = |s: f64| outside(boundary, point(s), t + rate * s);
    let (a, b) = (boundary.a_poly().value(t), boundary.b_poly().value(t));
    let diameter = 2.0 * a.hypot(b * (1.0 + boundary.delta().abs()));
    let n = 512;
    let at = |i: usize| diameter * 1e-10f64.powf(1.0 - i as f64 / n as f64);
    let mut lo = at(0);
    let mut hlo = h(lo);
    for i in 1..=n {
        let hi = at(i);
        let hhi = h(hi);
        if hlo < 0.0 && hhi >= 0.0 {
            let s = brent(h, lo, hi, 1e-15 * hi)?;
            let x = point(s);
            let r = (x[0] / boundary.a_poly().value(t + rate * s)).clamp(-1.0, 1.0);
            let sin = (1.0 - r * r).sqrt().copysign(x[1]);
            return Some((s, sin.atan2(r)));
        }
        lo = hi;
        hlo = hhi;
    }
    None
}

/// Which small parameter [`linear_response`] differentiates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `∂/∂ε` at `ε = 0`, `δ = 0`.
    Eps,
    /// `∂/∂δ` at `ε = 0`.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResponse {
    /// Derivative of `(φ', θ', E', t')`.
    pub value: [f64; 4],
    /// Largest gap between the extrapolated and the finer raw estimate,
    /// relative to `max(1, |value|)`.
    pub disagreement: f64,
    pub ill_conditioned: bool,
}

const RESPONSE_STEP: f64 = 1e-4;
const RESPONSE_GAP: f64 = 1e-4;

/// First-order field of the map at `(φ, θ, E, t)` by central differences
/// with one Richardson step. The state's own `ε` and the boundary's own `δ`
/// are ignored.
pub fn linear_response(
    s: &PhaseState,
    boundary: &BoundaryModel,
    direction: Direction,
) -> Result<LinearResponse> {
    let flat = boundary.unperturbed();
    let eval = |sigma: f64| -> Result<RawCollision> {
        match direction {
            Direction::Eps => step_signed(s.phi, s.theta, s.energy, s.t, sigma, &flat),
            Direction::Delta => {
                let model = boundary.with_delta(sigma)?;
                step_signed(s.phi, s.theta, s.energy, s.t, 0.0, &model)
            }
        }
    };
    let central = |sigma: f64| -> Result<[f64; 4]> {
        let p = eval(sigma)?;
        let m = eval(-sigma)?;
        let h = 2.0 * sigma;
        Ok([
            wrap_half_turn(p.phi - m.phi) / h,
            (p.theta - m.theta) / h,
            (p.energy - m.energy) / h,
            (p.t - m.t) / h,
        ])
    };
    let coarse = central(RESPONSE_STEP)?;
    let fine = central(RESPONSE_STEP / 2.0)?;
    let mut value = [0.0; 4];
    let mut disagreement: f64 = 0.0;
    for i in 0..4 {
        value[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
        disagreement = disagreement.max((value[i] - fine[i]).abs() / value[i].abs().max(1.0));
    }
    Ok(LinearResponse {
        value,
        disagreement,
        ill_conditioned: disagreement > RESPONSE_GAP,
    })
}
