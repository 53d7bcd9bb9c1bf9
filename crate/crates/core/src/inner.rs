//! Dynamics on the cylinder `Λ` of major-axis bounces: the inner map, its
//! approximating Hamiltonian `H_in = 2 sqrt(2E) a(t)` and the twist of its
//! long iterates.

use crate::boundary::BoundaryModel;
use crate::{Error, Result};

/// Default rescaled-energy floor for [`step_inner`].
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-3;

const IMPLICIT_TOL: f64 = 1e-13;
const MAX_FIXED_POINT: usize = 100;
const MAX_NEWTON: usize = 50;

/// A point `(E, t)` of the cylinder; `t` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderState {
    energy: f64,
    t: f64,
}

impl CylinderState {
    pub fn new(energy: f64, t: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "cylinder state needs E > 0 and finite t, got ({energy}, {t})"
            )));
        }
        Ok(Self { energy, t })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_mod1(&self) -> f64 {
        self.t.rem_euclid(1.0)
    }

    pub fn physical_energy(&self, eps: f64) -> f64 {
        self.energy / (eps * eps)
    }

    /// Density `sqrt(E)(sqrt(E) + √2 ε ȧ)` of the map's invariant area form.
    pub fn area_density(&self, eps: f64, boundary: &BoundaryModel) -> f64 {
        let se = self.energy.sqrt();
        se * (se + eps * 2.0 * boundary.a_poly().derivative(self.t, 1) / std::f64::consts::SQRT_2)
    }
}

/// One bounce along the major axis:
/// `t' = t + ε (a(t) + a(t'))/sqrt(2E)`,
/// `E' = E − 2ε sqrt(2E) ȧ(t') + 2ε² ȧ(t')²`.
pub fn step_inner(s: CylinderState, eps: f64, boundary: &BoundaryModel) -> Result<CylinderState> {
    step_inner_with_floor(s, eps, boundary, DEFAULT_ENERGY_FLOOR)
}

pub fn step_inner_with_floor(
    s: CylinderState,
    eps: f64,
    boundary: &BoundaryModel,
    floor: f64,
) -> Result<CylinderState> {
    if s.energy <= floor {
        return Err(Error::BelowEnergyFloor {
            energy: s.energy,
            floor,
        });
    }
    let a = boundary.a_poly();
    let v = (2.0 * s.energy).sqrt();
    let rate = eps / v;
    // Solve for the increment d = t' − t, whose size does not grow with t.
    let a0 = a.value(s.t);
    let residual = |d: f64| d - rate * (a0 + a.value(s.t + d));

    let mut d = 2.0 * rate * a0;
    let mut converged = false;
    for _ in 0..MAX_FIXED_POINT {
        let next = rate * (a0 + a.value(s.t + d));
        let moved = (next - d).abs();
        d = next;
        if moved <= IMPLICIT_TOL {
            converged = true;
            break;
        }
    }
    if !converged || residual(d).abs() > IMPLICIT_TOL {
        for iter in 0..=MAX_NEWTON {
            let r = residual(d);
            if r.abs() <= IMPLICIT_TOL {
                break;
            }
            if iter == MAX_NEWTON {
                return Err(Error::NoConvergence {
                    iterations: MAX_NEWTON,
                    residual: r.abs(),
                });
            }
            d -= r / (1.0 - rate * a.derivative(s.t + d, 1));
        }
    }
    let t1 = s.t + d;
    let adot = a.derivative(t1, 1);
    let energy = s.energy - 2.0 * eps * v * adot + 2.0 * eps * eps * adot * adot;
    CylinderState::new(energy, t1)
}

/// `H_in = 2 sqrt(2E) a(t)`.
pub fn h_in(s: CylinderState, boundary: &BoundaryModel) -> f64 {
    2.0 * (2.0 * s.energy).sqrt() * boundary.a_poly().value(s.t)
}

/// Runs Hamilton's equations of `H` in the auxiliary time `s` with
/// fixed-step classical RK4: `dt/ds = √2 w(t)/√E`, `dE/ds = −2 sqrt(2E) ẇ(t)`.
pub(crate) fn flow_rk4<W: Fn(f64) -> (f64, f64)>(
    s: CylinderState,
    duration: f64,
    steps_per_unit: f64,
    w: W,
) -> Result<CylinderState> {
    let n = ((duration.abs() * steps_per_unit).ceil() as usize).max(16);
    let h = duration / n as f64;
    let field = |e: f64, t: f64| {
        let (value, rate) = w(t);
        (
            std::f64::consts::SQRT_2 * value / e.sqrt(),
            -2.0 * (2.0 * e).sqrt() * rate,
        )
    };
    let (mut e, mut t) = (s.energy, s.t);
    for _ in 0..n {
        let (t1, e1) = field(e, t);
        let (t2, e2) = field(e + 0.5 * h * e1, t + 0.5 * h * t1);
        let (t3, e3) = field(e + 0.5 * h * e2, t + 0.5 * h * t2);
        let (t4, e4) = field(e + h * e3, t + h * t3);
        t += h / 6.0 * (t1 + 2.0 * t2 + 2.0 * t3 + t4);
        e += h / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
        if !(e > 0.0) {
            return Err(Error::Domain(format!("flow reached E = {e}")));
        }
    }
    CylinderState::new(e, t)
}

/// RK4 steps per unit of auxiliary time; at least 16 steps are always taken,
/// so a flow of duration `ε` uses steps of at most `ε/16`.
pub const FLOW_STEPS_PER_UNIT: f64 = 16384.0;

/// Flow of `H_in` for auxiliary time `duration`; duration `ε` approximates
/// one inner step.
pub fn flow_in(s: CylinderState, duration: f64, boundary: &BoundaryModel) -> Result<CylinderState> {
    let a = boundary.a_poly();
    flow_rk4(s, duration, FLOW_STEPS_PER_UNIT, |t| (a.value(t), a.derivative(t, 1)))
}

/// Estimate of `∂t̄/∂E` for `t̄` the time component of `Φ^p`, `p = ⌊1/ε⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistEstimate {
    pub iterations: usize,
    /// Richardson-extrapolated derivative.
    pub value: f64,
    /// Plain central difference with the coarser step.
    pub coarse: f64,
    /// Plain central difference with the finer step.
    pub fine: f64,
}

impl TwistEstimate {
    pub fn relative_gap(&self) -> f64 {
        (self.fine - self.coarse).abs() / self.value.abs()
    }
}

pub fn twist_diagnostic(s: CylinderState, eps: f64, boundary: &BoundaryModel) -> Result<TwistEstimate> {
    let p = (1.0 / eps).floor() as usize;
    let t_bar = |energy: f64| -> Result<f64> {
        let mut x = CylinderState::new(energy, s.t)?;
        for _ in 0..p {
            x = step_inner(x, eps, boundary)?;
        }
        Ok(x.t)
    };
    let central = |h: f64| -> Result<f64> { Ok((t_bar(s.energy + h)? - t_bar(s.energy - h)?) / (2.0 * h)) };
    let step = 1e-3 * s.energy;
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    Ok(TwistEstimate {
        iterations: p,
        value: (4.0 * fine - coarse) / 3.0,
        coarse,
        fine,
    })
}
