//! First-order (truncated) scattering map on the cylinder, its orbit-sum
//! derivation and the approximating Hamiltonian `H_out = 2 sqrt(2E) c(t)`.

use crate::boundary::{BoundaryModel, SemiAxes};
use crate::frozen::{hyperbolic_data, w2_point};
use crate::inner::{flow_rk4, CylinderState, FLOW_STEPS_PER_UNIT};
use crate::melnikov::{domain_status, DomainStatus, SplittingConfig};
use crate::perturbation::d0_on_w2;
use crate::{Error, Result};

/// Domain predicate with its margin resolved once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGuard {
    pub cfg: SplittingConfig,
    pub margin: f64,
}

impl DomainGuard {
    pub fn new(cfg: SplittingConfig, boundary: &BoundaryModel) -> Result<Self> {
        Ok(Self {
            cfg,
            margin: cfg.margin(boundary)?,
        })
    }

    pub fn status(&self, s: CylinderState, boundary: &BoundaryModel) -> Result<DomainStatus> {
        domain_status(s.physical_energy(self.cfg.eps), s.t(), &self.cfg, self.margin, boundary)
    }
}

/// Whether [`s_truncated`] checks the scattering domain.
#[derive(Debug, Clone, Copy)]
pub enum DomainCheck<'a> {
    Enforce(&'a DomainGuard),
    /// Skip the check; for diagnostics only.
    Override,
}

/// `Ẽ = E + 2ε sqrt(2E)(b ḃ − a ȧ)/c`, `t̃ = t + 2ε c/sqrt(2E)`.
pub fn s_truncated(
    s: CylinderState,
    eps: f64,
    boundary: &BoundaryModel,
    check: DomainCheck<'_>,
) -> Result<CylinderState> {
    if let DomainCheck::Enforce(guard) = check {
        if guard.status(s, boundary)? != DomainStatus::Inside {
            return Err(Error::OutsideScatteringDomain {
                energy: s.physical_energy(eps),
                t: s.t(),
            });
        }
    }
    let SemiAxes { a, a_dot, b, b_dot, c, .. } = boundary.semi_axes(s.t());
    let v = (2.0 * s.energy()).sqrt();
    CylinderState::new(
        s.energy() + eps * 2.0 * v * (b * b_dot - a * a_dot) / c,
        s.t() + eps * 2.0 * c / v,
    )
}

/// Orbit sums behind the truncated scattering map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringSums {
    /// `Σ (f₃|Λ − f₃|W₂)`, tends to `2 sqrt(2E)(bḃ − aȧ)/c`.
    pub delta_e: f64,
    /// `Σ (f₄|Λ − f₄|W₂)`, tends to `2c/sqrt(2E)`.
    pub delta_t: f64,
    /// `Σ ξ²/((ξ²+λ)(λξ²+1))`, tends to `1/(λ²−1)`.
    pub kernel: f64,
}

/// Direct summation over `ξₙ = ξ₀ λⁿ`, `|n| ≤ N`, with `(E, t)` frozen.
pub fn scattering_sums(xi0: f64, axes: &SemiAxes, energy: f64, n: u32) -> Result<ScatteringSums> {
    if !(xi0 > 0.0) || !(energy > 0.0) {
        return Err(Error::Domain(format!("need ξ₀ > 0 and E > 0, got {xi0}, {energy}")));
    }
    let hyper = hyperbolic_data(axes.a, axes.b);
    let v = (2.0 * energy).sqrt();
    let n = n as i32;
    let mut sums = ScatteringSums {
        delta_e: 0.0,
        delta_t: 0.0,
        kernel: kernel_sum(xi0, hyper.lambda, n as u32)?,
    };
    for k in -n..=n {
        let xi = (xi0.ln() + k as f64 * hyper.h).exp();
        let p = w2_point(xi, axes.a, axes.b)?;
        let u = axes.ellipse_normal_speed(p.phi());
        // f₃ = −2 v u sin θ; on Λ, u = ȧ and sin θ = 1.
        sums.delta_e += 2.0 * v * (u * p.theta().sin() - axes.a_dot);
        sums.delta_t += (2.0 * axes.a - d0_on_w2(xi, axes.a, axes.b)) / v;
    }
    Ok(sums)
}

/// `Σ_{|n|≤N} ξₙ²/((ξₙ²+λ)(λξₙ²+1))` with `ξₙ = ξ₀ λⁿ`.
pub fn kernel_sum(xi0: f64, lambda: f64, n: u32) -> Result<f64> {
    if !(xi0 > 0.0) || !(lambda > 1.0) {
        return Err(Error::Domain(format!("need ξ₀ > 0 and λ > 1, got {xi0}, {lambda}")));
    }
    let n = n as i32;
    let h = lambda.ln();
    Ok((-n..=n)
        .map(|k| {
            // ξ²/((ξ²+λ)(λξ²+1)) = 1/((1+λ/ξ²)(λξ²+1)), finite at both ends
            let x2 = (2.0 * (xi0.ln() + k as f64 * h)).exp();
            1.0 / ((1.0 + lambda / x2) * (lambda * x2 + 1.0))
        })
        .sum())
}

/// `H_out = 2 sqrt(2E) c(t)`.
pub fn h_out(s: CylinderState, boundary: &BoundaryModel) -> f64 {
    2.0 * (2.0 * s.energy()).sqrt() * boundary.c(s.t())
}

/// Flow of `H_out`; duration `ε` approximates one truncated scattering step.
pub fn flow_out(s: CylinderState, duration: f64, boundary: &BoundaryModel) -> Result<CylinderState> {
    flow_rk4(s, duration, FLOW_STEPS_PER_UNIT, |t| {
        let ax = boundary.semi_axes(t);
        (ax.c, ax.c_dot)
    })
}
