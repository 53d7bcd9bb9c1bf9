//! First-order fields of the full map around the frozen map, and free-flight
//! lengths of the frozen billiard.
//!
//! All quantities use the unperturbed ellipse at the departure time `t`;
//! rates `ȧ`, `ḃ` are taken at `t` as well.

use crate::boundary::{BoundaryModel, SemiAxes};
use crate::frozen::hyperbolic_data;
use crate::{Error, Result};

/// Coefficients of `ε` in the expansion of `(φ', θ', E', t')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTerms {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

impl FTerms {
    pub fn as_array(&self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }
}

/// Frozen free flight from `φ` at angle `θ`, landing at `φ_next` mod π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFlight {
    pub length: f64,
    /// The landing point is `γ(φ_next + π)` rather than `γ(φ_next)`.
    pub crossed: bool,
}

/// Euclidean distance `|γ(φ_next) − γ(φ)|` on the ellipse with axes `a, b`.
pub fn d0(phi: f64, phi_next: f64, a: f64, b: f64) -> f64 {
    (a * (phi_next.cos() - phi.cos())).hypot(b * (phi_next.sin() - phi.sin()))
}

/// Picks the representative of `φ_next` mod π that lies ahead along the
/// launch direction `α(φ) + θ`.
pub fn free_flight(phi: f64, theta: f64, phi_next: f64, a: f64, b: f64) -> FreeFlight {
    let (sp, cp) = phi.sin_cos();
    let alpha = (b * cp).atan2(-a * sp);
    let dir = [(alpha + theta).cos(), (alpha + theta).sin()];
    let along = |target: f64| {
        let w = [a * (target.cos() - cp), b * (target.sin() - sp)];
        let len = w[0].hypot(w[1]);
        if len == 0.0 {
            return (len, f64::NEG_INFINITY);
        }
        (len, (w[0] * dir[0] + w[1] * dir[1]) / len)
    };
    let (same, same_cos) = along(phi_next);
    let (other, other_cos) = along(phi_next + std::f64::consts::PI);
    if other_cos > same_cos {
        FreeFlight {
            length: other,
            crossed: true,
        }
    } else {
        FreeFlight {
            length: same,
            crossed: false,
        }
    }
}

/// The fields `(f₁, f₂, f₃, f₄)` at the frozen collision
/// `(φ, θ) ↦ (φ_next, θ_next)` with energy `E` and time `t`.
///
/// Written without `tan(θ + α)` so the apparent pole is absent.
pub fn f_terms(
    phi_next: f64,
    theta_next: f64,
    phi: f64,
    theta: f64,
    energy: f64,
    t: f64,
    boundary: &BoundaryModel,
) -> Result<FTerms> {
    if !(energy > 0.0) {
        return Err(Error::Domain(format!("E = {energy} must be positive")));
    }
    let axes = boundary.semi_axes(t);
    Ok(f_terms_at(phi_next, theta_next, phi, theta, energy, &axes))
}

pub(crate) fn f_terms_at(
    phi_next: f64,
    theta_next: f64,
    phi: f64,
    theta: f64,
    energy: f64,
    axes: &SemiAxes,
) -> FTerms {
    let SemiAxes { a, a_dot, b, b_dot, .. } = *axes;
    let v = (2.0 * energy).sqrt();
    let flight = free_flight(phi, theta, phi_next, a, b).length;
    let (sp, cp) = phi.sin_cos();
    let alpha = (b * cp).atan2(-a * sp);
    let (s_dir, c_dir) = (theta + alpha).sin_cos();
    let (s1, c1) = phi_next.sin_cos();

    let f4 = flight / v;
    let f1 = f4 * (a_dot * c1 * s_dir - b_dot * s1 * c_dir) / (a * s1 * s_dir + b * c1 * c_dir);
    let u = axes.ellipse_normal_speed(phi_next);
    let metric = a * a * s1 * s1 + b * b * c1 * c1;
    let f2 = -2.0 * u * theta_next.cos() / v
        + (a * s1 * c1 * f4 * (a_dot * b / a - b_dot) + a * b * f1) / metric;
    let f3 = -2.0 * v * u * theta_next.sin();
    FTerms { f1, f2, f3, f4 }
}

/// Chord length from the `W₂` point with `tan(φ/2) = ξ` to its image:
/// `2a(λ+ξ²)² / ((λ²+ξ²)(1+ξ²))`.
pub fn d0_on_w2(xi: f64, a: f64, b: f64) -> f64 {
    let lambda = hyperbolic_data(a, b).lambda;
    if xi <= 1.0 {
        let x2 = xi * xi;
        2.0 * a * (lambda + x2).powi(2) / ((lambda * lambda + x2) * (1.0 + x2))
    } else {
        // divide through by ξ⁴ to stay finite for huge ξ
        let r = 1.0 / (xi * xi);
        2.0 * a * (lambda * r + 1.0).powi(2) / ((lambda * lambda * r + 1.0) * (r + 1.0))
    }
}

/// `Σ_{|n|≤N} (2a − D₀(ξ₀ λⁿ))` along the `W₂` orbit; tends to `2c`.
pub fn homoclinic_length_sum(xi0: f64, a: f64, b: f64, n: u32) -> Result<f64> {
    if !(xi0 > 0.0 && xi0.is_finite()) || n == 0 {
        return Err(Error::Domain(format!(
            "need ξ₀ > 0 and N ≥ 1, got ξ₀ = {xi0}, N = {n}"
        )));
    }
    let h = hyperbolic_data(a, b).h;
    let n = n as i32;
    Ok((-n..=n)
        .map(|k| 2.0 * a - d0_on_w2((xi0.ln() + k as f64 * h).exp(), a, b))
        .sum())
}
