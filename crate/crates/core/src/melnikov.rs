//! Splitting of the separatrix `W₂` under the moving wall (`ε`) and the
//! quartic deformation (`δ`).
//!
//! Along `W₂` the separatrix coordinate is `τ = log tan(φ/2)`; one collision
//! shifts it by `−h`. The first-order splitting is `d̄ = ε M₁ + δ M₂` with
//!
//! * `M₁ = f g / v`, `f = −ȧ b + ḃ a`, `g = 4b (2K/h)² (E′/K′ − 1 + dn²)`,
//! * `M₂ = j = −8m (a b²/c) (2K/h)³ dn sn cn`,
//!
//! all Jacobi functions taken at `2Kτ/h` with modulus fixed by `K′/K = π/h`.
//! Both closed forms are checked against brute-force sums over the orbit.

use std::f64::consts::SQRT_2;

use crate::boundary::{BoundaryModel, SemiAxes};
use crate::dynmap::{linear_response, step_signed, Direction, PhaseState};
use crate::elliptic::{solve_modulus, EllipticContext};
use crate::frozen::{hyperbolic_data, integral_gradient, w2_point, HyperbolicData};
use crate::perturbation::f_terms_at;
use crate::solve::{brent, golden_min, wrap_half_turn};
use crate::{Error, Result};

/// Everything the closed forms need at one frozen time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovFrame {
    pub t: f64,
    pub axes: SemiAxes,
    pub hyper: HyperbolicData,
    pub ctx: EllipticContext,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fgj {
    pub f: f64,
    pub g: f64,
    pub j: f64,
}

/// Values of both Melnikov functions at one point of `W₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovSample {
    pub tau: f64,
    pub t: f64,
    pub v: f64,
    pub m1: f64,
    pub m2: f64,
}

impl MelnikovFrame {
    pub fn new(t: f64, boundary: &BoundaryModel) -> Result<Self> {
        let axes = boundary.semi_axes(t);
        let hyper = hyperbolic_data(axes.a, axes.b);
        let ctx = solve_modulus(hyper.h)?;
        Ok(Self { t, axes, hyper, ctx })
    }

    /// `f = −ȧ b + ḃ a = b² d(a/b)/dt · (−1)`; vanishes at critical times of `a/b`.
    pub fn f(&self) -> f64 {
        -self.axes.a_dot * self.axes.b + self.axes.b_dot * self.axes.a
    }

    /// `g = 4b X(τ) > 0`.
    pub fn g(&self, tau: f64) -> f64 {
        4.0 * self.axes.b * self.ctx.x_of_tau(tau)
    }

    pub fn j(&self, tau: f64) -> f64 {
        let (sn, cn, dn) = self.ctx.jacobi_at(tau);
        let SemiAxes { a, b, c, .. } = self.axes;
        -8.0 * self.ctx.m * (a * b * b / c) * self.ctx.scale().powi(3) * dn * sn * cn
    }

    pub fn fgj(&self, tau: f64) -> Fgj {
        Fgj {
            f: self.f(),
            g: self.g(tau),
            j: self.j(tau),
        }
    }

    pub fn m1(&self, tau: f64, v: f64) -> f64 {
        self.f() * self.g(tau) / v
    }

    pub fn m2(&self, tau: f64) -> f64 {
        self.j(tau)
    }

    /// `d̄/δ = ε f g / (δ v) + j`.
    pub fn dbar(&self, tau: f64, v: f64, eps: f64, delta: f64) -> f64 {
        eps * self.f() * self.g(tau) / (delta * v) + self.j(tau)
    }

    /// `(τ*, max |j/g|)` over a period. `|j/g|` is even and `h`-periodic with
    /// zeros at `0` and `h/2`, so one lobe suffices.
    pub fn max_j_over_g(&self) -> (f64, f64) {
        let h = self.hyper.h;
        let (tau, neg) = golden_min(
            |tau| -(self.j(tau) / self.g(tau)).abs(),
            1e-9 * h,
            0.5 * h * (1.0 - 1e-9),
            1e-10,
        );
        (tau, -neg)
    }

    /// `φ(t) = min_τ |g/j| / √2`.
    pub fn phi(&self) -> f64 {
        1.0 / (SQRT_2 * self.max_j_over_g().1)
    }
}

pub fn m1_closed(tau: f64, t: f64, v: f64, boundary: &BoundaryModel) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("speed v = {v} must be positive")));
    }
    Ok(MelnikovFrame::new(t, boundary)?.m1(tau, v))
}

pub fn m2_closed(tau: f64, t: f64, boundary: &BoundaryModel) -> Result<f64> {
    Ok(MelnikovFrame::new(t, boundary)?.m2(tau))
}

pub fn fgj(tau: f64, t: f64, boundary: &BoundaryModel) -> Result<Fgj> {
    Ok(MelnikovFrame::new(t, boundary)?.fgj(tau))
}

pub fn phi_of_t(t: f64, boundary: &BoundaryModel) -> Result<f64> {
    Ok(MelnikovFrame::new(t, boundary)?.phi())
}

pub fn sample(tau: f64, t: f64, v: f64, boundary: &BoundaryModel) -> Result<MelnikovSample> {
    let frame = MelnikovFrame::new(t, boundary)?;
    Ok(MelnikovSample {
        tau,
        t,
        v,
        m1: frame.m1(tau, v),
        m2: frame.m2(tau),
    })
}

/// `√𝓔` threshold `|a ḃ − b ȧ| φ(t) / |δ|` of the scattering domain.
pub fn domain_threshold(t: f64, delta: f64, boundary: &BoundaryModel) -> Result<f64> {
    let frame = MelnikovFrame::new(t, boundary)?;
    Ok(frame.f().abs() * frame.phi() / delta.abs())
}

/// Outcome of a truncated sum over the `W₂` orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of summands used.
    pub terms: usize,
    /// Geometric bound on the omitted tail.
    pub tail_estimate: f64,
    /// The tail bound exceeds `1e-12` of the largest summand.
    pub truncated: bool,
}

const SERIES_FLOOR: usize = 25;
const SERIES_RTOL: f64 = 1e-13;
const SERIES_TAU_CAP: f64 = 300.0;

/// `Σₙ term(τ − n h)` over all integers `n`, truncated adaptively or at
/// `|n| ≤ fixed` when given.
fn orbit_sum<F: FnMut(f64) -> Result<f64>>(
    tau: f64,
    h: f64,
    fixed: Option<usize>,
    mut term: F,
) -> Result<SeriesSum> {
    let centre = term(tau)?;
    let mut value = centre;
    let mut scale = centre.abs();
    let mut terms = 1;
    let ratio = (-2.0 * h).exp();
    let mut tail: f64 = 0.0;
    for sign in [-1.0, 1.0] {
        let mut k = 1;
        let mut last;
        loop {
            let x = term(tau + sign * k as f64 * h)?;
            value += x;
            scale = scale.max(x.abs());
            terms += 1;
            last = x.abs();
            let done = match fixed {
                Some(n) => k >= n,
                None => {
                    k >= SERIES_FLOOR
                        && (last <= SERIES_RTOL * scale || (tau + sign * k as f64 * h).abs() > SERIES_TAU_CAP)
                }
            };
            if done {
                break;
            }
            k += 1;
        }
        tail += last * ratio / (1.0 - ratio);
    }
    Ok(SeriesSum {
        value,
        terms,
        tail_estimate: tail,
        truncated: tail > 1e-12 * scale.max(f64::MIN_POSITIVE),
    })
}

/// Brute-force Melnikov sum `Σₙ ⟨∇I(x_{n+1}), B_k(x_n)⟩` along the `W₂`
/// orbit through `τ`, with `(E, t)` held fixed.
///
/// `Direction::Eps` uses the analytic fields; `Direction::Delta` uses the
/// finite-difference response of the full map, since no closed form of the
/// fast `δ`-components is available.
pub fn m_series(
    tau: f64,
    t: f64,
    v: f64,
    boundary: &BoundaryModel,
    direction: Direction,
    fixed_terms: Option<usize>,
) -> Result<SeriesSum> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("speed v = {v} must be positive")));
    }
    let axes = boundary.semi_axes(t);
    let hyper = hyperbolic_data(axes.a, axes.b);
    let energy = 0.5 * v * v;
    orbit_sum(tau, hyper.h, fixed_terms, |tau_n| {
        let xi = tau_n.exp();
        let here = w2_point(xi, axes.a, axes.b)?;
        let next = w2_point(xi / hyper.lambda, axes.a, axes.b)?;
        let grad = integral_gradient(next.phi(), next.theta(), &axes);
        match direction {
            Direction::Eps => {
                let f = f_terms_at(next.phi(), next.theta(), here.phi(), here.theta(), energy, &axes);
                Ok(grad.iter().zip(f.as_array()).map(|(g, x)| g * x).sum())
            }
            Direction::Delta => {
                let s = PhaseState::new(here.phi(), here.theta(), energy, t, 1.0)?;
                let r = linear_response(&s, boundary, Direction::Delta)?;
                Ok(grad[0] * r.value[0] + grad[1] * r.value[1])
            }
        }
    })
}

/// `Σₙ ⟨∇I(x_{n+1}), B_{ε,δ}(x_n) − B₀(x_n)⟩` along the `W₂` orbit through
/// `τ` using the true map, `(E, t)` held fixed. Compare with `ε M₁ + δ M₂`.
pub fn true_splitting_sum(
    tau: f64,
    t: f64,
    energy: f64,
    eps: f64,
    delta: f64,
    boundary: &BoundaryModel,
    terms: usize,
) -> Result<f64> {
    let model = boundary.with_delta(delta)?;
    let axes = boundary.semi_axes(t);
    let hyper = hyperbolic_data(axes.a, axes.b);
    let sum = orbit_sum(tau, hyper.h, Some(terms), |tau_n| {
        let xi = tau_n.exp();
        let here = w2_point(xi, axes.a, axes.b)?;
        let next = w2_point(xi / hyper.lambda, axes.a, axes.b)?;
        let grad = integral_gradient(next.phi(), next.theta(), &axes);
        let img = step_signed(here.phi(), here.theta(), energy, t, eps, &model)?;
        let diff = [
            wrap_half_turn(img.phi - next.phi()),
            img.theta - next.theta(),
            img.energy - energy,
            img.t - t,
        ];
        Ok(grad.iter().zip(diff).map(|(g, x)| g * x).sum())
    })?;
    Ok(sum.value)
}

/// Parameters of the splitting function and of the domain predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingConfig {
    pub eps: f64,
    pub delta: f64,
    /// Half-width `k` of the undecided band, in `√𝓔` units. `None` selects
    /// `0.05 · max_t` of the threshold.
    pub margin_k: Option<f64>,
    /// Energies below `floor_c / |δ|` are rejected.
    pub floor_c: f64,
}

pub const DEFAULT_MARGIN_FRACTION: f64 = 0.05;
pub const DEFAULT_FLOOR_C: f64 = 1.0;

impl SplittingConfig {
    /// Enforces `ε > 0` and `|δ| ≥ 10 ε²`.
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("ε = {eps} must be positive")));
        }
        if !(delta.abs() >= 10.0 * eps * eps) || !delta.is_finite() {
            return Err(Error::Domain(format!(
                "|δ| = {} must be at least 10 ε² = {}",
                delta.abs(),
                10.0 * eps * eps
            )));
        }
        Ok(Self {
            eps,
            delta,
            margin_k: None,
            floor_c: DEFAULT_FLOOR_C,
        })
    }

    pub fn with_margin(mut self, k: f64) -> Self {
        self.margin_k = Some(k);
        self
    }

    pub fn with_floor(mut self, c: f64) -> Self {
        self.floor_c = c;
        self
    }

    /// Margin `k`, computing the default from a 256-point scan of the
    /// threshold when none was set.
    pub fn margin(&self, boundary: &BoundaryModel) -> Result<f64> {
        if let Some(k) = self.margin_k {
            return Ok(k);
        }
        let mut top: f64 = 0.0;
        for i in 0..256 {
            top = top.max(domain_threshold(i as f64 / 256.0, self.delta, boundary)?);
        }
        Ok(DEFAULT_MARGIN_FRACTION * top)
    }

    pub fn energy_floor(&self) -> f64 {
        self.floor_c / self.delta.abs()
    }
}

pub fn dbar(tau: f64, t: f64, v: f64, cfg: &SplittingConfig, boundary: &BoundaryModel) -> Result<f64> {
    Ok(MelnikovFrame::new(t, boundary)?.dbar(tau, v, cfg.eps, cfg.delta))
}

/// Roots of `d̄(·, t, v)` in `[0, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub roots: Vec<f64>,
    /// `|∂d̄/∂τ|` at each root.
    pub slopes: Vec<f64>,
    /// A root is nearly double or the sign pattern is inconsistent.
    pub indeterminate: bool,
}

impl ZeroSet {
    pub fn simple_pair(&self) -> bool {
        !self.indeterminate && self.roots.len() == 2
    }
}

const ZERO_GRID: usize = 512;
const SIMPLE_ROOT_RTOL: f64 = 1e-6;

pub fn find_zeros(t: f64, v: f64, cfg: &SplittingConfig, boundary: &BoundaryModel) -> Result<ZeroSet> {
    let frame = MelnikovFrame::new(t, boundary)?;
    Ok(zeros_in_frame(&frame, v, cfg))
}

pub(crate) fn zeros_in_frame(frame: &MelnikovFrame, v: f64, cfg: &SplittingConfig) -> ZeroSet {
    let h = frame.hyper.h;
    let d = |tau: f64| frame.dbar(tau, v, cfg.eps, cfg.delta);
    let step = h / ZERO_GRID as f64;
    // Offset grid so that the exact zeros at 0 and h/2 for f = 0 fall inside cells.
    let grid: Vec<f64> = (0..=ZERO_GRID).map(|i| (i as f64 - 0.5) * step).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| d(x)).collect();
    let scale = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut roots = Vec::new();
    let mut slopes = Vec::new();
    let mut indeterminate = false;
    for i in 0..ZERO_GRID {
        let (lo, hi) = (grid[i], grid[i + 1]);
        let (flo, fhi) = (vals[i], vals[i + 1]);
        if flo.signum() != fhi.signum() {
            if let Some(r) = brent(d, lo, hi, 1e-14 * h) {
                let dh = 1e-6 * h;
                let slope = ((d(r + dh) - d(r - dh)) / (2.0 * dh)).abs();
                if slope * h < SIMPLE_ROOT_RTOL * scale {
                    indeterminate = true;
                }
                roots.push(r.rem_euclid(h));
                slopes.push(slope);
            }
        } else if i > 0 {
            // A dip towards zero without a sign change: nearly tangent.
            let (fprev, fi) = (vals[i - 1].abs(), flo.abs());
            if fi < fprev && fi < fhi.abs() && fi < 1e-3 * scale && vals[i - 1].signum() == flo.signum() {
                indeterminate = true;
            }
        }
    }
    if roots.len() % 2 == 1 {
        indeterminate = true;
    }
    ZeroSet {
        roots,
        slopes,
        indeterminate,
    }
}

/// Trichotomy of the scattering-domain predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainStatus {
    Inside,
    Outside,
    Indeterminate,
}

/// Is the cylinder point `(𝓔, t)` in the domain of the scattering map?
/// Inside when `√𝓔 > |aḃ − bȧ| φ(t)/|δ| + k`, outside below the threshold
/// minus `k`.
pub fn in_domain(
    physical_energy: f64,
    t: f64,
    cfg: &SplittingConfig,
    boundary: &BoundaryModel,
) -> Result<DomainStatus> {
    let k = cfg.margin(boundary)?;
    domain_status(physical_energy, t, cfg, k, boundary)
}

/// [`in_domain`] with an already resolved margin.
pub fn domain_status(
    physical_energy: f64,
    t: f64,
    cfg: &SplittingConfig,
    margin: f64,
    boundary: &BoundaryModel,
) -> Result<DomainStatus> {
    let floor = cfg.energy_floor();
    if !(physical_energy >= floor) {
        return Err(Error::BelowEnergyFloor {
            energy: physical_energy,
            floor,
        });
    }
    let threshold = domain_threshold(t, cfg.delta, boundary)?;
    let root = physical_energy.sqrt();
    Ok(if root > threshold + margin {
        DomainStatus::Inside
    } else if root < threshold - margin {
        DomainStatus::Outside
    } else {
        DomainStatus::Indeterminate
    })
}
