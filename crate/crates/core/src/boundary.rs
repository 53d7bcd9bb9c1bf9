//! Time-periodic boundary: semi-axes as trigonometric polynomials of period 1
//! and the quartically perturbed ellipse they span.
//!
//! The curve at time `t` is parametrised by
//! `x = a(t) cos φ`, `y = b(t) sin φ (1 + δ sin²φ)`, which agrees with the
//! implicit quartic `x²/a² + y²/b² = 1 + 2δ y⁴/b⁴` to first order in `δ`.
//! Higher-order terms in `δ` are never included.
//!
//! # Config grammar
//!
//! A boundary is described by a plain-text file of `key = value` lines.
//! Blank lines and text after `#` are ignored.
//!
//! ```text
//! a.const  = 5.0      # constant term of a(t)
//! a.sin[1] = 1.0      # coefficient of sin(2π·1·t)
//! b.const  = 2.0
//! b.cos[1] = -1.0     # coefficient of cos(2π·1·t)
//! delta    = 0.05
//! ```
//!
//! Harmonic indices start at 1. Missing coefficients are zero; `delta`
//! defaults to zero. Repeated keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::{Error, Result};

const VALIDATION_GRID: usize = 4096;

/// Largest admissible `|δ|`.
pub const MAX_DELTA: f64 = 0.2;

/// Finite Fourier series of period 1:
/// `c₀ + Σₖ (cosₖ cos 2πkt + sinₖ sin 2πkt)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    pub constant: f64,
    /// `cos[k-1]` multiplies `cos(2πkt)`.
    pub cos: Vec<f64>,
    /// `sin[k-1]` multiplies `sin(2πkt)`.
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    pub fn new(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        Self { constant, cos, sin }
    }

    /// `order`-th time derivative at `t`.
    pub fn derivative(&self, t: f64, order: u32) -> f64 {
        let shift = order as f64 * PI / 2.0;
        // exact reduction; keeps the phase accurate for unwrapped times
        let t = t.rem_euclid(1.0);
        let mut acc = if order == 0 { self.constant } else { 0.0 };
        for (k, &ck) in self.cos.iter().enumerate() {
            if ck != 0.0 {
                let w = TAU * (k + 1) as f64;
                acc += ck * w.powi(order as i32) * (w * t + shift).cos();
            }
        }
        for (k, &sk) in self.sin.iter().enumerate() {
            if sk != 0.0 {
                let w = TAU * (k + 1) as f64;
                acc += sk * w.powi(order as i32) * (w * t + shift).sin();
            }
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(self.sin.iter()).all(|&c| c == 0.0)
    }
}

/// Semi-axes, focal half-distance and their first time derivatives at one
/// instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiAxes {
    pub a: f64,
    pub a_dot: f64,
    pub b: f64,
    pub b_dot: f64,
    pub c: f64,
    pub c_dot: f64,
}

impl SemiAxes {
    /// Frozen axes with zero velocity.
    pub fn fixed(a: f64, b: f64) -> Self {
        Self::with_rates(a, 0.0, b, 0.0)
    }

    pub fn with_rates(a: f64, a_dot: f64, b: f64, b_dot: f64) -> Self {
        let c = (a * a - b * b).sqrt();
        Self {
            a,
            a_dot,
            b,
            b_dot,
            c,
            c_dot: (a * a_dot - b * b_dot) / c,
        }
    }

    /// `|γ'(φ)| = sqrt(a² sin²φ + b² cos²φ)` for the unperturbed ellipse.
    pub fn speed(&self, phi: f64) -> f64 {
        (self.a * self.a * phi.sin().powi(2) + self.b * self.b * phi.cos().powi(2)).sqrt()
    }

    /// Outward normal speed of the unperturbed ellipse,
    /// `(ȧ b cos²φ + a ḃ sin²φ) / sqrt(a² sin²φ + b² cos²φ)`.
    pub fn ellipse_normal_speed(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        (self.a_dot * self.b * c * c + self.a * self.b_dot * s * s) / self.speed(phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryModel {
    a: TrigPoly,
    b: TrigPoly,
    delta: f64,
    max_speed: f64,
}

impl BoundaryModel {
    /// Builds a model, rejecting it unless `0 < b(t) < a(t)` on a dense grid
    /// and `|δ| < 0.2`.
    pub fn new(a: TrigPoly, b: TrigPoly, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta.abs() >= MAX_DELTA {
            return Err(Error::InvalidBoundary(format!(
                "|delta| = {} must be below {MAX_DELTA}",
                delta.abs()
            )));
        }
        let mut max_speed: f64 = 0.0;
        for i in 0..VALIDATION_GRID {
            let t = i as f64 / VALIDATION_GRID as f64;
            let (av, bv) = (a.value(t), b.value(t));
            if !(av.is_finite() && bv.is_finite()) || bv <= 0.0 || av <= bv {
                return Err(Error::InvalidBoundary(format!(
                    "need 0 < b(t) < a(t); at t = {t} a = {av}, b = {bv}"
                )));
            }
            let ad = a.derivative(t, 1);
            let bd = b.derivative(t, 1) * (1.0 + delta.abs());
            max_speed = max_speed.max(ad.hypot(bd));
        }
        Ok(Self {
            a,
            b,
            delta,
            max_speed: 1.01 * max_speed,
        })
    }

    /// Constant axes.
    pub fn fixed(a: f64, b: f64, delta: f64) -> Result<Self> {
        Self::new(TrigPoly::constant(a), TrigPoly::constant(b), delta)
    }

    /// `a(t) = 5 + sin 2πt`, `b(t) = 2 − cos 2πt`: the breathing ellipse used
    /// throughout the examples and experiments.
    pub fn breathing(delta: f64) -> Result<Self> {
        Self::new(
            TrigPoly::new(5.0, vec![], vec![1.0]),
            TrigPoly::new(2.0, vec![-1.0], vec![]),
            delta,
        )
    }

    pub fn a_poly(&self) -> &TrigPoly {
        &self.a
    }

    pub fn b_poly(&self) -> &TrigPoly {
        &self.b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same axes with a different perturbation strength.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), delta)
    }

    /// Same axes, `δ = 0`.
    pub fn unperturbed(&self) -> Self {
        let mut m = self.clone();
        m.delta = 0.0;
        m
    }

    /// Upper bound on the boundary's normal speed over all `(φ, t)`.
    pub fn max_normal_speed(&self) -> f64 {
        self.max_speed
    }

    pub fn semi_axes(&self, t: f64) -> SemiAxes {
        SemiAxes::with_rates(
            self.a.value(t),
            self.a.derivative(t, 1),
            self.b.value(t),
            self.b.derivative(t, 1),
        )
    }

    pub fn c(&self, t: f64) -> f64 {
        let (a, b) = (self.a.value(t), self.b.value(t));
        (a * a - b * b).sqrt()
    }

    /// Point on the curve. With `with_delta == false` the quartic term is
    /// dropped and the point lies on the ellipse.
    pub fn curve_point(&self, phi: f64, t: f64, with_delta: bool) -> [f64; 2] {
        let d = if with_delta { self.delta } else { 0.0 };
        let (s, c) = phi.sin_cos();
        [self.a.value(t) * c, self.b.value(t) * s * (1.0 + d * s * s)]
    }

    /// `∂γ/∂φ` of the perturbed curve at fixed time (positively oriented).
    pub fn tangent(&self, phi: f64, t: f64) -> [f64; 2] {
        let (s, c) = phi.sin_cos();
        [
            -self.a.value(t) * s,
            self.b.value(t) * c * (1.0 + 3.0 * self.delta * s * s),
        ]
    }

    /// `∂γ/∂t` at fixed parameter `φ`.
    pub fn velocity(&self, phi: f64, t: f64) -> [f64; 2] {
        let (s, c) = phi.sin_cos();
        [
            self.a.derivative(t, 1) * c,
            self.b.derivative(t, 1) * s * (1.0 + self.delta * s * s),
        ]
    }

    /// Unit outward normal.
    pub fn outward_normal(&self, phi: f64, t: f64) -> [f64; 2] {
        let [tx, ty] = self.tangent(phi, t);
        let n = tx.hypot(ty);
        [ty / n, -tx / n]
    }

    /// Angle of the positive tangent with the x-axis, in `(-π, π]`.
    pub fn tangent_angle(&self, phi: f64, t: f64) -> f64 {
        let [tx, ty] = self.tangent(phi, t);
        ty.atan2(tx)
    }

    /// Outward normal speed of the boundary; positive when the wall recedes.
    pub fn normal_speed(&self, phi: f64, t: f64) -> f64 {
        let v = self.velocity(phi, t);
        let n = self.outward_normal(phi, t);
        v[0] * n[0] + v[1] * n[1]
    }

    /// Parses the config grammar described in the module docs.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut a = TrigPoly::default();
        let mut b = TrigPoly::default();
        let mut delta = 0.0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("`{}` is not a number", value.trim())))?;
            if !value.is_finite() {
                return Err(err(format!("`{key}` must be finite")));
            }
            if let Some(first) = seen.insert(key.to_string(), line_no) {
                return Err(err(format!("`{key}` already set on line {first}")));
            }
            if key == "delta" {
                delta = value;
                continue;
            }
            let (axis, term) = key
                .split_once('.')
                .ok_or_else(|| err(format!("unknown key `{key}`")))?;
            let poly = match axis {
                "a" => &mut a,
                "b" => &mut b,
                _ => return Err(err(format!("unknown axis `{axis}`"))),
            };
            if term == "const" {
                poly.constant = value;
                continue;
            }
            let (kind, rest) = term
                .split_once('[')
                .ok_or_else(|| err(format!("unknown term `{term}`")))?;
            let k: usize = rest
                .strip_suffix(']')
                .and_then(|s| s.trim().parse().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(|| err(format!("bad harmonic index in `{term}`")))?;
            let coeffs = match kind {
                "cos" => &mut poly.cos,
                "sin" => &mut poly.sin,
                _ => return Err(err(format!("unknown term `{kind}`"))),
            };
            if coeffs.len() < k {
                coeffs.resize(k, 0.0);
            }
            coeffs[k - 1] = value;
        }
        Self::new(a, b, delta)
    }

    /// Renders the model back into the config grammar.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (name, poly) in [("a", &self.a), ("b", &self.b)] {
            out.push_str(&format!("{name}.const = {:?}\n", poly.constant));
            for (k, c) in poly.cos.iter().enumerate() {
                if *c != 0.0 {
                    out.push_str(&format!("{name}.cos[{}] = {c:?}\n", k + 1));
                }
            }
            for (k, s) in poly.sin.iter().enumerate() {
                if *s != 0.0 {
                    out.push_str(&format!("{name}.sin[{}] = {s:?}\n", k + 1));
                }
            }
        }
        out.push_str(&format!("delta = {:?}\n", self.delta));
        out
    }
}
