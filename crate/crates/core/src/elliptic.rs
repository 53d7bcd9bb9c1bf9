//! Real-argument Jacobi elliptic functions and complete integrals, plus the
//! two periodic lattice sums `X(τ)` and `Y(τ)` built from them.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::solve::brent;
use crate::{Error, Result};

const AGM_MAX_ITER: usize = 64;

/// Complete integrals `(K(m), E(m))` of the first and second kind.
pub fn complete_integrals(m: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("elliptic parameter m = {m} not in [0, 1)")));
    }
    Ok(complete_integrals_split(m, 1.0 - m))
}

/// Same as [`complete_integrals`] but with the complementary parameter
/// `mc = 1 − m` passed separately so either end stays accurate.
fn complete_integrals_split(m: f64, mc: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut g = mc.sqrt();
    // Σ 2^(n-1) c_n², starting with c_0² = m.
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - g);
        let an = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// `(sn, cn, dn)` of real `u` at parameter `m ∈ [0, 1]`.
pub fn jacobi(u: f64, m: f64) -> (f64, f64, f64) {
    jacobi_split(u, m, 1.0 - m)
}

fn jacobi_split(u: f64, m: f64, mc: f64) -> (f64, f64, f64) {
    if m <= 0.0 {
        let (s, c) = u.sin_cos();
        return (s, c, 1.0);
    }
    if mc <= 0.0 {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }
    // Reduce modulo the real period 4K.
    let (k, _) = complete_integrals_split(m, mc);
    let period = 4.0 * k;
    let u = u - period * (u / period).round();

    // Descending Landen / AGM sequence.
    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut g = mc.sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > f64::EPSILON * a[n] {
        a[n + 1] = 0.5 * (a[n] + g);
        c[n + 1] = 0.5 * (a[n] - g);
        g = (a[n] * g).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // Sum of two non-negative terms: no cancellation even as dn → 0.
    let dn = (mc + m * cn * cn).sqrt();
    (sn, cn, dn)
}

/// Modulus data fixed by the period ratio `K′/K = π/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticContext {
    pub m: f64,
    /// `1 − m`, kept separately for accuracy near `m = 1`.
    pub mc: f64,
    pub k: f64,
    pub kp: f64,
    pub e: f64,
    pub ep: f64,
    pub h: f64,
}

/// Finds `m` with `K(1−m)/K(m) = π/h`.
///
/// Bisection runs on `q = log(m/(1−m))` so both tails of `(0, 1)` are
/// resolved to full relative precision.
pub fn solve_modulus(h: f64) -> Result<EllipticContext> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("separatrix exponent h = {h} must be positive")));
    }
    let target = PI / h;
    let split = |q: f64| -> (f64, f64) {
        // m = 1/(1+e^{-q}), mc = 1/(1+e^{q})
        (1.0 / (1.0 + (-q).exp()), 1.0 / (1.0 + q.exp()))
    };
    let residual = |q: f64| {
        let (m, mc) = split(q);
        let (k, _) = complete_integrals_split(m, mc);
        let (kp, _) = complete_integrals_split(mc, m);
        (kp / k).ln() - target.ln()
    };
    let bound = (1.0f64 / 1e-16 - 1.0).ln();
    let q = brent(residual, -bound, bound, 1e-15).ok_or_else(|| {
        Error::Domain(format!("h = {h} gives a modulus outside [1e-16, 1 - 1e-16]"))
    })?;
    let (m, mc) = split(q);
    let (k, e) = complete_integrals_split(m, mc);
    let (kp, ep) = complete_integrals_split(mc, m);
    Ok(EllipticContext { m, mc, k, kp, e, ep, h })
}

impl EllipticContext {
    /// `E K′ + E′ K − K K′ − π/2`; zero for a consistent context.
    pub fn legendre_residual(&self) -> f64 {
        self.e * self.kp + self.ep * self.k - self.k * self.kp - FRAC_PI_2
    }

    /// `2K/h`, the scale taking `τ` to the Jacobi argument.
    pub fn scale(&self) -> f64 {
        2.0 * self.k / self.h
    }

    /// `(sn, cn, dn)` at `u = 2Kτ/h`.
    pub fn jacobi_at(&self, tau: f64) -> (f64, f64, f64) {
        jacobi_split(self.scale() * tau, self.m, self.mc)
    }

    /// `X(τ) = (2K/h)² (E′/K′ − 1 + dn²(2Kτ/h)) = Σₙ sech²(τ + nh)`.
    pub fn x_of_tau(&self, tau: f64) -> f64 {
        let (_, _, dn) = self.jacobi_at(tau);
        let s = self.scale();
        s * s * (self.ep / self.kp - 1.0 + dn * dn)
    }

    /// `Y(τ) = (2K/h) m sn cd` at `2Kτ/h`. Bounded since `dn ≥ √(1−m) > 0`.
    pub fn y_of_tau(&self, tau: f64) -> f64 {
        let (sn, cn, dn) = self.jacobi_at(tau);
        self.scale() * self.m * sn * cn / dn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson on `[lo, hi]`.
    fn quad<F: Fn(f64) -> f64 + Copy>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec<F: Fn(f64) -> f64 + Copy>(
            f: F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let m = 0.5 * (lo + hi);
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, lo, hi, fa, fm, fb, whole, tol, 50)
    }

    fn k_quad(m: f64) -> f64 {
        quad(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14)
    }

    fn e_quad(m: f64) -> f64 {
        quad(|t| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14)
    }

    fn sech2_sum(tau: f64, h: f64) -> f64 {
        // tail 4 e^{-2(Nh - |τ|)} < 1e-16
        let n = ((tau.abs() + 20.0) / h).ceil() as i64 + 1;
        (-n..=n).map(|j| (1.0 / (tau + j as f64 * h).cosh()).powi(2)).sum()
    }

    #[test]
    fn degenerate_integrals() {
        let (k, e) = complete_integrals(0.0).unwrap();
        assert!((k - FRAC_PI_2).abs() < 1e-15 && (e - FRAC_PI_2).abs() < 1e-15);
        assert!(complete_integrals(1.0).is_err());
        assert!(complete_integrals(-0.1).is_err());
    }

    #[test]
    fn integrals_match_quadrature() {
        let (k, e) = complete_integrals(0.5).unwrap();
        assert!((k - 1.854074677).abs() < 1e-9);
        assert!((e - 1.350643881).abs() < 1e-9);
        for &m in &[0.01, 0.3, 0.5, 0.8, 0.95] {
            let (k, e) = complete_integrals(m).unwrap();
            assert!((k - k_quad(m)).abs() < 1e-11, "K({m})");
            assert!((e - e_quad(m)).abs() < 1e-11, "E({m})");
        }
    }

    #[test]
    fn jacobi_degenerations() {
        let u = 0.731;
        let (sn, cn, dn) = jacobi(u, 0.0);
        assert_eq!((sn, cn, dn), (u.sin(), u.cos(), 1.0));
        let (sn, cn, dn) = jacobi(u, 1.0);
        assert!((sn - u.tanh()).abs() < 1e-15);
        assert!((cn - 1.0 / u.cosh()).abs() < 1e-15 && (dn - cn).abs() < 1e-15);
        for &m in &[0.2, 0.5, 0.9, 0.999] {
            let (k, _) = complete_integrals(m).unwrap();
            let (sn, cn, dn) = jacobi(k, m);
            assert!((sn - 1.0).abs() < 1e-12 && cn.abs() < 1e-7, "quarter period at m = {m}");
            assert!((dn - (1.0 - m).sqrt()).abs() < 1e-10, "dn(K) at m = {m}");
        }
    }

    #[test]
    fn jacobi_against_incomplete_integral() {
        // u = F(ϕ | m) ⇒ sn = sin ϕ
        let m = 0.7;
        let amp = 1.1;
        let u = quad(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, amp, 1e-14);
        let (sn, cn, dn) = jacobi(u, m);
        assert!((sn - amp.sin()).abs() < 1e-12);
        assert!((cn - amp.cos()).abs() < 1e-12);
        assert!((dn - (1.0 - m * amp.sin().powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn modulus_symmetric_point() {
        let ctx = solve_modulus(PI).unwrap();
        assert!((ctx.m - 0.5).abs() < 1e-13);
        assert!(solve_modulus(0.5).unwrap().m < solve_modulus(1.0).unwrap().m);
        assert!(solve_modulus(0.0).is_err());
        assert!(solve_modulus(-1.0).is_err());
    }

    #[test]
    fn modulus_for_unit_ellipse_against_quadrature() {
        let h = (7.0 + 4.0 * 3f64.sqrt()).ln();
        let ctx = solve_modulus(h).unwrap();
        let ratio = k_quad(1.0 - ctx.m) / k_quad(ctx.m);
        assert!((ratio - PI / h).abs() < 1e-10 * ratio);
        // nome q = e^{-πK'/K}, m = 16 q (1 - 8q + 44 q² - 192 q³ + ...)... use theta series
        let q = (-PI * PI / h).exp();
        let theta2: f64 = (0..20).map(|n| 2.0 * q.powf((n as f64 + 0.5).powi(2))).sum();
        let theta3: f64 = 1.0 + (1..20).map(|n| 2.0 * q.powi(n * n)).sum::<f64>();
        let m_nome = (theta2 / theta3).powi(4);
        assert!((ctx.m - m_nome).abs() < 1e-13 * m_nome.max(1e-3));
    }

    #[test]
    fn lattice_sum_identity() {
        let ctx = solve_modulus(PI).unwrap();
        // 1.0149118510266... to full precision
        assert!((ctx.x_of_tau(0.0) - 1.014913).abs() < 2e-6);
        assert!((ctx.x_of_tau(0.0) - sech2_sum(0.0, PI)).abs() < 1e-14);
        for &h in &[1.0, 2.0, PI] {
            let ctx = solve_modulus(h).unwrap();
            let worst = (0..64)
                .map(|i| {
                    let tau = -h / 2.0 + h * i as f64 / 64.0;
                    (ctx.x_of_tau(tau) - sech2_sum(tau, h)).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= 1e-10, "h = {h}: {worst:e}");
        }
    }

    #[test]
    fn y_vanishes_at_origin() {
        let ctx = solve_modulus(2.0).unwrap();
        assert_eq!(ctx.y_of_tau(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn jacobi_identities(u in -50.0..50.0f64, m in 0.0..0.9999f64) {
            let (sn, cn, dn) = jacobi(u, m);
            prop_assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
            prop_assert!((dn * dn + m * sn * sn - 1.0).abs() < 1e-12);
            let (k, _) = complete_integrals(m).unwrap();
            let (sn4, cn4, _) = jacobi(u + 4.0 * k, m);
            prop_assert!((sn4 - sn).abs() < 1e-10 && (cn4 - cn).abs() < 1e-10);
        }

        #[test]
        fn context_invariants(h in 0.3..12.0f64) {
            let ctx = solve_modulus(h).unwrap();
            prop_assert!((ctx.kp / ctx.k - PI / h).abs() <= 1e-12 * PI / h);
            prop_assert!(ctx.legendre_residual().abs() <= 1e-12);
        }

        #[test]
        fn lattice_sums_periodic_and_signed(tau in -5.0..5.0f64, h in 0.5..6.0f64) {
            let ctx = solve_modulus(h).unwrap();
            let x = ctx.x_of_tau(tau);
            prop_assert!(x > 0.0);
            prop_assert!((ctx.x_of_tau(tau + h) - x).abs() <= 1e-10 * x.max(1.0));
            prop_assert!((ctx.y_of_tau(-tau) + ctx.y_of_tau(tau)).abs() <= 1e-12 * ctx.scale());
            prop_assert!((ctx.y_of_tau(tau + h) - ctx.y_of_tau(tau)).abs() <= 1e-9 * ctx.scale());
        }
    }
}
