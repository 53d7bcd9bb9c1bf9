//! Oracles shared by the acceptance suite. Nothing here calls into the
//! library under test.

use std::f64::consts::FRAC_PI_2;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Trapezoidal rule on `[0, π/2]` for integrands that are even and
/// π-periodic, where it converges geometrically.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = 400;
    let h = FRAC_PI_2 / n as f64;
    let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
    h * (inner + 0.5 * (f(0.0) + f(FRAC_PI_2)))
}

/// `Σ_{|n|≤N} sech²(τ + n h)`, summed directly.
pub fn sech2_lattice(tau: f64, h: f64, n: i32) -> f64 {
    (-n..=n).map(|k| (1.0 / (tau + k as f64 * h).cosh()).powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_integrates_cos_squared() {
        // ∫₀^{π/2} cos²x dx = π/4
        let v = periodic_trapezoid(|x| x.cos().powi(2));
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn lattice_sum_at_large_h_is_one_sech() {
        // with h = 40 only the n = 0 term matters
        let v = sech2_lattice(0.3, 40.0, 5);
        assert!((v - (1.0 / 0.3f64.cosh()).powi(2)).abs() < 1e-15);
    }
}
