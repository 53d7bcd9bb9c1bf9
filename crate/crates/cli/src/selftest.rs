//! Independent oracle checks, run by the `selftest` command.

use std::f64::consts::{FRAC_PI_2, PI};

use ellipse_fermi::accelerator::critical_times;
use ellipse_fermi::boundary::BoundaryModel;
use ellipse_fermi::dynmap::{step_full, Direction, PhaseState};
use ellipse_fermi::elliptic::{complete_integrals, solve_modulus};
use ellipse_fermi::frozen::{hyperbolic_data, integral_i, step_frozen, w2_point, FrozenState};
use ellipse_fermi::melnikov::{m1_closed, m_series};
use ellipse_fermi::perturbation::homoclinic_length_sum;
use ellipse_fermi::scattering::kernel_sum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    /// Worst error found; `NaN` when the computation itself failed.
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

type Probe = fn(u64) -> ellipse_fermi::Result<f64>;

/// Trapezoidal rule on `[0, π/2]`, spectrally accurate for the smooth even
/// periodic integrands of the complete integrals.
fn trapezoid<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = 400;
    let h = FRAC_PI_2 / n as f64;
    h * ((1..n).map(|i| f(i as f64 * h)).sum::<f64>() + 0.5 * (f(0.0) + f(FRAC_PI_2)))
}

fn k_quadrature(_: u64) -> ellipse_fermi::Result<f64> {
    let (k, _) = complete_integrals(0.5)?;
    Ok((k - trapezoid(|x| 1.0 / (1.0 - 0.5 * x.sin().powi(2)).sqrt())).abs())
}

fn e_quadrature(_: u64) -> ellipse_fermi::Result<f64> {
    let (_, e) = complete_integrals(0.5)?;
    Ok((e - trapezoid(|x| (1.0 - 0.5 * x.sin().powi(2)).sqrt())).abs())
}

fn symmetric_modulus(_: u64) -> ellipse_fermi::Result<f64> {
    Ok((solve_modulus(PI)?.m - 0.5).abs())
}

fn legendre(_: u64) -> ellipse_fermi::Result<f64> {
    (0..20).try_fold(0.0f64, |worst, i| {
        Ok(worst.max(solve_modulus(0.25 + 0.5 * i as f64)?.legendre_residual().abs()))
    })
}

fn lattice_sum(_: u64) -> ellipse_fermi::Result<f64> {
    let mut worst: f64 = 0.0;
    for h in [1.0, 2.0, PI] {
        let ctx = solve_modulus(h)?;
        for i in 0..=40 {
            let tau = -h + 2.0 * h * i as f64 / 40.0;
            let direct: f64 = (-200..=200).map(|n| (1.0 / (tau + n as f64 * h).cosh()).powi(2)).sum();
            worst = worst.max((ctx.x_of_tau(tau) - direct).abs());
        }
    }
    Ok(worst)
}

fn frozen_integral(seed: u64) -> ellipse_fermi::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b) = (rng.gen_range(4.0..6.0), rng.gen_range(1.0..3.0));
        let mut s = FrozenState::new(rng.gen_range(0.0..PI), rng.gen_range(1e-3..PI - 1e-3))?;
        let i0 = integral_i(s, a, b);
        for _ in 0..200 {
            s = step_frozen(s, a, b)?;
            worst = worst.max((integral_i(s, a, b) - i0).abs() / (a * a));
        }
    }
    Ok(worst)
}

fn separatrix_orbit(_: u64) -> ellipse_fermi::Result<f64> {
    let (a, b) = (5.0, 2.0);
    let lambda = hyperbolic_data(a, b).lambda;
    [0.2, 1.0, 4.0].iter().try_fold(0.0f64, |worst, &xi| {
        let img = step_frozen(w2_point(xi, a, b)?, a, b)?;
        let want = w2_point(xi / lambda, a, b)?;
        Ok(worst.max((img.phi() - want.phi()).abs().max((img.theta() - want.theta()).abs())))
    })
}

fn static_full_map(seed: u64) -> ellipse_fermi::Result<f64> {
    let m = BoundaryModel::fixed(5.0, 2.0, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (phi, theta) = (rng.gen_range(0.0..PI), rng.gen_range(0.1..PI - 0.1));
        let full = step_full(&PhaseState::new(phi, theta, 0.5, 0.0, 1e-3)?, &m)?;
        let frozen = step_frozen(FrozenState::new(phi, theta)?, 5.0, 2.0)?;
        let dphi = (full.state.phi() - frozen.phi() + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
        worst = worst.max(dphi.abs().max((full.state.theta() - frozen.theta()).abs()));
    }
    Ok(worst)
}

fn melnikov_series(_: u64) -> ellipse_fermi::Result<f64> {
    let m = BoundaryModel::breathing(0.0)?;
    let mut worst: f64 = 0.0;
    for (tau, t) in [(0.1, 0.2), (0.7, 0.45), (1.3, 0.8)] {
        let closed = m1_closed(tau, t, 1.0, &m)?;
        let series = m_series(tau, t, 1.0, &m, Direction::Eps, None)?.value;
        worst = worst.max((closed - series).abs() / closed.abs());
    }
    Ok(worst)
}

fn critical_time_roots(_: u64) -> ellipse_fermi::Result<f64> {
    let m = BoundaryModel::breathing(0.0)?;
    let ts = critical_times(&m)?;
    if ts.len() != 2 {
        return Ok(f64::INFINITY);
    }
    // a ḃ − ȧ b = 2π (1 − 2 cos 2πt + 5 sin 2πt) for the breathing ellipse
    Ok(ts
        .iter()
        .map(|c| {
            let x = 2.0 * PI * c.t;
            (1.0 - 2.0 * x.cos() + 5.0 * x.sin()).abs()
        })
        .fold(0.0, f64::max))
}

fn kernel(_: u64) -> ellipse_fermi::Result<f64> {
    [1.5f64, 2.0, 5.0].iter().try_fold(0.0f64, |worst, &l| {
        Ok(worst.max((kernel_sum(0.7, l, 400)? - 1.0 / (l * l - 1.0)).abs()))
    })
}

fn homoclinic_length(_: u64) -> ellipse_fermi::Result<f64> {
    let c = 21f64.sqrt();
    [0.3, 1.0, 2.9].iter().try_fold(0.0f64, |worst, &xi| {
        Ok(worst.max((homoclinic_length_sum(xi, 5.0, 2.0, 60)? - 2.0 * c).abs()))
    })
}

const PROBES: &[(&str, Probe, f64)] = &[
    ("K(1/2) vs quadrature", k_quadrature, 1e-12),
    ("E(1/2) vs quadrature", e_quadrature, 1e-12),
    ("m at h = pi", symmetric_modulus, 1e-12),
    ("Legendre relation", legendre, 1e-12),
    ("lattice sum vs direct", lattice_sum, 1e-10),
    ("frozen first integral", frozen_integral, 1e-10),
    ("separatrix orbit", separatrix_orbit, 1e-12),
    ("static full map vs frozen", static_full_map, 1e-9),
    ("M1 closed vs series", melnikov_series, 1e-8),
    ("critical times", critical_time_roots, 1e-12),
    ("kernel sum", kernel, 1e-10),
    ("homoclinic length sum", homoclinic_length, 1e-8),
];

pub fn run(seed: u64) -> Vec<Check> {
    PROBES
        .iter()
        .map(|&(name, probe, tolerance)| Check {
            name,
            error: probe(seed).unwrap_or(f64::NAN),
            tolerance,
        })
        .collect()
}
