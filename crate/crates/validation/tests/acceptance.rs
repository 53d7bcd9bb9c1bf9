//! Acceptance suite, run without the test harness so that every criterion
//! prints its `criterion N: PASS|FAIL` line. The process exits non-zero if
//! any criterion fails or overruns its time budget.
//!
//! The breathing ellipse `a = 5 + sin 2πt`, `b = 2 − cos 2πt` is the reference
//! boundary throughout.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use ellipse_fermi::accelerator::{critical_times, run_ifs};
use ellipse_fermi::boundary::BoundaryModel;
use ellipse_fermi::dynmap::{step_full, Direction, PhaseState};
use ellipse_fermi::elliptic::{complete_integrals, solve_modulus};
use ellipse_fermi::frozen::{hyperbolic_data, integral_i, step_frozen, FrozenState};
use ellipse_fermi::inner::{flow_in, step_inner, CylinderState};
use ellipse_fermi::melnikov::{
    domain_threshold, find_zeros, in_domain, m1_closed, m2_closed, m_series, true_splitting_sum,
    DomainStatus, MelnikovFrame, SplittingConfig,
};
use ellipse_fermi::perturbation::homoclinic_length_sum;
use ellipse_fermi::scattering::{flow_out, kernel_sum, s_truncated, DomainCheck};
use ellipse_fermi_validation::{loglog_slope, periodic_trapezoid, sech2_lattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn breathing(delta: f64) -> BoundaryModel {
    BoundaryModel::breathing(delta).unwrap()
}

/// Prints the verdict line; a miss of the runtime budget is a failure.
fn verdict(n: u32, ok: bool, elapsed: Duration, budget: Duration, detail: &str) -> bool {
    let on_time = elapsed <= budget;
    let pass = ok && on_time;
    println!(
        "criterion {n}: {} ({detail}; {:.2?} of {:.0?})",
        if pass { "PASS" } else { "FAIL" },
        elapsed,
        budget
    );
    pass
}

fn criterion_1_elliptic_kernel() -> bool {
    let start = Instant::now();
    let m = 0.5;
    let (k, e) = complete_integrals(m).unwrap();
    let kq = periodic_trapezoid(|x| 1.0 / (1.0 - m * x.sin().powi(2)).sqrt());
    let eq = periodic_trapezoid(|x| (1.0 - m * x.sin().powi(2)).sqrt());
    let dk = (k - kq).abs();
    let de = (e - eq).abs();
    let dm = (solve_modulus(PI).unwrap().m - 0.5).abs();
    let worst_legendre = (0..20)
        .map(|i| solve_modulus(0.25 + 0.5 * i as f64).unwrap().legendre_residual().abs())
        .fold(0.0, f64::max);
    let ok = dk <= 1e-12 && de <= 1e-12 && dm <= 1e-12 && worst_legendre <= 1e-12;
    verdict(
        1,
        ok,
        start.elapsed(),
        Duration::from_secs(1),
        &format!("|ΔK| {dk:.1e}, |ΔE| {de:.1e}, |m(π) − 1/2| {dm:.1e}, Legendre {worst_legendre:.1e}"),
    )
}

fn criterion_2_lattice_sum() -> bool {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for h in [1.0, 2.0, PI] {
        let ctx = solve_modulus(h).unwrap();
        for i in 0..=200 {
            let tau = -h + 2.0 * h * i as f64 / 200.0;
            let direct = sech2_lattice(tau, h, 200);
            worst = worst.max((ctx.x_of_tau(tau) - direct).abs());
        }
    }
    verdict(
        2,
        worst <= 1e-10,
        start.elapsed(),
        Duration::from_secs(1),
        &format!("sup |X − Σ sech²| = {worst:.1e}"),
    )
}

/// Arc-length density `|γ′(φ)|` of the ellipse.
fn speed(phi: f64, a: f64, b: f64) -> f64 {
    (a * phi.sin()).hypot(b * phi.cos())
}

fn criterion_3_frozen_conservation() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_drift: f64 = 0.0;
    for _ in 0..10_000 {
        let a = rng.gen_range(4.0..6.0);
        let b = rng.gen_range(1.0..3.0);
        let c2 = a * a - b * b;
        let mut s = FrozenState::new(rng.gen_range(0.0..PI), rng.gen_range(1e-3..PI - 1e-3)).unwrap();
        let i0 = integral_i(s, a, b);
        for _ in 0..1000 {
            s = step_frozen(s, a, b).unwrap();
            worst_drift = worst_drift.max((integral_i(s, a, b) - i0).abs() / (b * b + c2));
        }
    }

    // Invariant area form |γ′(φ)| sin θ dφ ∧ dθ.
    let mut worst_det: f64 = 0.0;
    let wrap = |x: f64| (x + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    for _ in 0..1000 {
        let a = rng.gen_range(4.0..6.0);
        let b = rng.gen_range(1.0..3.0);
        let phi = rng.gen_range(0.0..PI);
        let theta = rng.gen_range(0.2..PI - 0.2);
        let img = |p: f64, q: f64| {
            let s = step_frozen(FrozenState::new(p, q).unwrap(), a, b).unwrap();
            (s.phi(), s.theta())
        };
        // central differences with one Richardson step
        let jac = |d: f64| {
            let (pp, tp) = img(phi + d, theta);
            let (pm, tm) = img(phi - d, theta);
            let (qp, sp) = img(phi, theta + d);
            let (qm, sm) = img(phi, theta - d);
            [
                wrap(pp - pm) / (2.0 * d),
                wrap(qp - qm) / (2.0 * d),
                (tp - tm) / (2.0 * d),
                (sp - sm) / (2.0 * d),
            ]
        };
        let (coarse, fine) = (jac(2e-5), jac(1e-5));
        let r: Vec<f64> = fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
        let j = [[r[0], r[1]], [r[2], r[3]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let (p1, t1) = img(phi, theta);
        let ratio = det * speed(p1, a, b) * t1.sin() / (speed(phi, a, b) * theta.sin());
        worst_det = worst_det.max((ratio - 1.0).abs());
    }
    verdict(
        3,
        worst_drift <= 1e-10 && worst_det <= 1e-6,
        start.elapsed(),
        Duration::from_secs(30),
        &format!("max |ΔI|/(b²+c²) {worst_drift:.1e}, max |det − 1| {worst_det:.1e}"),
    )
}

fn criterion_4_melnikov_oracles() -> bool {
    let start = Instant::now();
    let m = breathing(0.0);
    let mut worst_m1: f64 = 0.0;
    for it in 0..10 {
        // offset grid avoids the zeros of M₁ at the critical times
        let t = (it as f64 + 0.37) / 10.0;
        let h = hyperbolic_data(m.a_poly().value(t), m.b_poly().value(t)).h;
        for itau in 0..10 {
            let tau = h * itau as f64 / 10.0;
            for v in [0.5, 1.0, 2.0] {
                let closed = m1_closed(tau, t, v, &m).unwrap();
                let series = m_series(tau, t, v, &m, Direction::Eps, None).unwrap().value;
                worst_m1 = worst_m1.max((closed - series).abs() / closed.abs());
            }
        }
    }
    let mut worst_m2: f64 = 0.0;
    for i in 0..10 {
        let t = 0.1 * i as f64 + 0.05;
        let h = hyperbolic_data(m.a_poly().value(t), m.b_poly().value(t)).h;
        // M₂ vanishes at τ = 0 and h/2; stay inside a lobe
        let tau = h * if i % 2 == 0 { 0.15 } else { 0.3 };
        let closed = m2_closed(tau, t, &m).unwrap();
        let series = m_series(tau, t, 1.0, &m, Direction::Delta, None).unwrap().value;
        worst_m2 = worst_m2.max((closed - series).abs() / closed.abs());
    }
    verdict(
        4,
        worst_m1 <= 1e-8 && worst_m2 <= 1e-5,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("M₁ rel {worst_m1:.1e}, M₂ rel {worst_m2:.1e}"),
    )
}

fn criterion_5_critical_times() -> bool {
    let start = Instant::now();
    let m = breathing(0.0);
    let critical = critical_times(&m).unwrap();
    let located = critical.len() == 2
        && (critical[0].t - 0.0308).abs() < 1e-4
        && (critical[1].t - 0.5903).abs() < 1e-4;

    let speeds = [0.25, 0.5, 1.0, 2.0, 4.0];
    // |M₁| over a τ grid, and the scale 4b·max_τ g / v at time t
    let sweep = |t: f64, v: f64| {
        let frame = MelnikovFrame::new(t, &m).unwrap();
        let h = frame.hyper.h;
        let taus: Vec<f64> = (0..64).map(|i| h * i as f64 / 64.0).collect();
        let gmax = taus.iter().map(|&x| frame.g(x)).fold(0.0, f64::max);
        let scale = 4.0 * frame.axes.b * gmax / v;
        let m1: Vec<f64> = taus.iter().map(|&x| frame.m1(x, v).abs()).collect();
        (m1, scale)
    };
    let mut worst_at = 0.0f64;
    let mut weakest_off = f64::INFINITY;
    for c in &critical {
        for &v in &speeds {
            let (m1, scale) = sweep(c.t, v);
            worst_at = worst_at.max(m1.iter().fold(0.0, |a: f64, &x| a.max(x)) / scale);
            for dt in [-0.1, 0.1] {
                let (m1, scale) = sweep(c.t + dt, v);
                weakest_off = weakest_off.min(m1.iter().fold(f64::INFINITY, |a: f64, &x| a.min(x)) / scale);
            }
        }
    }
    verdict(
        5,
        located && worst_at <= 1e-10 && weakest_off > 1e-3,
        start.elapsed(),
        Duration::from_secs(10),
        &format!(
            "t* = {:?}, max |M₁|/scale at t* {worst_at:.1e}, min at t*±0.1 {weakest_off:.2e}",
            critical.iter().map(|c| (c.t * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

fn criterion_6_domain_consistency() -> bool {
    let start = Instant::now();
    let m = breathing(0.05);
    let cfg = SplittingConfig::new(1e-3, 0.05).unwrap();
    let k = cfg.margin(&m).unwrap();
    let top = k / ellipse_fermi::melnikov::DEFAULT_MARGIN_FRACTION;
    // pin the default margin so in_domain does not rescan it per point
    let cfg = cfg.with_margin(k);
    let lo = cfg.energy_floor().sqrt();
    let hi = 2.0 * top;
    let (mut checked, mut agree, mut skipped) = (0, 0, 0);
    for it in 0..64 {
        let t = it as f64 / 64.0;
        let threshold = domain_threshold(t, cfg.delta, &m).unwrap();
        for ie in 0..64 {
            let root = lo + (hi - lo) * ie as f64 / 63.0;
            if (root - threshold).abs() <= k {
                skipped += 1;
                continue;
            }
            let energy = root * root;
            let inside = in_domain(energy, t, &cfg, &m).unwrap() == DomainStatus::Inside;
            let v = cfg.eps * (2.0 * energy).sqrt();
            let pair = find_zeros(t, v, &cfg, &m).unwrap().simple_pair();
            checked += 1;
            if inside == pair {
                agree += 1;
            }
        }
    }
    verdict(
        6,
        agree == checked && checked > 0,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("{agree}/{checked} agree, {skipped} in the ±k band"),
    )
}

fn criterion_7_scattering_sums() -> bool {
    let start = Instant::now();
    let worst_kernel = [1.5f64, 2.0, 5.0]
        .iter()
        .map(|&l| (kernel_sum(0.7, l, 400).unwrap() - 1.0 / (l * l - 1.0)).abs())
        .fold(0.0, f64::max);
    let (a, b) = (5.0f64, 2.0f64);
    let c = (a * a - b * b).sqrt();
    let worst_length = [0.3, 1.0, 2.9]
        .iter()
        .map(|&xi| (homoclinic_length_sum(xi, a, b, 60).unwrap() - 2.0 * c).abs())
        .fold(0.0, f64::max);
    verdict(
        7,
        worst_kernel <= 1e-10 && worst_length <= 1e-8,
        start.elapsed(),
        Duration::from_secs(5),
        &format!("kernel {worst_kernel:.1e}, length sum {worst_length:.1e}"),
    )
}

fn criterion_8_acceleration() -> bool {
    let start = Instant::now();
    let eps = 1e-3;
    let gains = |delta: f64| {
        let m = breathing(delta);
        let cfg = SplittingConfig::new(eps, delta).unwrap();
        run_ifs(CylinderState::new(1.0, 0.1).unwrap(), 5, cfg, &m).unwrap()
    };
    let strong = gains(0.05);
    let every_cycle = strong.itinerary.cycles.iter().all(|c| c.gain() > 0.0);
    let first = strong.trace.first().unwrap().physical_energy;
    let last = strong.trace.last().unwrap().physical_energy;
    let growth = last / first;

    let weak = gains(5e-3);
    let mean = |run: &ellipse_fermi::accelerator::IfsRun| {
        run.itinerary.cycles.iter().map(|c| c.gain()).sum::<f64>() / run.itinerary.cycles.len() as f64
    };
    // At ε = 1e-3 both δ exceed ε, so min(δ²/ε², 1) = 1 for both: the gain
    // must not shrink with δ, and must grow far slower than δ².
    let ratio = mean(&strong) / mean(&weak);
    let saturated = (1.0..100.0).contains(&ratio);
    verdict(
        8,
        every_cycle && growth >= 1.1 && saturated,
        start.elapsed(),
        Duration::from_secs(300),
        &format!("ΔH_in > 0 every cycle: {every_cycle}, 𝓔 ratio {growth:.3}, gain(5e-2)/gain(5e-3) {ratio:.2}"),
    )
}

fn criterion_9_slow_fast() -> bool {
    let start = Instant::now();
    let m = breathing(0.0);
    let s = CylinderState::new(0.8, 0.4).unwrap();
    let gap = |a: CylinderState, b: CylinderState| (a.energy() - b.energy()).hypot(a.t() - b.t());
    let inner = |eps: f64| gap(step_inner(s, eps, &m).unwrap(), flow_in(s, eps, &m).unwrap());
    let outer = |eps: f64| {
        gap(
            s_truncated(s, eps, &m, DomainCheck::Override).unwrap(),
            flow_out(s, eps, &m).unwrap(),
        )
    };
    let inner_ratio = inner(2e-3) / inner(1e-3);
    let outer_ratio = outer(2e-3) / outer(1e-3);

    let epsilons = [4e-3, 2e-3, 1e-3];
    let (phi, theta, energy, t) = (1.1, 1.2, 0.5, 0.3);
    let axes = m.semi_axes(t);
    let frozen = step_frozen(FrozenState::new(phi, theta).unwrap(), axes.a, axes.b).unwrap();
    let distances: Vec<f64> = epsilons
        .iter()
        .map(|&eps| {
            let full = step_full(&PhaseState::new(phi, theta, energy, t, eps).unwrap(), &m).unwrap();
            let dphi = (full.state.phi() - frozen.phi() + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
            dphi.hypot(full.state.theta() - frozen.theta())
        })
        .collect();
    let slope = loglog_slope(&epsilons, &distances);
    verdict(
        9,
        (inner_ratio - 4.0).abs() <= 0.5 && (outer_ratio - 4.0).abs() <= 0.5 && (slope - 1.0).abs() <= 0.1,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("inner ratio {inner_ratio:.3}, scattering ratio {outer_ratio:.3}, full-vs-frozen slope {slope:.3}"),
    )
}

fn criterion_10_first_order_splitting() -> bool {
    let start = Instant::now();
    let m = breathing(0.0);
    let (tau, t, energy, terms) = (0.3, 0.1, 0.5f64, 30);
    let v = (2.0 * energy).sqrt();
    let m1 = m1_closed(tau, t, v, &m).unwrap();
    let m2 = m2_closed(tau, t, &m).unwrap();
    let residual = |eps: f64, delta: f64| {
        let sum = true_splitting_sum(tau, t, energy, eps, delta, &m, terms).unwrap();
        (sum - eps * m1 - delta * m2).abs()
    };
    let epsilons = [4e-3, 2e-3, 1e-3];

    let at_delta: Vec<f64> = epsilons.iter().map(|&e| residual(e, 0.05)).collect();
    let slope = loglog_slope(&epsilons, &at_delta);

    // Diagnostics: the two second-order terms separately.
    let eps_only: Vec<f64> = epsilons.iter().map(|&e| residual(e, 0.0)).collect();
    let deltas = [0.04, 0.02, 0.01];
    let delta_only: Vec<f64> = deltas.iter().map(|&d| residual(0.0, d)).collect();
    println!(
        "criterion 10 diagnostics: residuals at δ = 0.05 {:?}; ε-slope at δ = 0 {:.2}; δ-slope at ε = 0 {:.2}",
        at_delta.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>(),
        loglog_slope(&epsilons, &eps_only),
        loglog_slope(&deltas, &delta_only)
    );
    verdict(
        10,
        slope >= 1.8,
        start.elapsed(),
        Duration::from_secs(300),
        &format!("log-log slope in ε at δ = 0.05: {slope:.3} (need ≥ 1.8)"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> bool); 10] = [
        (1, criterion_1_elliptic_kernel),
        (2, criterion_2_lattice_sum),
        (3, criterion_3_frozen_conservation),
        (4, criterion_4_melnikov_oracles),
        (5, criterion_5_critical_times),
        (6, criterion_6_domain_consistency),
        (7, criterion_7_scattering_sums),
        (8, criterion_8_acceleration),
        (9, criterion_9_slow_fast),
        (10, criterion_10_first_order_splitting),
    ];
    let mut failed = Vec::new();
    for (n, run) in criteria {
        // A panic inside a criterion counts as a failure of that criterion only.
        let passed = std::panic::catch_unwind(run).unwrap_or_else(|_| {
            println!("criterion {n}: FAIL (panicked)");
            false
        });
        if !passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
