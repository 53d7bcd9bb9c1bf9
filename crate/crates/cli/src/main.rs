//! Command-line driver: loads a boundary, runs one experiment and writes its
//! tables as CSV with a JSON summary alongside.

mod output;
mod selftest;

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ellipse_fermi::accelerator::{critical_times, run_ifs, Level};
use ellipse_fermi::boundary::BoundaryModel;
use ellipse_fermi::dynmap::{step_full, PhaseState};
use ellipse_fermi::inner::{h_in, step_inner, CylinderState};
use ellipse_fermi::melnikov::{domain_threshold, in_domain, DomainStatus, MelnikovFrame, SplittingConfig};
use ellipse_fermi::scattering::{h_out, s_truncated, DomainCheck, DomainGuard};
use ellipse_fermi::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use output::{content_hash, write_run, Cell, Summary, Table};

#[derive(Debug, Parser)]
#[command(name = "ellipse-fermi", version, about = "Energy growth in a breathing elliptic billiard")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Boundary config file; the breathing ellipse a = 5 + sin 2πt,
    /// b = 2 − cos 2πt when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Ratio of boundary speed to particle speed.
    #[arg(long, global = true, default_value_t = 1e-3)]
    eps: f64,
    /// Quartic deformation; overrides the config value.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for the CSV tables and the JSON summary.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Points per axis of sampled grids.
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate the full billiard map.
    Simulate {
        /// Initial position parameter; drawn from the seed when absent.
        #[arg(long)]
        phi: Option<f64>,
        /// Initial reflection angle; drawn from the seed when absent.
        #[arg(long)]
        theta: Option<f64>,
        /// Rescaled energy E = ε²𝓔.
        #[arg(long, default_value_t = 0.5)]
        energy: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Iterate the inner map and sample the H_in level through the start.
    Inner {
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Iterate the truncated scattering map and sample the H_out level.
    Scatter {
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Keep iterating outside the scattering domain.
        #[arg(long)]
        no_domain_check: bool,
    },
    /// Tabulate M₁, M₂ and the splitting function over (τ, t, v).
    Melnikov {
        /// Single time slice instead of a t grid.
        #[arg(long)]
        t: Option<f64>,
        /// Rescaled particle speeds.
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        speeds: Vec<f64>,
    },
    /// Threshold curve of the scattering domain and an (𝓔, t) status grid.
    Domain,
    /// Alternate inner and scattering steps and record the energy gained.
    Accelerate {
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        #[arg(long, default_value_t = 5)]
        cycles: usize,
    },
    /// Check the numerics against independent oracles.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Inner { .. } => "inner",
            Command::Scatter { .. } => "scatter",
            Command::Melnikov { .. } => "melnikov",
            Command::Domain => "domain",
            Command::Accelerate { .. } => "accelerate",
            Command::Selftest => "selftest",
        }
    }
}

/// Exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Usage = 1,
    Config = 2,
    Numeric = 3,
}

#[derive(Debug)]
struct Failure {
    status: Status,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidBoundary(_)
            | Error::Config { .. }
            | Error::Domain(_)
            | Error::BelowEnergyFloor { .. }
            | Error::LowEnergy { .. } => {
                Status::Config
            }
            _ => Status::Numeric,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        status: Status::Usage,
        message,
    }
}

type Outcome = Result<(Vec<Table>, serde_json::Value), Failure>;

fn load_boundary(common: &Common) -> Result<BoundaryModel, Failure> {
    let model = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            BoundaryModel::from_config_str(&text)?
        }
        None => BoundaryModel::breathing(0.05)?,
    };
    Ok(match common.delta {
        Some(d) => model.with_delta(d)?,
        None => model,
    })
}

fn f(x: f64) -> Cell {
    Cell::Float(x)
}

fn simulate(
    common: &Common,
    m: &BoundaryModel,
    start: (Option<f64>, Option<f64>, f64, f64),
    steps: usize,
) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let (phi, theta, energy, t) = start;
    let phi = phi.unwrap_or_else(|| rng.gen_range(0.0..2.0 * PI));
    let theta = theta.unwrap_or_else(|| rng.gen_range(0.1..PI - 0.1));
    let mut s = PhaseState::new(phi, theta, energy, t, common.eps)?;
    let mut table = Table::new(
        "simulate",
        &["step", "phi", "theta", "energy", "t", "physical_energy", "newton_iterations"],
    );
    let row = |n: usize, s: &PhaseState, it: usize| {
        vec![
            n.into(),
            f(s.phi()),
            f(s.theta()),
            f(s.energy()),
            f(s.t()),
            f(s.physical_energy()),
            it.into(),
        ]
    };
    table.push(row(0, &s, 0));
    for n in 1..=steps {
        let c = step_full(&s, m)?;
        s = c.state;
        table.push(row(n, &s, c.iterations));
    }
    let results = json!({ "phi0": phi, "theta0": theta, "final_energy": s.energy() });
    Ok((vec![table], results))
}

/// Samples the level curve `level` over one period of `t`.
fn level_table(name: &'static str, level: Level, grid: usize, m: &BoundaryModel) -> Table {
    let mut table = Table::new(name, &["t", "energy"]);
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        table.push(vec![f(t), f(level.energy_at(t, m))]);
    }
    table
}

fn inner(common: &Common, m: &BoundaryModel, energy: f64, t: f64, steps: usize) -> Outcome {
    let mut s = CylinderState::new(energy, t)?;
    let level = Level::Inner(h_in(s, m));
    let mut trace = Table::new("inner_trace", &["step", "energy", "t", "h_in"]);
    trace.push(vec![0usize.into(), f(s.energy()), f(s.t()), f(h_in(s, m))]);
    for n in 1..=steps {
        s = step_inner(s, common.eps, m)?;
        trace.push(vec![n.into(), f(s.energy()), f(s.t()), f(h_in(s, m))]);
    }
    let results = json!({ "h_in_start": h_in(CylinderState::new(energy, t)?, m), "h_in_end": h_in(s, m) });
    Ok((vec![trace, level_table("inner_level", level, common.grid, m)], results))
}

fn scatter(common: &Common, m: &BoundaryModel, energy: f64, t: f64, steps: usize, check: bool) -> Outcome {
    let mut s = CylinderState::new(energy, t)?;
    let guard = if check {
        let delta = m.delta();
        Some(DomainGuard::new(SplittingConfig::new(common.eps, delta)?, m)?)
    } else {
        None
    };
    let level = Level::Outer(h_out(s, m));
    let mut trace = Table::new("scatter_trace", &["step", "energy", "t", "h_out"]);
    trace.push(vec![0usize.into(), f(s.energy()), f(s.t()), f(h_out(s, m))]);
    let mut stopped = false;
    for n in 1..=steps {
        let mode = guard.as_ref().map_or(DomainCheck::Override, DomainCheck::Enforce);
        match s_truncated(s, common.eps, m, mode) {
            Ok(next) => s = next,
            // The trace ends where the map stops being defined.
            Err(Error::OutsideScatteringDomain { .. }) if n > 1 => {
                stopped = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
        trace.push(vec![n.into(), f(s.energy()), f(s.t()), f(h_out(s, m))]);
    }
    let results = json!({ "steps": trace.len() - 1, "left_domain": stopped });
    Ok((vec![trace, level_table("scatter_level", level, common.grid, m)], results))
}

/// Bound on `|M₁|` relative to `4b max g / v` at a critical time.
const CRITICAL_M1_TOL: f64 = 1e-10;

/// Distance between two times on the circle `ℝ/ℤ`.
fn wrapped_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn melnikov(common: &Common, m: &BoundaryModel, t: Option<f64>, speeds: &[f64]) -> Outcome {
    if speeds.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(usage("speeds must be positive".into()));
    }
    let n = common.grid.max(1);
    let times: Vec<f64> = match t {
        Some(t) => vec![t],
        None => (0..n).map(|i| i as f64 / n as f64).collect(),
    };
    let delta = m.delta();
    let mut table = Table::new("melnikov", &["tau", "t", "v", "m1", "m2", "dbar"]);
    let mut worst_relative: f64 = 0.0;
    for &t in &times {
        let frame = MelnikovFrame::new(t, m)?;
        let h = frame.hyper.h;
        let taus: Vec<f64> = (0..n).map(|i| h * i as f64 / n as f64).collect();
        let gmax = taus.iter().map(|&x| frame.g(x)).fold(0.0, f64::max);
        for &v in speeds {
            let scale = 4.0 * frame.axes.b * gmax / v;
            for &tau in &taus {
                let m1 = frame.m1(tau, v);
                worst_relative = worst_relative.max(m1.abs() / scale);
                table.push(vec![
                    f(tau),
                    f(t),
                    f(v),
                    f(m1),
                    f(frame.m2(tau)),
                    f(frame.dbar(tau, v, common.eps, delta)),
                ]);
            }
        }
    }
    eprintln!("max |M1| / (4 b max g / v) on the grid = {worst_relative:.3e}");

    // The same ratio at the critical time nearest the first slice, where M₁
    // vanishes identically in τ.
    let nearest = critical_times(m)?
        .into_iter()
        .map(|c| c.t)
        .min_by(|x, y| wrapped_gap(*x, times[0]).total_cmp(&wrapped_gap(*y, times[0])));
    let at_critical = match nearest {
        Some(t_star) => {
            let frame = MelnikovFrame::new(t_star, m)?;
            let h = frame.hyper.h;
            let taus: Vec<f64> = (0..n).map(|i| h * i as f64 / n as f64).collect();
            let gmax = taus.iter().map(|&x| frame.g(x)).fold(0.0, f64::max);
            let worst = speeds
                .iter()
                .flat_map(|&v| taus.iter().map(move |&x| (x, v)))
                .map(|(x, v)| frame.m1(x, v).abs() * v / (4.0 * frame.axes.b * gmax))
                .fold(0.0, f64::max);
            eprintln!(
                "critical time t* = {t_star:.10}: max |M1| / scale = {worst:.3e} ({})",
                if worst <= CRITICAL_M1_TOL { "below tolerance" } else { "ABOVE tolerance" }
            );
            json!({ "t_star": t_star, "max_m1_over_scale": worst, "tolerance": CRITICAL_M1_TOL })
        }
        None => serde_json::Value::Null,
    };
    let results = json!({ "max_m1_over_scale": worst_relative, "nearest_critical": at_critical });
    Ok((vec![table], results))
}

fn domain(common: &Common, m: &BoundaryModel) -> Outcome {
    let cfg = SplittingConfig::new(common.eps, m.delta())?;
    let n = common.grid.max(2);
    let mut curve = Table::new("domain_curve", &["t", "sqrt_energy_threshold", "margin"]);
    let k = cfg.margin(m)?;
    let mut top: f64 = 0.0;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let th = domain_threshold(t, cfg.delta, m)?;
        top = top.max(th);
        curve.push(vec![f(t), f(th), f(k)]);
    }
    let lo = cfg.energy_floor().sqrt();
    let hi = (2.0 * top).max(2.0 * lo);
    let mut grid = Table::new("domain_grid", &["t", "sqrt_energy", "status"]);
    let mut inside = 0;
    for i in 0..n {
        let t = i as f64 / n as f64;
        for j in 0..n {
            let root = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            let status = in_domain(root * root, t, &cfg, m)?;
            inside += usize::from(status == DomainStatus::Inside);
            let label = match status {
                DomainStatus::Inside => "inside",
                DomainStatus::Outside => "outside",
                DomainStatus::Indeterminate => "indeterminate",
            };
            grid.push(vec![f(t), f(root), label.into()]);
        }
    }
    let critical: Vec<f64> = critical_times(m)?.iter().map(|c| c.t).collect();
    let results = json!({
        "margin": k,
        "energy_floor": cfg.energy_floor(),
        "max_threshold": top,
        "inside_fraction": inside as f64 / (n * n) as f64,
        "critical_times": critical,
    });
    Ok((vec![curve, grid], results))
}

fn accelerate(common: &Common, m: &BoundaryModel, energy: f64, t: f64, cycles: usize) -> Outcome {
    let cfg = SplittingConfig::new(common.eps, m.delta())?;
    let run = run_ifs(CylinderState::new(energy, t)?, cycles, cfg, m)?;
    let mut itinerary = Table::new(
        "itinerary",
        &["cycle", "inner_steps", "scatter_steps", "h_in_before", "h_in_after", "gain", "aborted"],
    );
    for (i, c) in run.itinerary.cycles.iter().enumerate() {
        itinerary.push(vec![
            i.into(),
            c.inner_steps.into(),
            c.scatter_steps.into(),
            f(c.h_in_before),
            f(c.h_in_after),
            f(c.gain()),
            c.aborted.into(),
        ]);
    }
    let mut trace = Table::new("trace", &["step", "map", "energy", "t", "h_in", "h_out", "physical_energy"]);
    for r in &run.trace {
        trace.push(vec![
            r.index.into(),
            r.tag.as_str().into(),
            f(r.energy),
            f(r.t),
            f(r.h_in),
            f(r.h_out),
            f(r.physical_energy),
        ]);
    }
    let first = run.trace.first().map_or(f64::NAN, |r| r.physical_energy);
    let last = run.trace.last().map_or(f64::NAN, |r| r.physical_energy);
    let results = json!({
        "initial_physical_energy": first,
        "final_physical_energy": last,
        "energy_ratio": last / first,
    });
    Ok((vec![itinerary, trace], results))
}

fn run_selftest(seed: u64) -> Result<(), Failure> {
    let checks = selftest::run(seed);
    println!("{:<28} {:>12} {:>10}  result", "check", "error", "tolerance");
    for c in &checks {
        println!(
            "{:<28} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.error,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            status: Status::Numeric,
            message: format!("{failed} of {} checks failed", checks.len()),
        })
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    if !(common.eps > 0.0 && common.eps.is_finite()) {
        return Err(usage(format!("--eps must be positive, got {}", common.eps)));
    }
    if let Command::Selftest = cli.command {
        return run_selftest(common.seed);
    }
    let m = load_boundary(common)?;
    let (tables, results) = match &cli.command {
        Command::Simulate {
            phi,
            theta,
            energy,
            t,
            steps,
        } => simulate(common, &m, (*phi, *theta, *energy, *t), *steps)?,
        Command::Inner { energy, t, steps } => inner(common, &m, *energy, *t, *steps)?,
        Command::Scatter {
            energy,
            t,
            steps,
            no_domain_check,
        } => scatter(common, &m, *energy, *t, *steps, !no_domain_check)?,
        Command::Melnikov { t, speeds } => melnikov(common, &m, *t, speeds)?,
        Command::Domain => domain(common, &m)?,
        Command::Accelerate { energy, t, cycles } => accelerate(common, &m, *energy, *t, *cycles)?,
        Command::Selftest => unreachable!("handled above"),
    };
    let config = m.to_config_string();
    let summary = Summary {
        command: cli.command.name().to_string(),
        config_hash: content_hash(&config),
        config,
        eps: common.eps,
        delta: m.delta(),
        seed: common.seed,
        grid: common.grid,
        files: Vec::new(),
        results,
    };
    let written = write_run(&common.out, &tables, summary)
        .map_err(|e| usage(format!("cannot write to {}: {e}", common.out.display())))?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Status::Usage as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.status as u8)
        }
    }
}
