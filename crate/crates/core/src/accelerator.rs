//! Energy pumping by alternating the inner map with the truncated scattering
//! map.
//!
//! Along the inner map `H_in = 2 sqrt(2E) a` is nearly conserved; along the
//! scattering map `H_out = 2 sqrt(2E) c` is. Where `ċ/c < ȧ/a` the second
//! raises `H_in`, so the orbit scatters while `t` lies in such a band next to
//! a critical time of `a/b` and otherwise follows the inner map.

use crate::boundary::BoundaryModel;
use crate::inner::{h_in, step_inner, CylinderState};
use crate::melnikov::{DomainStatus, SplittingConfig};
use crate::scattering::{h_out, s_truncated, DomainCheck, DomainGuard};
use crate::solve::brent;
use crate::{Error, Result};

const SCAN_GRID: usize = 4096;
const DEGENERACY_TOL: f64 = 1e-8;

/// `f = a ḃ − ȧ b`; `d(a/b)/dt = −f/b²` and `ȧ/a − ċ/c = b f/(a c²)`.
fn f_of(boundary: &BoundaryModel, t: f64) -> f64 {
    let ax = boundary.semi_axes(t);
    ax.a * ax.b_dot - ax.a_dot * ax.b
}

fn f_dot(boundary: &BoundaryModel, t: f64) -> f64 {
    let (a, b) = (boundary.a_poly(), boundary.b_poly());
    a.value(t) * b.derivative(t, 2) - a.derivative(t, 2) * b.value(t)
}

/// A critical time of `a/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalTime {
    pub t: f64,
    /// Sign of `d²(a/b)/dt²`: `+1` at a minimum, `−1` at a maximum.
    pub curvature_sign: f64,
}

/// All critical points of `a/b` in `[0, 1)`, each required to be
/// nondegenerate.
pub fn critical_times(boundary: &BoundaryModel) -> Result<Vec<CriticalTime>> {
    let step = 1.0 / SCAN_GRID as f64;
    // Half-cell offset keeps exact roots such as t = 0 inside a cell.
    let grid: Vec<f64> = (0..=SCAN_GRID).map(|i| (i as f64 - 0.5) * step).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| f_of(boundary, t)).collect();
    let scale = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale <= 1e-12 {
        return Err(Error::DegenerateCriticalPoint { t: 0.0 });
    }
    let mut out = Vec::new();
    for i in 0..SCAN_GRID {
        let (flo, fhi) = (vals[i], vals[i + 1]);
        if flo.signum() != fhi.signum() {
            let r = brent(|t| f_of(boundary, t), grid[i], grid[i + 1], 1e-15)
                .expect("sign change brackets a root");
            let t = if r.rem_euclid(1.0) >= 1.0 { 0.0 } else { r.rem_euclid(1.0) };
            let b = boundary.b_poly().value(t);
            let second = -f_dot(boundary, t) / (b * b);
            if second.abs() < DEGENERACY_TOL {
                return Err(Error::DegenerateCriticalPoint { t });
            }
            out.push(CriticalTime {
                t,
                curvature_sign: second.signum(),
            });
        } else if i > 0 {
            // touching zero without crossing
            let prev = vals[i - 1];
            if flo.abs() < 1e-9 * scale && flo.abs() <= prev.abs() && flo.abs() <= fhi.abs() {
                return Err(Error::DegenerateCriticalPoint { t: grid[i] });
            }
        }
    }
    out.sort_by(|x, y| x.t.total_cmp(&y.t));
    Ok(out)
}

/// Times `[t₁, t₂]` (possibly extending past 1) adjacent to a critical time
/// where scattering raises `H_in` and the scattering map is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingBand {
    pub t1: f64,
    pub t2: f64,
}

impl SwitchingBand {
    pub fn width(&self) -> f64 {
        self.t2 - self.t1
    }

    /// Membership modulo 1.
    pub fn contains(&self, t: f64) -> bool {
        let shifted = self.t1 + (t - self.t1).rem_euclid(1.0);
        shifted <= self.t2
    }
}

const BAND_PROBE: f64 = 1e-3;
const BAND_TOL: f64 = 1e-10;

/// Band at physical energy `𝓔` next to `t_star`, on the side where
/// `ċ/c < ȧ/a`.
pub fn switching_band(
    t_star: f64,
    physical_energy: f64,
    guard: &DomainGuard,
    boundary: &BoundaryModel,
) -> Result<SwitchingBand> {
    let energy = physical_energy * guard.cfg.eps * guard.cfg.eps;
    band_along(t_star, |_| energy, guard, boundary)
}

/// Level curves of the two Hamiltonians, used to predict the energy an
/// orbit will have on reaching a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    /// `H_in = 2 sqrt(2E) a(t)`.
    Inner(f64),
    /// `H_out = 2 sqrt(2E) c(t)`.
    Outer(f64),
}

impl Level {
    /// Rescaled energy on the level curve at time `t`.
    pub fn energy_at(&self, t: f64, boundary: &BoundaryModel) -> f64 {
        let root = match *self {
            Level::Inner(h) => h / (2.0 * boundary.a_poly().value(t)),
            Level::Outer(h) => h / (2.0 * boundary.c(t)),
        };
        0.5 * root * root
    }
}

/// Band next to `t_star` for an orbit following the level curve `level`.
pub fn switching_band_on_level(
    t_star: f64,
    level: Level,
    guard: &DomainGuard,
    boundary: &BoundaryModel,
) -> Result<SwitchingBand> {
    band_along(t_star, |t| level.energy_at(t, boundary), guard, boundary)
}

fn band_along<F: Fn(f64) -> f64>(
    t_star: f64,
    energy_at: F,
    guard: &DomainGuard,
    boundary: &BoundaryModel,
) -> Result<SwitchingBand> {
    let side = f_dot(boundary, t_star).signum();
    let admissible = |t: f64| -> Result<bool> {
        if f_of(boundary, t) <= 0.0 {
            return Ok(false);
        }
        let s = CylinderState::new(energy_at(t), t)?;
        Ok(guard.status(s, boundary)? == DomainStatus::Inside)
    };
    let first = t_star + side * 1e-9;
    if !admissible(first)? {
        return Err(Error::EmptyBand { t_star });
    }
    let mut inside = 1e-9;
    let mut outside = None;
    let mut d = BAND_PROBE;
    while d < 1.0 {
        if !admissible(t_star + side * d)? {
            outside = Some(d);
            break;
        }
        inside = d;
        d += BAND_PROBE;
    }
    let mut outside = outside.unwrap_or(1.0);
    while outside - inside > BAND_TOL {
        let mid = 0.5 * (inside + outside);
        if admissible(t_star + side * mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(if side > 0.0 {
        SwitchingBand {
            t1: t_star,
            t2: t_star + inside,
        }
    } else {
        SwitchingBand {
            t1: t_star - inside,
            t2: t_star,
        }
    })
}

/// One cycle of the function system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub inner_steps: usize,
    pub scatter_steps: usize,
    pub h_in_before: f64,
    pub h_in_after: f64,
    /// Scattering stopped on a domain violation that persisted after
    /// recomputing the band along the current `H_out` level.
    pub aborted: bool,
}

impl Cycle {
    pub fn gain(&self) -> f64 {
        self.h_in_after - self.h_in_before
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IfsItinerary {
    pub cycles: Vec<Cycle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapTag {
    Inner,
    Scatter,
}

impl MapTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MapTag::Inner => "inner",
            MapTag::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub index: usize,
    pub tag: MapTag,
    pub energy: f64,
    pub t: f64,
    pub h_in: f64,
    pub h_out: f64,
    pub physical_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfsRun {
    pub itinerary: IfsItinerary,
    pub trace: Vec<TraceRow>,
    pub final_state: CylinderState,
}

/// `log(a/c)` gained by following `H_out` across the band.
fn band_gain(band: &SwitchingBand, boundary: &BoundaryModel) -> f64 {
    let ratio = |t: f64| (boundary.a_poly().value(t) / boundary.c(t)).ln();
    ratio(band.t2) - ratio(band.t1)
}

/// Of the bands next to each critical time, the one whose traversal gains
/// the most.
fn best_band(
    critical: &[CriticalTime],
    level: Level,
    guard: &DomainGuard,
    boundary: &BoundaryModel,
) -> Result<(f64, SwitchingBand)> {
    critical
        .iter()
        .filter_map(|c| {
            switching_band_on_level(c.t, level, guard, boundary)
                .ok()
                .map(|b| (c.t, b))
        })
        .max_by(|x, y| band_gain(&x.1, boundary).total_cmp(&band_gain(&y.1, boundary)))
        .ok_or(Error::EmptyBand {
            t_star: critical.first().map_or(f64::NAN, |c| c.t),
        })
}

/// Runs `cycles` cycles from `start`: inner steps until `t` enters the most
/// profitable switching band, then scattering steps while it stays there.
pub fn run_ifs(
    start: CylinderState,
    cycles: usize,
    cfg: SplittingConfig,
    boundary: &BoundaryModel,
) -> Result<IfsRun> {
    let eps = cfg.eps;
    let floor = cfg.energy_floor();
    if start.physical_energy(eps) < floor {
        return Err(Error::BelowEnergyFloor {
            energy: start.physical_energy(eps),
            floor,
        });
    }
    let guard = DomainGuard::new(cfg, boundary)?;
    let critical = critical_times(boundary)?;
    let max_steps = (10.0 / eps).floor() as usize;

    let mut trace = Vec::new();
    let mut s = start;
    let record = |tag: MapTag, x: CylinderState, trace: &mut Vec<TraceRow>| {
        trace.push(TraceRow {
            index: trace.len(),
            tag,
            energy: x.energy(),
            t: x.t(),
            h_in: h_in(x, boundary),
            h_out: h_out(x, boundary),
            physical_energy: x.physical_energy(eps),
        });
    };
    record(MapTag::Inner, s, &mut trace);

    let mut itinerary = IfsItinerary::default();
    for _ in 0..cycles {
        let (t_star, mut band) = best_band(&critical, Level::Inner(h_in(s, boundary)), &guard, boundary)?;
        let h_before = h_in(s, boundary);

        // Inner phase: at least one step, ending on entry into a band.
        let mut inner_steps = 0;
        let mut was_inside = band.contains(s.t());
        loop {
            s = step_inner(s, eps, boundary)?;
            inner_steps += 1;
            record(MapTag::Inner, s, &mut trace);
            let now = band.contains(s.t());
            if now && !was_inside {
                break;
            }
            was_inside = now;
            if inner_steps >= max_steps {
                return Err(Error::EmptyBand {
                    t_star: critical[0].t,
                });
            }
        }

        // Scattering phase.
        let mut scatter_steps = 0;
        let mut retried = false;
        let mut aborted = false;
        while band.contains(s.t()) && inner_steps + scatter_steps < max_steps {
            match s_truncated(s, eps, boundary, DomainCheck::Enforce(&guard)) {
                Ok(next) => {
                    s = next;
                    scatter_steps += 1;
                    record(MapTag::Scatter, s, &mut trace);
                }
                Err(Error::OutsideScatteringDomain { .. }) if !retried => {
                    retried = true;
                    let level = Level::Outer(h_out(s, boundary));
                    match switching_band_on_level(t_star, level, &guard, boundary) {
                        Ok(b) => band = b,
                        Err(Error::EmptyBand { .. }) => {
                            aborted = true;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::OutsideScatteringDomain { .. }) => {
                    aborted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        itinerary.cycles.push(Cycle {
            inner_steps,
            scatter_steps,
            h_in_before: h_before,
            h_in_after: h_in(s, boundary),
            aborted,
        });
    }
    Ok(IfsRun {
        itinerary,
        trace,
        final_state: s,
    })
}
