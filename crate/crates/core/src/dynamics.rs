//! Hamiltonian flow of the semi-classical portrait `Ȟ(q,p)`.
//!
//! With `w = 1/m̌`, `A = ħ²γ m̌'/m̌` and `π = p - A`:
//!
//! ```text
//! q̇ =  w π
//! ṗ = -(w'/2) π² + w π A' - V̌_eff'
//! ```

use crate::error::{Error, Result};
use crate::math::grid::{Grid1D, PhaseGrid};
use crate::portrait::{coupling, coupling_d1, h_check, m_check_jet, v_eff_check, v_eff_check_d1, PortraitContext};

/// Canonical pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        (self.q - other.q).hypot(self.p - other.p)
    }
}

/// Time derivative of a phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub qdot: f64,
    pub pdot: f64,
}

pub fn hamilton_rhs(ctx: &PortraitContext, s: PhasePoint) -> Result<Flow> {
    let w = m_check_jet(ctx, s.q);
    let floor = ctx.model.mass_floor();
    if w.value < floor {
        return Err(Error::MassFloor { q: s.q, value: w.value, floor });
    }
    let pi = s.p - coupling(ctx, s.q)?;
    let da = coupling_d1(ctx, s.q)?;
    let dv = v_eff_check_d1(ctx, s.q)?;
    Ok(Flow { qdot: w.value * pi, pdot: -0.5 * w.d1 * pi * pi + w.value * pi * da - dv })
}

/// `(q̇, ṗ)` on every node of a phase grid; `None` where the mass floor
/// is hit.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: PhaseGrid,
    pub values: Vec<Option<Flow>>,
}

impl VectorField {
    pub fn get(&self, iq: usize, ip: usize) -> Option<Flow> {
        self.values[iq * self.grid.p().len() + ip]
    }
}

pub fn vector_field(ctx: &PortraitContext, grid: &PhaseGrid) -> VectorField {
    let values = grid
        .q()
        .points()
        .flat_map(|q| grid.p().points().map(move |p| PhasePoint::new(q, p)))
        .map(|s| hamilton_rhs(ctx, s).ok())
        .collect();
    VectorField { grid: *grid, values }
}

/// One record of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub energy: f64,
    pub qdot: f64,
}

/// Why the particle is considered lost to a wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EscapeReason {
    /// The inverse mass dropped below the floor.
    MassFloor,
    /// The particle moves outward with `V̌_eff < E` on the whole remaining
    /// path to the floor, so it can never turn back.
    NoTurningPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus {
    Completed,
    TrajectoryEscape { t: f64, q: f64, reason: EscapeReason },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn initial_energy(&self) -> f64 {
        self.samples[0].energy
    }

    /// `max |E(t) - E(0)| / max(|E(0)|, ε)`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.initial_energy();
        let scale = e0.abs().max(f64::EPSILON);
        self.samples.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max) / scale
    }

    pub fn escaped(&self) -> bool {
        matches!(self.status, TrajectoryStatus::TrajectoryEscape { .. })
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint::new(self.samples[i].q, self.samples[i].p)
    }
}

/// Largest energy change tolerated in a single step, relative to `|E(0)|`.
pub const STEP_DRIFT_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Stop as soon as the particle is committed to a wall. When false the
    /// escape is recorded and integration continues until the floor or the
    /// step budget.
    pub halt_on_escape: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { halt_on_escape: true }
    }
}

/// Classic fourth-order Runge-Kutta integration of the portrait flow.
pub fn integrate(ctx: &PortraitContext, s0: PhasePoint, dt: f64, n_steps: usize) -> Result<Trajectory> {
    integrate_with(ctx, s0, dt, n_steps, IntegrateOptions::default())
}

pub fn integrate_with(
    ctx: &PortraitContext,
    s0: PhasePoint,
    dt: f64,
    n_steps: usize,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let e0 = h_check(ctx, s0.q, s0.p)?;
    let f0 = hamilton_rhs(ctx, s0)?;
    let limit = STEP_DRIFT_LIMIT * e0.abs().max(f64::EPSILON);
    let exits = EscapeBounds::new(ctx, e0);
    let mut samples = Vec::with_capacity(n_steps.min(1 << 20) + 1);
    samples.push(Sample { t: 0.0, q: s0.q, p: s0.p, energy: e0, qdot: f0.qdot });
    let mut s = s0;
    let mut qdot = f0.qdot;
    let mut status = TrajectoryStatus::Completed;
    for k in 1..=n_steps {
        let t = k as f64 * dt;
        if status == TrajectoryStatus::Completed && exits.committed(s.q, qdot) {
            status = TrajectoryStatus::TrajectoryEscape { t: t - dt, q: s.q, reason: EscapeReason::NoTurningPoint };
            if opts.halt_on_escape {
                break;
            }
        }
        let next = match rk4_step(ctx, s, dt) {
            Ok(n) => n,
            Err(Error::MassFloor { q, .. }) => {
                if status == TrajectoryStatus::Completed {
                    // a stage left the support without the particle being bound
                    // for the wall: the step is too coarse
                    return Err(Error::Step { drift: f64::INFINITY, limit });
                }
                let _ = q;
                break;
            }
            Err(e) => return Err(e),
        };
        let (energy, flow) = match (h_check(ctx, next.q, next.p), hamilton_rhs(ctx, next)) {
            (Ok(e), Ok(f)) => (e, f),
            _ => {
                if status == TrajectoryStatus::Completed {
                    return Err(Error::Step { drift: f64::INFINITY, limit });
                }
                break;
            }
        };
        let prev = samples.last().map(|x: &Sample| x.energy).unwrap_or(e0);
        if (energy - prev).abs() > limit {
            return Err(Error::Step { drift: (energy - prev).abs(), limit });
        }
        s = next;
        qdot = flow.qdot;
        samples.push(Sample { t, q: s.q, p: s.p, energy, qdot });
    }
    Ok(Trajectory { dt, samples, status })
}

fn rk4_step(ctx: &PortraitContext, s: PhasePoint, dt: f64) -> Result<PhasePoint> {
    let shift = |f: &Flow, h: f64| PhasePoint::new(s.q + h * f.qdot, s.p + h * f.pdot);
    let k1 = hamilton_rhs(ctx, s)?;
    let k2 = hamilton_rhs(ctx, shift(&k1, dt / 2.0))?;
    let k3 = hamilton_rhs(ctx, shift(&k2, dt / 2.0))?;
    let k4 = hamilton_rhs(ctx, shift(&k3, dt))?;
    Ok(PhasePoint::new(
        s.q + dt / 6.0 * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot),
        s.p + dt / 6.0 * (k1.pdot + 2.0 * k2.pdot + 2.0 * k3.pdot + k4.pdot),
    ))
}

/// Outermost points beyond which a particle of energy `E` moving outward can
/// no longer turn back.
#[derive(Debug, Clone, Copy)]
struct EscapeBounds {
    left: f64,
    right: f64,
}

const ESCAPE_SAMPLES: usize = 4000;

impl EscapeBounds {
    fn new(ctx: &PortraitContext, energy: f64) -> Self {
        let (lo, hi) = floor_boundaries(ctx);
        let mid = ctx.model.interval().midpoint();
        let scan = |from: f64, to: f64| -> f64 {
            // walk inward from the floor until V̌_eff reaches E
            let h = (to - from) / ESCAPE_SAMPLES as f64;
            let mut last = from;
            for i in 0..=ESCAPE_SAMPLES {
                let x = from + i as f64 * h;
                match v_eff_check(ctx, x) {
                    Ok(v) if v < energy => last = x,
                    Ok(_) => return last,
                    Err(_) => last = x,
                }
            }
            to
        };
        let right = scan(hi, mid);
        let left = scan(lo, mid);
        Self { left, right }
    }

    fn committed(&self, q: f64, qdot: f64) -> bool {
        (q > self.right && qdot > 0.0) || (q < self.left && qdot < 0.0)
    }
}

/// Points where the semi-classical inverse mass reaches the floor, found by
/// bisection outward from the interval.
pub fn floor_boundaries(ctx: &PortraitContext) -> (f64, f64) {
    let iv = ctx.model.interval();
    let floor = ctx.model.mass_floor();
    let above = |x: f64| m_check_jet(ctx, x).value >= floor;
    let search = |inside: f64, dir: f64| {
        let mut step = iv.width();
        let mut outside = inside + dir * step;
        while above(outside) {
            step *= 2.0;
            outside = inside + dir * step;
        }
        let (mut a, mut b) = (inside, outside);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if above(m) {
                a = m;
            } else {
                b = m;
            }
            if (a - b).abs() < 1e-13 * iv.width() {
                break;
            }
        }
        a
    };
    let mid = iv.midpoint();
    (search(mid, -1.0), search(mid, 1.0))
}

/// A point where `q̇` changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    pub t: f64,
    pub q: f64,
}

/// Sign changes of `q̇`, located by quadratic interpolation through three
/// neighbouring samples.
pub fn turning_points(traj: &Trajectory) -> Vec<TurningPoint> {
    let s = &traj.samples;
    let mut out = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        let (a, b) = (s[i].qdot, s[i + 1].qdot);
        if a == 0.0 || a.signum() == b.signum() {
            continue;
        }
        let (t0, t1, t2) = (s[i - 1].t, s[i].t, s[i + 1].t);
        let (y0, y1, y2) = (s[i - 1].qdot, a, b);
        let h = t1 - t0;
        // y(u) = y1 + u (y2 - y0)/2 + u² (y2 - 2y1 + y0)/2, u = (t - t1)/h
        let (c1, c2) = ((y2 - y0) / 2.0, (y2 - 2.0 * y1 + y0) / 2.0);
        let u = if c2.abs() < 1e-14 * c1.abs() {
            -y1 / c1
        } else {
            let disc = (c1 * c1 - 4.0 * c2 * y1).max(0.0).sqrt();
            let r1 = (-c1 + disc) / (2.0 * c2);
            let r2 = (-c1 - disc) / (2.0 * c2);
            if (0.0..=1.0).contains(&r1) { r1 } else { r2 }
        };
        let t = t1 + u * h;
        let frac = ((t - t1) / (t2 - t1)).clamp(0.0, 1.0);
        out.push(TurningPoint { t, q: s[i].q + frac * (s[i + 1].q - s[i].q) });
    }
    out
}

/// Closed-orbit diagnostics: period from consecutive same-side turning
/// points and distance from the start after one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closure {
    pub period: f64,
    pub distance: f64,
}

pub fn closure(traj: &Trajectory) -> Option<Closure> {
    let tp = turning_points(traj);
    if tp.len() < 3 {
        return None;
    }
    let period = tp[2].t - tp[0].t;
    let at = interpolate(traj, period)?;
    Some(Closure { period, distance: at.distance(&traj.point(0)) })
}

/// State at time `t` by linear interpolation between samples.
pub fn interpolate(traj: &Trajectory, t: f64) -> Option<PhasePoint> {
    let i = (t / traj.dt).floor() as usize;
    let s = &traj.samples;
    if i + 1 >= s.len() {
        return None;
    }
    let f = (t - s[i].t) / traj.dt;
    Some(PhasePoint::new(s[i].q + f * (s[i + 1].q - s[i].q), s[i].p + f * (s[i + 1].p - s[i].p)))
}

/// Branches `p±(q) = A(q) ± √(2 m̌ (E - V̌_eff))` of the energy level set.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub energy: f64,
    pub q: Vec<f64>,
    pub p_plus: Vec<Option<f64>>,
    pub p_minus: Vec<Option<f64>>,
}

impl LevelSet {
    pub fn is_empty(&self) -> bool {
        self.p_plus.iter().all(Option::is_none)
    }

    /// Maximal runs of defined nodes, as index ranges.
    pub fn components(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, v) in self.p_plus.iter().enumerate() {
            match (v.is_some(), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.p_plus.len() - 1));
        }
        out
    }
}

pub fn level_set(ctx: &PortraitContext, energy: f64, qgrid: &Grid1D) -> LevelSet {
    let mut q = Vec::with_capacity(qgrid.len());
    let mut p_plus = Vec::with_capacity(qgrid.len());
    let mut p_minus = Vec::with_capacity(qgrid.len());
    for x in qgrid.points() {
        q.push(x);
        let branch = (|| {
            let w = m_check_jet(ctx, x).value;
            let v = v_eff_check(ctx, x).ok()?;
            let a = coupling(ctx, x).ok()?;
            (energy >= v).then(|| (a, (2.0 * (energy - v) / w).sqrt()))
        })();
        p_plus.push(branch.map(|(a, r)| a + r));
        p_minus.push(branch.map(|(a, r)| a - r));
    }
    LevelSet { energy, q, p_plus, p_minus }
}

/// Classically allowed q-intervals bounded by turning points on both sides
/// (closed level curves), found on a fine grid spanning the floor region.
pub fn closed_contours(ctx: &PortraitContext, energy: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = floor_boundaries(ctx);
    let grid = Grid1D::spanning(lo, hi, n)?;
    let ls = level_set(ctx, energy, &grid);
    Ok(ls
        .components()
        .into_iter()
        .filter(|&(i, j)| i > 0 && j + 1 < n)
        .map(|(i, j)| (grid.x(i), grid.x(j)))
        .collect())
}

/// `𝔥̌(q, q̇) = m̌ q̇²/2 + V̌_eff(q)`.
pub fn reparam_h(ctx: &PortraitContext, q: f64, qdot: f64) -> Result<f64> {
    let w = m_check_jet(ctx, q).value;
    let floor = ctx.model.mass_floor();
    if w < floor {
        return Err(Error::MassFloor { q, value: w, floor });
    }
    Ok(qdot * qdot / (2.0 * w) + v_eff_check(ctx, q)?)
}

/// Velocity branches `q̇±(q) = ±√(2 (E - V̌_eff)/m̌)` of the reparametrized
/// level set.
pub fn qdot_level_set(ctx: &PortraitContext, energy: f64, qgrid: &Grid1D) -> LevelSet {
    let mut ls = level_set(ctx, energy, qgrid);
    for (i, x) in qgrid.points().enumerate() {
        let w = m_check_jet(ctx, x).value;
        let r = v_eff_check(ctx, x).ok().filter(|&v| energy >= v).map(|v| (2.0 * (energy - v) * w).sqrt());
        ls.p_plus[i] = r;
        ls.p_minus[i] = r.map(|r| -r);
    }
    ls
}
