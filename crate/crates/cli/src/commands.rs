//! One function per command. Each writes its tables through a [`Sink`] and
//! returns the paths it wrote, in a fixed order.

use std::path::PathBuf;

use phasequant::dynamics::{
    closed_contours, integrate_with, level_set, qdot_level_set, vector_field, IntegrateOptions, LevelSet, PhasePoint,
    TrajectoryStatus,
};
use phasequant::math::grid::{Grid1D, PhaseGrid};
use phasequant::portrait::{chi_check, coupling, m_check, v_eff_check, PortraitContext};
use phasequant::quantum::{
    build_hamiltonian, calibrate, fock_q0_numeric, thermal_cutoff, FockQuadrature, CALIBRATION_TOL,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{label, Format, Sink, Table};

/// Resolution of the contour search behind the closed-orbit table.
const CONTOUR_NODES: usize = 4001;

fn q_grid(cfg: &RunConfig) -> Result<Grid1D> {
    let g = &cfg.grid;
    Ok(Grid1D::spanning(g.q_min, g.q_max, g.q_nodes)?)
}

fn ok(v: phasequant::Result<f64>) -> Option<f64> {
    v.ok().filter(|x| x.is_finite())
}

/// Profiles `f_k(q)` side by side, one column per labelled context.
fn profile_table(
    q: &Grid1D,
    columns: &[(String, PortraitContext)],
    f: impl Fn(&PortraitContext, f64) -> Option<f64> + Sync,
) -> Table {
    let mut t = Table::new(std::iter::once("q".to_string()).chain(columns.iter().map(|c| c.0.clone())).collect());
    let rows: Vec<Vec<Option<f64>>> = q
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| std::iter::once(Some(x)).chain(columns.iter().map(|(_, c)| f(c, x))).collect())
        .collect();
    rows.into_iter().for_each(|r| t.push(r));
    t
}

/// `χ̌(q)` for every `σp` of the sweep.
pub fn cmd_chi(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let cols = cfg
        .sigma_p_list()
        .into_iter()
        .map(|s| Ok((label("sigma_p", s), cfg.context_sigma_p(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let t = profile_table(&q_grid(cfg)?, &cols, |c, x| Some(chi_check(c, x)));
    Ok(vec![sink.table(stem, &t)?])
}

/// Classical truncated potential per `q0` and semi-classical inverse mass
/// per `σp`.
pub fn cmd_mass(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let q = q_grid(cfg)?;
    let pot_cols =
        cfg.q0_list().into_iter().map(|q0| Ok((label("q0", q0), cfg.context_q0(q0)?))).collect::<Result<Vec<_>>>()?;
    let pot = profile_table(&q, &pot_cols, |c, x| Some(c.model.potential_truncated(x)));
    let mass_cols = cfg
        .sigma_p_list()
        .into_iter()
        .map(|s| Ok((label("sigma_p", s), cfg.context_sigma_p(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let mass = profile_table(&q, &mass_cols, |c, x| Some(m_check(c, x)));
    Ok(vec![sink.table(&format!("{stem}_potential"), &pot)?, sink.table(stem, &mass)?])
}

/// Every `(σ, q0)` combination of the sweep with isotropic widths.
fn sigma_q0_contexts(cfg: &RunConfig) -> Result<Vec<(String, PortraitContext)>> {
    let mut out = Vec::new();
    for s in cfg.sigma_list() {
        for q0 in cfg.q0_list() {
            let base = cfg.context_sigma(s)?;
            let ctx = PortraitContext::new(base.model.with_q0(q0)?, base.window);
            out.push((format!("{}_{}", label("sigma", s), label("q0", q0)), ctx));
        }
    }
    Ok(out)
}

/// `V̌_eff(q)`, masked beyond the mass floor.
pub fn cmd_veff(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let cols = sigma_q0_contexts(cfg)?;
    let t = profile_table(&q_grid(cfg)?, &cols, |c, x| ok(v_eff_check(c, x)));
    Ok(vec![sink.table(stem, &t)?])
}

fn level_table(sets: &[LevelSet], names: (&str, &str)) -> Table {
    let mut cols = vec!["q".to_string()];
    for s in sets {
        cols.push(format!("{}_{}", names.0, label("E", s.energy)));
        cols.push(format!("{}_{}", names.1, label("E", s.energy)));
    }
    let mut t = Table::new(cols);
    if let Some(first) = sets.first() {
        for (i, &q) in first.q.iter().enumerate() {
            let mut row = vec![Some(q)];
            for s in sets {
                row.push(s.p_plus[i]);
                row.push(s.p_minus[i]);
            }
            t.push(row);
        }
    }
    t
}

/// Closed level curves `(q_left, q_right)` per energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourRow {
    pub case: String,
    pub energy: f64,
    pub contours: Vec<(f64, f64)>,
}

fn contour_table(rows: &[(f64, f64, ContourRow)]) -> Table {
    let mut t = Table::new(
        ["sigma", "q0", "E", "closed", "q_left", "q_right"].iter().map(|s| s.to_string()).collect(),
    );
    for (s, q0, r) in rows {
        if r.contours.is_empty() {
            t.push(vec![Some(*s), Some(*q0), Some(r.energy), Some(0.0), None, None]);
        }
        for &(l, h) in &r.contours {
            t.push(vec![Some(*s), Some(*q0), Some(r.energy), Some(1.0), Some(l), Some(h)]);
        }
    }
    t
}

/// Level sets `Ȟ = E`, the vector field and the closed-contour table.
pub fn cmd_phase(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let q = q_grid(cfg)?;
    let g = &cfg.grid;
    let field_grid = PhaseGrid::new(
        Grid1D::spanning(g.q_min, g.q_max, g.field_q_nodes)?,
        Grid1D::spanning(g.p_min, g.p_max, g.p_nodes)?,
        cfg.window.hbar,
    )?;
    let cases = sigma_q0_contexts(cfg)?;
    let energies = cfg.energies();
    let computed: Vec<(Table, Table, Vec<(f64, f64, ContourRow)>)> = cases
        .par_iter()
        .map(|(name, ctx)| -> Result<_> {
            let sets: Vec<LevelSet> = energies.iter().map(|&e| level_set(ctx, e, &q)).collect();
            let vf = vector_field(ctx, &field_grid);
            let mut ft = Table::new(["q", "p", "qdot", "pdot"].iter().map(|s| s.to_string()).collect());
            for (iq, x) in field_grid.q().points().enumerate() {
                for (ip, p) in field_grid.p().points().enumerate() {
                    let f = vf.get(iq, ip);
                    ft.push(vec![Some(x), Some(p), f.map(|f| f.qdot), f.map(|f| f.pdot)]);
                }
            }
            let rows = energies
                .iter()
                .map(|&e| {
                    let contours = closed_contours(ctx, e, CONTOUR_NODES)?;
                    Ok((ctx.window.sigma_p(), ctx.model.q0(), ContourRow { case: name.clone(), energy: e, contours }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((level_table(&sets, ("p_plus", "p_minus")), ft, rows))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut all_rows = Vec::new();
    for ((name, _), (levels, field, rows)) in cases.iter().zip(computed) {
        out.push(sink.table(&format!("{stem}_{name}"), &levels)?);
        out.push(sink.table(&format!("{stem}_field_{name}"), &field)?);
        all_rows.extend(rows);
    }
    out.push(sink.table(&format!("{stem}_closed"), &contour_table(&all_rows))?);
    Ok(out)
}

/// Level sets of `𝔥̌(q, q̇) = E`.
pub fn cmd_qqdot(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let q = q_grid(cfg)?;
    let cases = sigma_q0_contexts(cfg)?;
    let energies = cfg.energies();
    let tables: Vec<Table> = cases
        .par_iter()
        .map(|(_, ctx)| {
            let sets: Vec<LevelSet> = energies.iter().map(|&e| qdot_level_set(ctx, e, &q)).collect();
            level_table(&sets, ("qdot_plus", "qdot_minus"))
        })
        .collect();
    let mut out = Vec::new();
    for ((name, _), t) in cases.iter().zip(tables) {
        out.push(sink.table(&format!("{stem}_{name}"), &t)?);
    }
    Ok(out)
}

/// Momentum on the upper branch of `Ȟ = E` at `q`.
pub fn start_on_level(ctx: &PortraitContext, q: f64, energy: f64) -> Result<PhasePoint> {
    let w = m_check(ctx, q);
    let v = v_eff_check(ctx, q)?;
    if energy < v || !(w > 0.0) {
        return Err(CliError::Config(format!("no point of energy {energy} above q = {q} (V = {v})")));
    }
    Ok(PhasePoint::new(q, coupling(ctx, q)? + (2.0 * (energy - v) / w).sqrt()))
}

/// Integrated trajectories with columns `t,q,p,E,qdot`.
pub fn cmd_traj(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let ctx = cfg.context()?;
    let tr = &cfg.traj;
    let starts = (0..tr.q.len())
        .map(|i| match tr.p.get(i) {
            Some(&p) => Ok(PhasePoint::new(tr.q[i], p)),
            None => start_on_level(&ctx, tr.q[i], tr.energy[i]),
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = IntegrateOptions { halt_on_escape: !tr.follow_escape };
    let runs: Vec<(Table, Vec<Option<f64>>)> = starts
        .par_iter()
        .map(|&s0| -> Result<_> {
            let traj = integrate_with(&ctx, s0, tr.dt, tr.steps, opts)?;
            let mut t = Table::new(["t", "q", "p", "E", "qdot"].iter().map(|s| s.to_string()).collect());
            for s in &traj.samples {
                t.push(vec![Some(s.t), Some(s.q), Some(s.p), Some(s.energy), Some(s.qdot)]);
            }
            let (escaped, te, qe) = match traj.status {
                TrajectoryStatus::TrajectoryEscape { t, q, .. } => (1.0, Some(t), Some(q)),
                _ => (0.0, None, None),
            };
            Ok((t, vec![Some(s0.q), Some(s0.p), Some(traj.initial_energy()), Some(escaped), te, qe]))
        })
        .collect::<Result<_>>()?;
    let mut status =
        Table::new(["q0", "p0", "E", "escaped", "t_escape", "q_escape"].iter().map(|s| s.to_string()).collect());
    let mut out = Vec::new();
    for (i, (t, row)) in runs.into_iter().enumerate() {
        out.push(sink.table(&format!("{stem}_{i}"), &t)?);
        status.push(row);
    }
    out.push(sink.table(&format!("{stem}_status"), &status)?);
    Ok(out)
}

/// Spectrum of the grid Hamiltonian for every grid size, and the lowest
/// confined levels side by side.
pub fn cmd_spectrum(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let ctx = cfg.context()?;
    let sp = &cfg.spectrum;
    let iv = cfg.interval()?;
    let pad = sp.margin * ctx.hat_width();
    let spectra = sp
        .nodes
        .par_iter()
        .map(|&n| -> Result<_> {
            let g = Grid1D::spanning(iv.a() - pad, iv.b() + pad, n)?;
            Ok(build_hamiltonian(&ctx, &g)?.eigen())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut confined = Vec::new();
    for (&n, s) in sp.nodes.iter().zip(&spectra) {
        let mut t = Table::new(["index", "eigenvalue", "interior_weight"].iter().map(|s| s.to_string()).collect());
        let count = if sp.count == 0 { s.len() } else { sp.count.min(s.len()) };
        for k in 0..count {
            t.push(vec![Some(k as f64), Some(s.values[k]), Some(s.interior_weight(k, &iv))]);
        }
        out.push(sink.table(&format!("{stem}_{}", label("n", n as f64)), &t)?);
        confined.push(s.confined(&iv, sp.confined).into_iter().take(sp.levels).map(|k| s.values[k]).collect::<Vec<_>>());
    }
    let mut t = Table::new(
        std::iter::once("level".to_string()).chain(sp.nodes.iter().map(|&n| label("E_n", n as f64))).collect(),
    );
    for level in 0..sp.levels {
        t.push(std::iter::once(Some(level as f64)).chain(confined.iter().map(|c| c.get(level).copied())).collect());
    }
    out.push(sink.table(&format!("{stem}_confined"), &t)?);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationJson {
    pub n_cal: usize,
    pub tolerance: f64,
    pub origin_error: f64,
    pub errors: Vec<(String, f64)>,
    pub matched: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FockJson {
    pub n_max: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<Vec<[f64; 2]>>,
    pub trace: f64,
    pub trace_imag: f64,
    pub min_eigenvalue: f64,
    pub calibration: Option<CalibrationJson>,
}

/// `𝔔₀` in the number basis with the closed-form calibration report.
/// Tail below which the thermal series counts as converged.
pub const FOCK_TAIL: f64 = 1e-10;

/// Truncation and quadrature size. An isotropic window (`γ = 0`,
/// `σℓ/ℓ = σp ℓ/ħ`) is thermal, and the truncation is raised to the point
/// where its tail drops below [`FOCK_TAIL`]; the node count then grows as
/// `4 n_max + 32` to resolve the Laguerre oscillations.
pub fn fock_size(cfg: &RunConfig) -> Result<(usize, usize)> {
    let f = &cfg.fock;
    let Some(g) = cfg.window_kind()?.as_gaussian() else {
        return Ok((f.n_max, f.nodes));
    };
    let (sq, sp) = (g.sigma_l() / cfg.window.ell, g.sigma_p() * cfg.window.ell / g.hbar());
    if !f.auto_cutoff || g.gamma() != 0.0 || (sq - sp).abs() > 1e-12 * sq {
        return Ok((f.n_max, f.nodes));
    }
    let n = f.n_max.max(thermal_cutoff(sq, FOCK_TAIL));
    Ok((n, f.nodes.max(4 * n + 32)))
}

pub fn cmd_fock(cfg: &RunConfig, sink: &Sink, stem: &str) -> Result<Vec<PathBuf>> {
    let w = cfg.window_kind()?;
    let f = &cfg.fock;
    let (n_max, nodes) = fock_size(cfg)?;
    let quad = FockQuadrature { ell: cfg.window.ell, nodes, widths: f.widths };
    let q = fock_q0_numeric(&w, n_max, quad)?;
    let n = q.n_max();
    let calibration = match w.as_gaussian() {
        Some(g) => {
            let r = calibrate(&g, f.n_cal, quad, CALIBRATION_TOL)?;
            Some(CalibrationJson {
                n_cal: r.n_max,
                tolerance: r.tolerance,
                origin_error: r.origin_error,
                errors: r.errors.iter().map(|(c, e)| (c.label().to_string(), *e)).collect(),
                matched: r.matched.map(|c| c.label().to_string()),
            })
        }
        None => None,
    };
    let json = FockJson {
        n_max: n,
        entries: (0..n).map(|i| (0..n).map(|j| [q.get(i, j).re, q.get(i, j).im]).collect()).collect(),
        trace: q.trace().re,
        trace_imag: q.trace().im,
        min_eigenvalue: q.min_eigenvalue(),
        calibration,
    };
    let mut out = vec![sink.json(stem, &json)?];
    if sink.format == Format::Csv {
        let mut t = Table::new(["m", "n", "re", "im"].iter().map(|s| s.to_string()).collect());
        for i in 0..n {
            for j in 0..n {
                t.push(vec![Some(i as f64), Some(j as f64), Some(q.get(i, j).re), Some(q.get(i, j).im)]);
            }
        }
        out.push(sink.table(&format!("{stem}_entries"), &t)?);
    }
    if f.require_calibration {
        if let Some(c) = &json.calibration {
            if c.matched.is_none() {
                return Err(CliError::Numeric(phasequant::Error::Calibration(format!(
                    "no resolution of N reproduces the quadrature (report in {})",
                    out[0].display()
                ))));
            }
        }
    }
    Ok(out)
}
