//! `reproduce-all`: the eight figure families with their published
//! parameter sets, followed by shape checks run on the emitted data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::commands::{cmd_chi, cmd_mass, cmd_phase, cmd_qqdot, cmd_traj, cmd_veff};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{label, Format, Sink};

/// Coupling of the non-separable figures. Larger values violate
/// `|γ| < 2/(σℓσp)` at `σℓ = σp = 4`.
pub const FIGURE_GAMMA: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct FigureOutput {
    pub figure: u32,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub figures: Vec<FigureOutput>,
    pub checks: Vec<ShapeCheck>,
    pub seconds: f64,
}

impl Manifest {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn preset(base: &RunConfig, f: impl FnOnce(&mut RunConfig)) -> RunConfig {
    let mut c = base.clone();
    c.model = Default::default();
    c.window = Default::default();
    c.sweep = Default::default();
    f(&mut c);
    c
}

type Job = (u32, RunConfig, fn(&RunConfig, &Sink, &str) -> Result<Vec<PathBuf>>, &'static str);

fn jobs(base: &RunConfig) -> Vec<Job> {
    let iso = |s: &[f64], q0: &[f64], e: &[f64]| {
        let (s, q0, e) = (s.to_vec(), q0.to_vec(), e.to_vec());
        move |c: &mut RunConfig| {
            c.sweep.sigma = s;
            c.sweep.q0 = q0;
            c.sweep.energies = e;
        }
    };
    let reference = [0.5, 2.0, 3.5];
    let q0s = [3.0, 3.5, 5.0];
    vec![
        (1, preset(base, |_| {}), cmd_chi as _, "fig1_chi"),
        (2, preset(base, |_| {}), cmd_mass as _, "fig2"),
        (3, preset(base, |c| {
            c.model.v0 = 0.0;
            iso(&[2.0, 4.0, 6.0], &[3.0], &[0.25])(c)
        }), cmd_veff as _, "fig3a_veff"),
        (3, preset(base, |c| {
            c.model.v0 = 0.0;
            iso(&[2.0, 4.0, 6.0], &[3.0], &[0.25])(c)
        }), cmd_phase as _, "fig3b_phase"),
        (4, preset(base, iso(&[4.0], &q0s, &reference)), cmd_veff as _, "fig4a_veff"),
        (4, preset(base, iso(&[10.0], &q0s, &reference)), cmd_veff as _, "fig4b_veff"),
        (5, preset(base, iso(&[4.0], &q0s, &reference)), cmd_phase as _, "fig5_phase"),
        (6, preset(base, iso(&[4.0], &q0s, &reference)), cmd_qqdot as _, "fig6_qqdot"),
        (7, preset(base, |c| {
            c.window.gamma = FIGURE_GAMMA;
            iso(&[4.0], &q0s, &reference)(c)
        }), cmd_phase as _, "fig7_phase"),
        (8, preset(base, |c| {
            c.window.gamma = FIGURE_GAMMA;
            iso(&[4.0], &[3.0], &reference)(c)
        }), cmd_qqdot as _, "fig8a_qqdot"),
        (8, preset(base, |c| {
            c.window.gamma = FIGURE_GAMMA;
            // A on the closed E = 2 curve, B above the threshold
            c.traj.q = vec![3.0, 3.0];
            c.traj.energy = vec![2.0, 3.5];
            c.traj.p = vec![];
        }), cmd_traj as _, "fig8_traj"),
    ]
}

/// Runs every figure command into `out` and checks the shapes. Only the
/// grid and integrator settings of `base` are used.
pub fn reproduce_all(base: &RunConfig, out: &Path, format: Format) -> Result<Manifest> {
    let start = Instant::now();
    let sink = Sink::new(out, format)?;
    // shape checks read CSV
    let check_sink = if format == Format::Csv { None } else { Some(Sink::new(out.join("csv"), Format::Csv)?) };
    let mut figures: BTreeMap<u32, Vec<PathBuf>> = BTreeMap::new();
    for (fig, cfg, run, stem) in jobs(base) {
        cfg.validate()?;
        figures.entry(fig).or_default().extend(run(&cfg, &sink, stem)?);
        if let Some(cs) = &check_sink {
            if matches!(stem, "fig1_chi" | "fig3a_veff" | "fig4a_veff" | "fig5_phase" | "fig7_phase") {
                run(&cfg, cs, stem)?;
            }
        }
    }
    let dir = if format == Format::Csv { out.to_path_buf() } else { out.join("csv") };
    let checks = shape_checks(&dir)?;
    let manifest = Manifest {
        figures: figures.into_iter().map(|(figure, files)| FigureOutput { figure, files }).collect(),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    };
    sink.json("manifest", &manifest)?;
    Ok(manifest)
}

/// Columns of one of our CSV files; empty cells become `None`.
pub fn read_columns(path: &Path) -> Result<BTreeMap<String, Vec<Option<f64>>>> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        k => CliError::Config(format!("{}: {k:?}", path.display())),
    };
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let names: Vec<String> = r.headers().map_err(io)?.iter().map(str::to_string).collect();
    let mut cols: BTreeMap<String, Vec<Option<f64>>> = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        for (n, cell) in names.iter().zip(rec.iter()) {
            let v = if cell.is_empty() {
                None
            } else {
                Some(cell.parse::<f64>().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)
            };
            cols.get_mut(n).expect("header").push(v);
        }
    }
    Ok(cols)
}

fn dense(c: &[Option<f64>]) -> Vec<f64> {
    c.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
}

fn column(cols: &BTreeMap<String, Vec<Option<f64>>>, name: &str) -> Result<Vec<f64>> {
    cols.get(name).map(|c| dense(c)).ok_or_else(|| CliError::Config(format!("missing column {name}")))
}

fn check(name: &str, pass: bool, detail: String) -> ShapeCheck {
    ShapeCheck { name: name.into(), pass, detail }
}

const WALLS: (f64, f64) = (1.0, 5.0);

/// `χ̌` sharpens with `σp`: inside the walls larger `σp` gives larger
/// values, outside smaller ones.
fn chi_ordering(dir: &Path) -> Result<ShapeCheck> {
    let cols = read_columns(&dir.join("fig1_chi.csv"))?;
    let q = column(&cols, "q")?;
    let c: Vec<Vec<f64>> =
        [3.0, 5.0, 10.0].iter().map(|&s| column(&cols, &label("sigma_p", s))).collect::<Result<_>>()?;
    let (a, b) = WALLS;
    let mid = 0.5 * (a + b);
    let mut bad = 0;
    let mut n = 0;
    for i in 0..q.len() {
        let d = (q[i] - a).min(b - q[i]);
        if d.abs() < 0.05 || q[i] == mid {
            continue;
        }
        n += 1;
        let inside = d > 0.0;
        let ordered = if inside {
            c[0][i] <= c[1][i] + 1e-12 && c[1][i] <= c[2][i] + 1e-12
        } else {
            c[0][i] + 1e-12 >= c[1][i] && c[1][i] + 1e-12 >= c[2][i]
        };
        if !ordered {
            bad += 1;
        }
    }
    Ok(check("fig1 chi ordered in sigma_p", bad == 0 && n > 0, format!("{bad} of {n} nodes out of order")))
}

/// Largest `|V(q) - V(a+b-q)|` relative to `max |V|` over nodes paired by
/// the reflection.
fn asymmetry(q: &[f64], v: &[f64]) -> f64 {
    let (a, b) = WALLS;
    let scale = v.iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let dx = q[1] - q[0];
    let mut worst = 0.0f64;
    for (i, &x) in q.iter().enumerate() {
        let j = ((a + b - x - q[0]) / dx).round();
        if j < 0.0 || j as usize >= q.len() || (q[j as usize] - (a + b - x)).abs() > 1e-9 * dx.max(1.0) {
            continue;
        }
        let (u, w) = (v[i], v[j as usize]);
        if u.is_finite() && w.is_finite() {
            worst = worst.max((u - w).abs() / scale);
        }
    }
    worst
}

fn symmetric_profiles(dir: &Path) -> Result<ShapeCheck> {
    let cols = read_columns(&dir.join("fig3a_veff.csv"))?;
    let q = column(&cols, "q")?;
    let worst = [2.0, 4.0, 6.0]
        .iter()
        .map(|&s| Ok(asymmetry(&q, &column(&cols, &format!("{}_{}", label("sigma", s), label("q0", 3.0)))?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(check("fig3a V_eff symmetric about the midpoint", worst < 1e-9, format!("relative asymmetry {worst:.3e}")))
}

/// Two barriers near the walls, a well between them, decay outside.
fn double_wall(dir: &Path) -> Result<ShapeCheck> {
    let cols = read_columns(&dir.join("fig4a_veff.csv"))?;
    let q = column(&cols, "q")?;
    let v = column(&cols, &format!("{}_{}", label("sigma", 4.0), label("q0", 3.0)))?;
    let (a, b) = WALLS;
    let mid = 0.5 * (a + b);
    let argmax = |lo: f64, hi: f64| {
        (0..q.len()).filter(|&i| q[i] >= lo && q[i] <= hi && v[i].is_finite()).max_by(|&i, &j| v[i].total_cmp(&v[j]))
    };
    let (Some(l), Some(r)) = (argmax(q[0], mid), argmax(mid, q[q.len() - 1])) else {
        return Ok(check("fig4a double wall", false, "no finite samples".into()));
    };
    let centre = (0..q.len()).min_by(|&i, &j| (q[i] - mid).abs().total_cmp(&(q[j] - mid).abs())).unwrap();
    let edges: Vec<f64> = [0, q.len() - 1].iter().map(|&i| v[i]).filter(|x| x.is_finite()).collect();
    let sym = asymmetry(&q, &v);
    let near = (q[l] - a).abs() < 0.5 && (q[r] - b).abs() < 0.5;
    let well = v[centre] < 0.5 * v[l].min(v[r]);
    let outside = edges.iter().all(|&e| e < 0.1 * v[l].min(v[r]));
    Ok(check(
        "fig4a V_eff symmetric double wall at q0=3",
        near && well && outside && sym < 1e-9,
        format!(
            "barriers at q={:.3} ({:.3}) and q={:.3} ({:.3}), centre {:.3}, asymmetry {sym:.2e}",
            q[l], v[l], q[r], v[r], v[centre]
        ),
    ))
}

/// Which `(q0, E)` pairs carry a closed level curve.
fn closed_table(dir: &Path, stem: &str) -> Result<BTreeMap<(String, String), bool>> {
    let cols = read_columns(&dir.join(format!("{stem}_closed.csv")))?;
    let (q0, e, closed) = (column(&cols, "q0")?, column(&cols, "E")?, column(&cols, "closed")?);
    let mut out = BTreeMap::new();
    for i in 0..q0.len() {
        *out.entry((q0[i].to_string(), e[i].to_string())).or_insert(false) |= closed[i] == 1.0;
    }
    Ok(out)
}

/// Closed contours at `(q0, E) = (3, 0.5), (3, 2)`, none at `(3.5, 2)` and
/// none at all for `q0 = 5`.
fn contour_existence(dir: &Path, stem: &str, fig: u32) -> Result<ShapeCheck> {
    let t = closed_table(dir, stem)?;
    let expect = [(3.0, 0.5, true), (3.0, 2.0, true), (3.5, 2.0, false), (5.0, 0.5, false), (5.0, 2.0, false), (5.0, 3.5, false)];
    let mut wrong = Vec::new();
    for (q0, e, want) in expect {
        match t.get(&(q0.to_string(), e.to_string())) {
            Some(&got) if got == want => {}
            got => wrong.push(format!("(q0={q0}, E={e}): expected {want}, got {got:?}")),
        }
    }
    Ok(check(
        &format!("fig{fig} closed-contour table"),
        wrong.is_empty(),
        if wrong.is_empty() { format!("{} cases as expected", expect.len()) } else { wrong.join("; ") },
    ))
}

pub fn shape_checks(dir: &Path) -> Result<Vec<ShapeCheck>> {
    Ok(vec![
        chi_ordering(dir)?,
        symmetric_profiles(dir)?,
        double_wall(dir)?,
        contour_existence(dir, "fig5_phase", 5)?,
        contour_existence(dir, "fig7_phase", 7)?,
    ])
}
