//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use phasequant::dynamics::{closed_contours, closure, hamilton_rhs, integrate, level_set, PhasePoint, TrajectoryStatus};
use phasequant::math::fourier::{convolve2, sympl_ft, sympl_ft_reflected};
use phasequant::math::grid::{Grid1D, PhaseField, PhaseGrid};
use phasequant::portrait::{
    chi_check, h_check, m_check, m_check_jet, portrait_numeric, portrait_p2h, v_eff_check, Interval, Jet,
    PdmOscillator, PortraitContext,
};
use phasequant::quantum::{
    build_hamiltonian, calibrate, fock_q0_numeric, thermal_diagonal, FockQuadrature, CALIBRATION_TOL, DEFAULT_N_MAX,
};
use phasequant::window::{GaussianWindow, WindowKind};
use phasequant_cli::{figures, Format, RunConfig};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ctx(v0: f64, q0: f64, sigma: f64, gamma: f64) -> PortraitContext {
    let model = PdmOscillator::new(1.0, 1.0, v0, q0, Interval::new(1.0, 5.0).unwrap()).unwrap();
    PortraitContext::new(model, GaussianWindow::new(sigma, sigma, gamma, 1.0).unwrap())
}

fn max_diff(a: &PhaseField, b: &PhaseField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn blobs(g: PhaseGrid, seed: u64) -> PhaseField {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let b: Vec<(f64, f64, f64, C64)> = (0..4)
        .map(|_| {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.8..1.5), c)
        })
        .collect();
    PhaseField::from_fn(g, move |q, p| {
        b.iter().map(|&(q0, p0, w, c)| c * (-((q - q0).powi(2) + (p - p0).powi(2)) / (2.0 * w * w)).exp()).sum()
    })
}

fn criterion_1() -> Outcome {
    let g = PhaseGrid::self_dual(128, 1.0, 1.0).unwrap();
    let (f, h) = (blobs(g, 1), blobs(g, 2));
    let ft = |x: &PhaseField| sympl_ft(x).unwrap().field;
    let involution = max_diff(&ft(&ft(&f)), &f);
    let rhs = ft(&f).zip_map(&ft(&h), |a, b| a * b * 2.0 * PI).unwrap();
    let convolution = max_diff(&ft(&convolve2(&f, &h).unwrap().field), &rhs);
    let parity = max_diff(&sympl_ft_reflected(&f).unwrap().field, &ft(&f).parity());
    let (sl, sp) = (1.7, 1.1);
    let g2 = PhaseGrid::self_dual(128, 1.0, 1.5).unwrap();
    let pi = PhaseField::from_real_fn(g2, |q, p| (-q * q / (2.0 * sl * sl) - p * p / (2.0 * sp * sp)).exp());
    let exact = PhaseField::from_real_fn(g2, |q, p| sl * sp * (-(sl * p).powi(2) / 2.0 - (sp * q).powi(2) / 2.0).exp());
    let gaussian = max_diff(&ft(&pi), &exact);
    let worst = involution.max(convolution).max(parity).max(gaussian);
    ensure(
        worst < 1e-8,
        format!("involution {involution:.1e}, convolution {convolution:.1e}, parity {parity:.1e}, gaussian {gaussian:.1e} (tol 1e-8)"),
    )
}

fn criterion_2() -> Outcome {
    let g = PhaseGrid::new(Grid1D::centered(256, 0.05).unwrap(), Grid1D::centered(256, 0.05).unwrap(), 1.0).unwrap();
    let w = GaussianWindow::new(4.0, 4.0, 0.0, 1.0).unwrap();
    let fq = portrait_numeric(&PhaseField::from_real_fn(g, |q, _| q), &w).unwrap().field;
    let fp = portrait_numeric(&PhaseField::from_real_fn(g, |_, p| p), &w).unwrap().field;
    let mut worst = 0.0f64;
    for i in 64..192 {
        for j in 64..192 {
            worst = worst.max((fq.get(i, j).re - g.q().x(i)).abs()).max((fp.get(i, j).re - g.p().x(j)).abs());
        }
    }
    ensure(worst < 1e-6, format!("max deviation {worst:.2e} over the central half-grid (tol 1e-6)"))
}

/// q spacing 1/80 puts both walls on nodes.
fn oracle_grid() -> PhaseGrid {
    PhaseGrid::new(Grid1D::centered(1024, 0.0125).unwrap(), Grid1D::centered(128, 0.05).unwrap(), 1.0).unwrap()
}

fn interior(g: &PhaseGrid) -> Vec<usize> {
    (0..g.q().len()).filter(|&i| (1.2..=4.8).contains(&g.q().x(i))).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b.abs().max(1e-300)).abs()
}

fn criterion_3() -> Outcome {
    let c = ctx(3.0, 3.0, 4.0, 0.0);
    let g = oracle_grid();
    let jp = g.p().center_index();
    let m = c.model;
    let run = |f: &dyn Fn(f64, f64) -> f64| portrait_numeric(&PhaseField::from_real_fn(g, f), &c.window).unwrap().field;
    let chi = run(&|q, _| m.interval().indicator(q));
    let mass = run(&|q, _| m.inverse_mass_truncated(q));
    let ham = run(&|q, p| m.hamiltonian_truncated(q, p));
    let idx = interior(&g);
    let worst = |field: &PhaseField, oracle: &dyn Fn(f64) -> f64| {
        idx.iter().map(|&i| rel(field.get(i, jp).re, oracle(g.q().x(i)))).fold(0.0, f64::max)
    };
    let e_chi = worst(&chi, &|q| chi_check(&c, q));
    let e_m = worst(&mass, &|q| m_check(&c, q));
    let e_v = worst(&ham, &|q| v_eff_check(&c, q).unwrap());
    ensure(
        e_chi.max(e_m).max(e_v) < 1e-3,
        format!("relative errors chi {e_chi:.1e}, mass {e_m:.1e}, v_eff {e_v:.1e} on [1.2, 4.8] (tol 1e-3)"),
    )
}

fn criterion_4() -> Outcome {
    let g = oracle_grid();
    let idx = interior(&g);
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for gamma in [0.0, 0.05, 0.1] {
        let c = ctx(3.0, 3.0, 4.0, gamma);
        let m = c.model;
        let f = PhaseField::from_real_fn(g, |q, p| p * p * m.inverse_mass_truncated(q) / 2.0);
        let num = portrait_numeric(&f, &c.window).unwrap().field;
        for _ in 0..50 {
            let iq = idx[rng.gen_range(0..idx.len())];
            let ip = rng.gen_range(44..84);
            let j = m_check_jet(&c, g.q().x(iq));
            let half = Jet { value: j.value / 2.0, d1: j.d1 / 2.0, d2: j.d2 / 2.0, d3: j.d3 / 2.0 };
            let closed = portrait_p2h(&half, gamma, 4.0, 1.0, g.p().x(ip), 0.0).unwrap();
            worst = worst.max(rel(num.get(iq, ip).re, closed));
        }
    }
    ensure(worst < 1e-3, format!("worst relative error {worst:.1e} at 150 points, gamma 0/0.05/0.1 (tol 1e-3)"))
}

fn criterion_5() -> Outcome {
    let c = ctx(3.0, 3.0, 4.0, 0.0);
    let g = Grid1D::new(3.0, 1.0, 2).unwrap();
    let p0 = level_set(&c, 0.5, &g).p_plus[0].ok_or("E = 0.5 not reached at q = 3")?;
    let traj = integrate(&c, PhasePoint::new(3.0, p0), 1e-4, 100_000).map_err(|e| e.to_string())?;
    let drift = traj.relative_energy_drift();
    let cl = closure(&traj).ok_or("orbit has fewer than three turning points")?;
    let bound = traj.status == TrajectoryStatus::Completed && cl.distance < 1e-3 && drift < 1e-6;

    let far = ctx(3.0, 5.0, 4.0, 0.0);
    let grid = Grid1D::spanning(0.0, 6.0, 601).unwrap();
    let (mut starts, mut escaped, mut contours) = (0, 0, 0);
    for e in [0.5, 2.0, 3.5] {
        contours += closed_contours(&far, e, 4000).map_err(|e| e.to_string())?.len();
        let ls = level_set(&far, e, &grid);
        for (i, q) in ls.q.iter().enumerate().step_by(30) {
            let (Some(pp), Some(pm)) = (ls.p_plus[i], ls.p_minus[i]) else { continue };
            for p in [pp, pm] {
                starts += 1;
                if integrate(&far, PhasePoint::new(*q, p), 1e-3, 200_000).map_err(|e| e.to_string())?.escaped() {
                    escaped += 1;
                }
            }
        }
    }
    ensure(
        bound && contours == 0 && starts > 0 && escaped == starts,
        format!(
            "q0=3 E=0.5: closure {:.1e} (tol 1e-3), drift {drift:.1e} (tol 1e-6); q0=5: {contours} closed contours, {escaped}/{starts} trajectories escape",
            cl.distance
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for gamma in [0.0, 0.1] {
        let c = ctx(3.0, 3.0, 4.0, gamma);
        for _ in 0..50 {
            let (q, p) = (rng.gen_range(0.0..6.0), rng.gen_range(-3.0..3.0));
            let f = hamilton_rhs(&c, PhasePoint::new(q, p)).map_err(|e| e.to_string())?;
            let hc = |q, p| h_check(&c, q, p).unwrap();
            let dhdp = (hc(q, p + h) - hc(q, p - h)) / (2.0 * h);
            let dhdq = (hc(q + h, p) - hc(q - h, p)) / (2.0 * h);
            worst = worst
                .max((f.qdot - dhdp).abs() / (1.0 + dhdp.abs()))
                .max((f.pdot + dhdq).abs() / (1.0 + dhdq.abs()));
        }
    }
    ensure(worst < 1e-6, format!("worst relative mismatch {worst:.1e} at 100 points, gamma 0/0.1 (tol 1e-6)"))
}

fn criterion_7() -> Outcome {
    let quad = FockQuadrature::default();
    let coherent = WindowKind::SeparableGaussian(GaussianWindow::coherent(1.0, 1.0).unwrap());
    let thermal = WindowKind::SeparableGaussian(GaussianWindow::separable(1.0, 1.0, 1.0).unwrap());
    let qc = fock_q0_numeric(&coherent, 16, quad).map_err(|e| e.to_string())?;
    let qt = fock_q0_numeric(&thermal, DEFAULT_N_MAX, quad).map_err(|e| e.to_string())?;
    let mut vac = 0.0f64;
    for m in 0..16 {
        for n in 0..16 {
            let want = if m + n == 0 { 1.0 } else { 0.0 };
            vac = vac.max((qc.get(m, n) - want).norm());
        }
    }
    let law = thermal_diagonal(1.0, DEFAULT_N_MAX);
    let mut th = 0.0f64;
    for m in 0..DEFAULT_N_MAX {
        for n in 0..DEFAULT_N_MAX {
            th = th.max((qt.get(m, n) - if m == n { law[n] } else { 0.0 }).norm());
        }
    }
    let trace = (qc.trace().re - 1.0).abs().max((qt.trace().re - 1.0).abs());
    let min_eig = qc.min_eigenvalue().min(qt.min_eigenvalue());
    let w = GaussianWindow::new(1.0, 1.2, 0.3, 1.0).unwrap();
    let report = calibrate(&w, 8, quad, CALIBRATION_TOL).map_err(|e| e.to_string())?;
    let candidates: Vec<String> = report.errors.iter().map(|(c, e)| format!("{} {e:.1e}", c.label())).collect();
    let verdict = match report.matched {
        Some(c) => format!("matched {}", c.label()),
        None => "no resolution matches (documented failure)".into(),
    };
    ensure(
        trace < 1e-6 && vac < 1e-6 && th < 1e-8 && min_eig >= -1e-8 && report.errors.len() == 3,
        format!(
            "trace {trace:.1e} (tol 1e-6), vacuum {vac:.1e} (tol 1e-6), thermal law {th:.1e} (tol 1e-8), min eigenvalue {min_eig:.1e} (>= -1e-8); closed form: vacuum entry {:.1e}, {}; {verdict}",
            report.origin_error,
            candidates.join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let well = Interval::new(1.0, 5.0).unwrap();
    let mut shrink = f64::INFINITY;
    let mut hermitian = true;
    for gamma in [0.0, 0.015] {
        let c = ctx(100.0, 3.0, 10.0, gamma);
        let mut levels = Vec::new();
        for n in [256, 512, 1024] {
            let h = build_hamiltonian(&c, &Grid1D::spanning(-0.4, 6.4, n).unwrap()).map_err(|e| e.to_string())?;
            hermitian &= if gamma == 0.0 { h.hermiticity_residual() == 0.0 } else { h.hermiticity_residual() <= 1e-12 * h.norm_inf() };
            let s = h.eigen();
            let k = s.confined(&well, 0.99);
            if k.len() < 5 {
                return Err(format!("only {} confined states at n = {n}", k.len()));
            }
            levels.push(k[..5].iter().map(|&i| s.values[i]).collect::<Vec<_>>());
        }
        for k in 0..5 {
            let d1 = (levels[1][k] - levels[0][k]).abs();
            let d2 = (levels[2][k] - levels[1][k]).abs();
            shrink = shrink.min(d1 / d2);
        }
    }
    let c = ctx(100.0, 3.0, 10.0, 0.0);
    let s_width = c.hbar() / c.window.sigma_p();
    let s = build_hamiltonian(&c, &Grid1D::spanning(-0.4, 6.4, 512).unwrap()).unwrap().eigen();
    let k = s.confined(&well, 0.99)[0];
    let peak = s.vectors[k].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tails = s
        .tail_envelope(k, &well, 0.5 * s_width)
        .into_iter()
        .all(|(d, m)| m / peak <= (-d * d / (2.0 * s_width * s_width)).exp().max(1e-11));
    ensure(
        hermitian && shrink >= 3.0 && tails,
        format!(
            "hermitian {hermitian}; confined levels 1-5, n 256/512/1024, gamma 0/0.015: smallest shrink ratio {shrink:.2} (>= 3); ground-state tail under exp(-d^2/2s^2): {tails}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let m = figures::reproduce_all(&RunConfig::default(), dir.path(), Format::Csv).map_err(|e| e.to_string())?;
    let figs: Vec<u32> = m.figures.iter().filter(|f| !f.files.is_empty()).map(|f| f.figure).collect();
    let failed: Vec<String> = m.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    ensure(
        figs == (1..=8).collect::<Vec<_>>() && failed.is_empty() && m.seconds < 600.0,
        format!(
            "figures {figs:?}, {} of {} shape checks pass{}, {:.1} s (< 600 s)",
            m.checks.len() - failed.len(),
            m.checks.len(),
            if failed.is_empty() { String::new() } else { format!(" [{}]", failed.join("; ")) },
            m.seconds
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(fn() -> Outcome, Option<Duration>); 9] = [
        (criterion_1, Some(Duration::from_secs(5))),
        (criterion_2, None),
        (criterion_3, Some(Duration::from_secs(30))),
        (criterion_4, None),
        (criterion_5, None),
        (criterion_6, None),
        (criterion_7, None),
        (criterion_8, None),
        (criterion_9, Some(Duration::from_secs(600))),
    ];
    let mut failed = Vec::new();
    for (i, (run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        let slow = limit.is_some_and(|l| t > l);
        let budget = limit.map(|l| format!(", budget {} s", l.as_secs())).unwrap_or_default();
        let (pass, detail) = match outcome {
            Ok(d) => (!slow, d),
            Err(d) => (false, d),
        };
        println!("{} criterion {}: {detail} [{:.2} s{budget}]", if pass { "PASS" } else { "FAIL" }, i + 1, t.as_secs_f64());
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
