//! The window operator `𝔔₀ = ∫ U(q,p) Π(q,p) dq dp/(2πħ)` in the number
//! basis of an oscillator of length `ℓ`, where `U(q,p) = D(α)` with
//! `α = (q/ℓ + i p ℓ/ħ)/√2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::fourier::sympl_ft_reflected;
use crate::math::grid::PhaseField;
use crate::math::quadrature::gauss_legendre;
use crate::math::special::{gauss_2f1, pochhammer};
use crate::window::{pi_eval, GaussianWindow, WindowKind};

/// Truncated Hermitian matrix in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    entries: DMatrix<C64>,
}

impl FockMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Domain(format!("{}x{} is not a square Fock matrix", entries.nrows(), entries.ncols())));
        }
        Ok(Self { entries })
    }

    pub fn n_max(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// `⟨m|A|n⟩`.
    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.entries[(m, n)]
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest `|⟨m|A|n⟩|` with `m - n` odd.
    pub fn odd_parity_max(&self) -> f64 {
        let n = self.n_max();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| (i + j) % 2 == 1)
            .map(|(i, j)| self.entries[(i, j)].norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise distance to another matrix of the same size.
    pub fn max_diff(&self, other: &FockMatrix) -> f64 {
        (&self.entries - &other.entries).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Leading `k x k` block.
    pub fn truncate(&self, k: usize) -> FockMatrix {
        let k = k.min(self.n_max()).max(1);
        Self { entries: self.entries.view((0, 0), (k, k)).into_owned() }
    }
}

/// Number basis and quadrature used for `𝔔₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockQuadrature {
    /// Oscillator length `ℓ` of the number basis.
    pub ell: f64,
    /// Gauss-Legendre nodes per axis.
    pub nodes: usize,
    /// Half-width of the domain in marginal standard deviations of `Π`.
    pub widths: f64,
}

impl Default for FockQuadrature {
    fn default() -> Self {
        Self { ell: 1.0, nodes: 200, widths: 8.0 }
    }
}

pub const DEFAULT_N_MAX: usize = 64;
pub const TRACE_TOL: f64 = 1e-4;

/// `⟨m|D(α)|n⟩` for `m, n < dim`, column-major into `out`.
///
/// For `m = n + k` the entry is `e^{ikθ} f_n^{(k)}` with
/// `f_n^{(k)} = √(n!/(n+k)!) |α|^k e^{-|α|²/2} L_n^{(k)}(|α|²)`, run upward in
/// `n` with the Laguerre recurrence rescaled to stay in range; the upper
/// triangle follows from `⟨n|D(α)|m⟩ = ⟨m|D(-α)|n⟩*`.
fn displacement(alpha: C64, dim: usize, out: &mut [C64]) {
    let x = alpha.norm_sqr();
    let theta = alpha.arg();
    for k in 0..dim {
        let kf = k as f64;
        let mut prev = if x == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (0.5 * kf * x.ln() - 0.5 * x - 0.5 * ln_factorial(k)).exp()
        };
        let lower = C64::from_polar(1.0, kf * theta);
        let upper = C64::from_polar(if k % 2 == 0 { 1.0 } else { -1.0 }, -kf * theta);
        let mut cur = 0.0;
        for n in 0..dim - k {
            let f = if n == 0 {
                prev
            } else if n == 1 {
                cur = prev * (kf + 1.0 - x) / (kf + 1.0).sqrt();
                cur
            } else {
                let m = (n - 1) as f64;
                let next = ((2.0 * m + kf + 1.0 - x) * cur * ((m + 1.0) / (m + kf + 1.0)).sqrt()
                    - (m + kf) * prev * ((m + 1.0) * m / ((m + kf + 1.0) * (m + kf))).sqrt())
                    / (m + 1.0);
                prev = cur;
                cur = next;
                next
            };
            out[n * dim + n + k] = lower * f;
            out[(n + k) * dim + n] = upper * f;
        }
    }
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Radius in `|α|` beyond which `⟨m|D(α)|n⟩`, `m, n < dim`, is negligible.
fn fock_radius(dim: usize) -> f64 {
    (4.0 * dim as f64 + 2.0).sqrt() + 8.0
}

/// `𝔔₀` by tensor Gauss-Legendre quadrature of `Π(q,p) D(α(q,p))`, checked
/// for unit trace.
pub fn fock_q0_numeric(w: &WindowKind, n_max: usize, quad: FockQuadrature) -> Result<FockMatrix> {
    let q0 = quadrature_matrix(w, n_max, quad)?;
    let tr = q0.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::Quadrature(format!("trace of the window operator is {tr}, not 1")));
    }
    Ok(q0)
}

fn quadrature_matrix(w: &WindowKind, n_max: usize, quad: FockQuadrature) -> Result<FockMatrix> {
    w.validate()?;
    let g = w
        .as_gaussian()
        .ok_or_else(|| Error::InvalidWindow("number-basis quadrature needs a decaying window".into()))?;
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    if !(quad.ell > 0.0) {
        return Err(Error::Domain(format!("oscillator length must be positive, got {}", quad.ell)));
    }
    let hbar = g.hbar();
    let lam = g.lambda2().sqrt();
    let wp = hbar / quad.ell;
    let r = std::f64::consts::SQRT_2 * fock_radius(n_max);
    let hq = (quad.widths * g.sigma_l() / lam).min(r * quad.ell);
    let hp = (quad.widths * g.sigma_p() / lam).min(r * wp);
    let base = gauss_legendre(quad.nodes)?;
    let (rq, rp) = (base.mapped(-hq, hq), base.mapped(-hp, hp));
    let dim = n_max;
    let partial: Vec<Vec<C64>> = rq
        .nodes
        .par_iter()
        .zip(rq.weights.par_iter())
        .map(|(&q, &wq)| -> Result<Vec<C64>> {
            let mut acc = vec![C64::new(0.0, 0.0); dim * dim];
            let mut d = vec![C64::new(0.0, 0.0); dim * dim];
            for (&p, &wpj) in rp.nodes.iter().zip(&rp.weights) {
                let weight = wq * wpj * pi_eval(w, q, p)?;
                let alpha = C64::new(q / quad.ell, p / wp) / std::f64::consts::SQRT_2;
                displacement(alpha, dim, &mut d);
                acc.iter_mut().zip(&d).for_each(|(a, v)| *a += v * weight);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![C64::new(0.0, 0.0); dim * dim];
    for block in &partial {
        total.iter_mut().zip(block).for_each(|(t, v)| *t += v);
    }
    let scale = 1.0 / (2.0 * PI * hbar);
    let m = DMatrix::from_vec(dim, dim, total) * C64::new(scale, 0.0);
    FockMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// Diagonal `(1/Δ²)(1 - 1/Δ²)ⁿ`, `Δ² = ½ + 1/σ²`, of the isotropic separable
/// window in units `ℓ = ħ = 1`.
pub fn thermal_diagonal(sigma: f64, n_max: usize) -> Vec<f64> {
    let d2 = 0.5 + 1.0 / (sigma * sigma);
    (0..n_max).map(|n| (1.0 - 1.0 / d2).powi(n as i32) / d2).collect()
}

/// Smallest `n` with `|1 - 1/Δ²|ⁿ < tail` for the isotropic window of
/// width `sigma` (units `ℓ = ħ = 1`).
pub fn thermal_cutoff(sigma: f64, tail: f64) -> usize {
    let r = (1.0 - 1.0 / (0.5 + 1.0 / (sigma * sigma))).abs();
    if r == 0.0 {
        return 1;
    }
    (tail.ln() / r.ln()).ceil().max(1.0) as usize
}

/// Resolution of the symbol `N` in the closed-form triple sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateN {
    /// `N = n + M`
    NPlusM,
    /// `N = n`
    N,
    /// `N = M`
    M,
}

impl CandidateN {
    pub const ALL: [CandidateN; 3] = [CandidateN::NPlusM, CandidateN::N, CandidateN::M];

    fn value(self, n: usize, m: usize) -> f64 {
        match self {
            CandidateN::NPlusM => (n + m) as f64,
            CandidateN::N => n as f64,
            CandidateN::M => m as f64,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CandidateN::NPlusM => "N=n+M",
            CandidateN::N => "N=n",
            CandidateN::M => "N=M",
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Dimensionless `(σℓ/ℓ, σp ℓ/ħ, γħ)`.
fn reduced(w: &GaussianWindow, ell: f64) -> (f64, f64, f64) {
    (w.sigma_l() / ell, w.sigma_p() * ell / w.hbar(), w.gamma() * w.hbar())
}

/// `⟨n+2M|𝔔₀|n⟩` from the closed-form triple sums.
fn closed_entry(sl: f64, sp: f64, gamma: f64, n: usize, m: usize, cand: CandidateN) -> Result<C64> {
    let dl2 = 0.5 + 1.0 / (sl * sl);
    let dp2 = 0.5 + 1.0 / (sp * sp);
    let (dl, dp) = (dl2.sqrt(), dp2.sqrt());
    let z = gamma * gamma / (4.0 * dl2 * dp2);
    let big_n = cand.value(n, m);
    let ratio2 = dp2 / dl2;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for k in 0..=m {
        for r in 0..=n {
            for s in 0..=r {
                let sign = if (r + k) % 2 == 0 { 1.0 } else { -1.0 };
                let common = sign * pochhammer(0.5 + big_n - k as f64, (r + s) as u32) * ratio2.powi((k + s) as i32)
                    / dp2.powi(r as i32)
                    / (factorial(s) * factorial(k) * factorial(r - s) * factorial(n - r) * factorial(2 * m + r));
                let f1 = gauss_2f1(0.5 + (s + k) as f64, 0.5 + (m + r) as f64 - (s + k) as f64, 0.5, z)?.value;
                g1 += common * pochhammer(0.5 + k as f64, s as u32) / factorial(m - k) * f1;
                // 1/(M-k-1)! vanishes at k = M
                if k < m {
                    let f2 = gauss_2f1(1.5 + (s + k) as f64, 0.5 + (m + r) as f64 - (s + k) as f64, 1.5, z)?.value;
                    g2 += common * pochhammer(1.5 + k as f64, s as u32) / factorial(m - k - 1) * f2;
                }
            }
        }
    }
    let pre = (factorial(n) * factorial(n + 2 * m)).sqrt() * factorial(2 * m)
        / (4f64.powi(m as i32) * dl * dp * dp.powi(2 * m as i32));
    Ok(C64::new(g1, -2.0 * gamma / dl2 * g2) * pre)
}

/// `𝔔₀` from the closed form with a chosen resolution of `N`; the lower
/// triangle is the conjugate of the upper one and odd offsets vanish.
pub fn closed_form_matrix(w: &GaussianWindow, n_max: usize, ell: f64, cand: CandidateN) -> Result<FockMatrix> {
    let (sl, sp, gamma) = reduced(w, ell);
    let mut e = DMatrix::from_element(n_max, n_max, C64::new(0.0, 0.0));
    for n in 0..n_max {
        for m in 0..=(n_max - 1 - n) / 2 {
            let v = closed_entry(sl, sp, gamma, n, m, cand)?;
            e[(n + 2 * m, n)] = v;
            e[(n, n + 2 * m)] = v.conj();
        }
    }
    FockMatrix::new(e)
}

/// Outcome of testing every resolution of `N` against the quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub n_max: usize,
    pub tolerance: f64,
    /// Largest entry-wise deviation from the quadrature for each candidate.
    pub errors: Vec<(CandidateN, f64)>,
    /// Deviation of the `(0,0)` entry, which does not involve `N`.
    pub origin_error: f64,
    pub matched: Option<CandidateN>,
}

pub const CALIBRATION_TOL: f64 = 1e-6;

/// Compares every resolution of `N` with the quadrature on the leading
/// `n_cal` number states.
pub fn calibrate(w: &GaussianWindow, n_cal: usize, quad: FockQuadrature, tolerance: f64) -> Result<CalibrationReport> {
    let numeric = quadrature_matrix(&WindowKind::NonSeparableGaussian(*w), n_cal, quad)?;
    let (n_max, ell) = (n_cal, quad.ell);
    let mut errors = Vec::with_capacity(3);
    let mut origin_error = f64::NAN;
    for cand in CandidateN::ALL {
        let closed = closed_form_matrix(w, n_max, ell, cand)?;
        origin_error = (closed.get(0, 0) - numeric.get(0, 0)).norm();
        errors.push((cand, closed.max_diff(&numeric)));
    }
    let matched = errors
        .iter()
        .filter(|(_, e)| *e < tolerance)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, _)| *c);
    Ok(CalibrationReport { n_max, tolerance, errors, origin_error, matched })
}

/// Closed-form `𝔔₀` whose `N` passed calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub matrix: FockMatrix,
    pub candidate: CandidateN,
    pub report: CalibrationReport,
}

/// Calibrates on the leading `n_cal` states and, if a candidate matches,
/// evaluates the closed form up to `n_max`.
pub fn fock_q0_closed(w: &GaussianWindow, n_max: usize, n_cal: usize, quad: FockQuadrature) -> Result<ClosedForm> {
    let report = calibrate(w, n_cal, quad, CALIBRATION_TOL)?;
    match report.matched {
        Some(c) => Ok(ClosedForm { matrix: closed_form_matrix(w, n_max, quad.ell, c)?, candidate: c, report }),
        None => Err(Error::Calibration(format!(
            "no resolution of N reproduces the quadrature: {}",
            report.errors.iter().map(|(c, e)| format!("{} -> {e:.3e}", c.label())).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Both sides of `Tr(A_f) = ∫ f dq dp/(2πħ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    /// `Σ_{n<N} ⟨n|A_f|n⟩ = ∫ e^{-|α|²/2} L¹_{N-1}(|α|²) F̄s[f] Π dq dp/(2πħ)`.
    pub lhs: f64,
    pub rhs: f64,
}

/// `e^{-x/2} L^{(1)}_{k}(x)`.
fn scaled_laguerre1(k: usize, x: f64) -> f64 {
    if x > 4.0 * (k + 1) as f64 + 200.0 {
        return 0.0;
    }
    let e = (-x / 2.0).exp();
    let (mut prev, mut cur) = (e, e * (2.0 - x));
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 2.0 - x) * cur - (j + 1.0) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn trace_formula_check(f: &PhaseField, w: &WindowKind, n_states: usize, ell: f64) -> Result<TraceCheck> {
    w.validate()?;
    if n_states == 0 {
        return Err(Error::Domain("need at least one number state".into()));
    }
    let grid = *f.grid();
    let hbar = grid.hbar();
    let fs = sympl_ft_reflected(f)?.field;
    let wp = hbar / ell;
    let measure = grid.measure();
    let mut lhs = 0.0;
    for (iq, q) in grid.q().points().enumerate() {
        for (ip, p) in grid.p().points().enumerate() {
            let x = 0.5 * (q * q / (ell * ell) + p * p / (wp * wp));
            let tr = scaled_laguerre1(n_states - 1, x);
            if tr != 0.0 {
                lhs += tr * (fs.get(iq, ip) * pi_eval(w, q, p)?).re;
            }
        }
    }
    Ok(TraceCheck { lhs: lhs * measure, rhs: f.phase_space_average().re })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = C64::new(0.7, -0.4);
        let dim = 12;
        let mut d = vec![C64::new(0.0, 0.0); dim * dim];
        displacement(alpha, dim, &mut d);
        let e = (-alpha.norm_sqr() / 2.0).exp();
        for n in 0..dim {
            let want = alpha.powu(n as u32) * e / factorial(n).sqrt();
            assert!((d[n] - want).norm() < 1e-14, "n={n}");
            // ⟨0|D(α)|n⟩ = e^{-|α|²/2} (-α*)ⁿ/√n!
            let up = (-alpha.conj()).powu(n as u32) * e / factorial(n).sqrt();
            assert!((d[n * dim] - up).norm() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn displacement_is_unitary_on_low_states() {
        let alpha = C64::new(-1.1, 0.6);
        let dim = 60;
        let mut d = vec![C64::new(0.0, 0.0); dim * dim];
        displacement(alpha, dim, &mut d);
        let m = DMatrix::from_vec(dim, dim, d);
        let u = m.adjoint() * &m;
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_law_sums_to_one() {
        let d = thermal_diagonal(1.0, 60);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(thermal_diagonal(2f64.sqrt(), 3)[1].abs() < 1e-15);
    }

    #[test]
    fn thermal_cutoff_bounds_the_tail() {
        for sigma in [0.7, 1.0, 2.0, 4.0] {
            let n = thermal_cutoff(sigma, 1e-10);
            let r = (1.0 - 1.0 / (0.5 + 1.0 / (sigma * sigma))).abs();
            assert!(r.powi(n as i32) < 1e-10 && r.powi(n as i32 - 1) >= 1e-10);
        }
        assert_eq!(thermal_cutoff(2f64.sqrt(), 1e-10), 1);
        assert_eq!(thermal_cutoff(4.0, 1e-10), 92);
    }

    #[test]
    fn laguerre_trace_kernel() {
        // L₂⁽¹⁾(x) = x²/2 - 3x + 3
        for x in [0.0, 0.5, 2.0, 7.5] {
            let want = (-x / 2.0f64).exp() * (x * x / 2.0 - 3.0 * x + 3.0);
            assert!((scaled_laguerre1(2, x) - want).abs() < 1e-13);
        }
        assert_eq!(scaled_laguerre1(0, 1.0), (-0.5f64).exp());
        assert_eq!(scaled_laguerre1(3, 1e4), 0.0);
    }

    #[test]
    fn closed_form_vacuum_entry() {
        // ⟨0|𝔔₀|0⟩ = 1/(Δℓ Δp) for γ = 0
        let w = GaussianWindow::separable(1.3, 0.9, 1.0).unwrap();
        let m = closed_form_matrix(&w, 3, 1.0, CandidateN::M).unwrap();
        let want = 1.0 / ((0.5 + 1.0 / 1.69) * (0.5 + 1.0 / 0.81f64)).sqrt();
        assert!((m.get(0, 0).re - want).abs() < 1e-14);
        assert_eq!(m.get(1, 0), C64::new(0.0, 0.0));
        assert_eq!(m.hermiticity_residual(), 0.0);
    }

    #[test]
    fn fock_matrix_rejects_rectangles() {
        assert!(FockMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(FockMatrix::new(DMatrix::zeros(0, 0)).is_err());
    }
}
