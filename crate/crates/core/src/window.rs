//! Apodization windows `Π(q,p)` and their closed-form transforms.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::fourier::fourier1;
use crate::math::grid::{Grid1D, PhaseField, PhaseGrid};

/// Non-separable Gaussian window
/// `exp(-q²/2σℓ² - p²/2σp² + γ q p / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWindow {
    sigma_l: f64,
    sigma_p: f64,
    gamma: f64,
    hbar: f64,
}

impl GaussianWindow {
    pub fn new(sigma_l: f64, sigma_p: f64, gamma: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("sigma_l", sigma_l), ("sigma_p", sigma_p), ("hbar", hbar)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidWindow(format!("{name} must be positive, got {v}")));
            }
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidWindow(format!("gamma must be finite, got {gamma}")));
        }
        let w = Self { sigma_l, sigma_p, gamma, hbar };
        if !(w.lambda2() > 0.0) {
            return Err(Error::InvalidWindow(format!(
                "|gamma| = {} violates |gamma| < 2/(sigma_l sigma_p) = {}",
                gamma.abs(),
                2.0 / (sigma_l * sigma_p)
            )));
        }
        Ok(w)
    }

    /// Separable window (`γ = 0`).
    pub fn separable(sigma_l: f64, sigma_p: f64, hbar: f64) -> Result<Self> {
        Self::new(sigma_l, sigma_p, 0.0, hbar)
    }

    /// Coherent-state window `σℓ = √2 ℓ`, `σp = √2 ħ/ℓ`.
    pub fn coherent(ell: f64, hbar: f64) -> Result<Self> {
        Self::separable(std::f64::consts::SQRT_2 * ell, std::f64::consts::SQRT_2 * hbar / ell, hbar)
    }

    pub fn sigma_l(&self) -> f64 {
        self.sigma_l
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.sigma_l, self.sigma_p, gamma, self.hbar)
    }

    /// `Λ² = (4 - σℓ²σp²γ²)/4`.
    pub fn lambda2(&self) -> f64 {
        (4.0 - (self.sigma_l * self.sigma_p * self.gamma).powi(2)) / 4.0
    }

    /// `Λℓ² = σp²/Λ²`.
    pub fn lambda_l2(&self) -> f64 {
        self.sigma_p.powi(2) / self.lambda2()
    }

    /// `Λp² = σℓ²/Λ²`.
    pub fn lambda_p2(&self) -> f64 {
        self.sigma_l.powi(2) / self.lambda2()
    }

    /// `Λ₀ = σℓ²σp²γ/(4Λ²)`.
    pub fn lambda0(&self) -> f64 {
        (self.sigma_l * self.sigma_p).powi(2) * self.gamma / (4.0 * self.lambda2())
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        (-q * q / (2.0 * self.sigma_l.powi(2)) - p * p / (2.0 * self.sigma_p.powi(2))
            + self.gamma * q * p / 2.0)
            .exp()
    }

    /// Closed form of `Fs[Π Π̃](q,p)`, with `Π̃(q,p) = Π(-q,-p)`.
    pub fn fs_autocorr(&self, q: f64, p: f64) -> f64 {
        let h2 = self.hbar * self.hbar;
        let pre = self.sigma_l * self.sigma_p / (2.0 * self.lambda2().sqrt() * self.hbar);
        pre * (-self.lambda_l2() * q * q / (4.0 * h2) - self.lambda_p2() * p * p / (4.0 * h2)
            + self.lambda0() * q * p / h2)
            .exp()
    }

    /// Covariance `(var_q, var_p, cov_qp)` of the probability density
    /// `F̄s[Π Π̃]/(2πħ)` that smooths classical observables into portraits.
    pub fn portrait_covariance(&self) -> (f64, f64, f64) {
        let h2 = self.hbar * self.hbar;
        (2.0 * h2 / self.sigma_p.powi(2), 2.0 * h2 / self.sigma_l.powi(2), h2 * self.gamma)
    }

    /// Position factor `λ(q) = Π(q,0)`.
    pub fn lambda_factor(&self, q: f64) -> f64 {
        (-q * q / (2.0 * self.sigma_l.powi(2))).exp()
    }

    /// Momentum factor `μ(p) = Π(0,p)`.
    pub fn mu_factor(&self, p: f64) -> f64 {
        (-p * p / (2.0 * self.sigma_p.powi(2))).exp()
    }
}

/// Squeezed-vacuum window of length scale `ℓ` and squeezing parameter `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedWindow {
    ell: f64,
    eta: C64,
    hbar: f64,
}

impl SqueezedWindow {
    pub fn new(ell: f64, eta: C64, hbar: f64) -> Result<Self> {
        if !(ell > 0.0) || !(hbar > 0.0) || !ell.is_finite() || !hbar.is_finite() {
            return Err(Error::InvalidWindow(format!("need ell, hbar > 0, got {ell}, {hbar}")));
        }
        if !(eta.norm() < 1.0) {
            return Err(Error::InvalidWindow(format!("|eta| = {} must be < 1", eta.norm())));
        }
        Ok(Self { ell, eta, hbar })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `℘ = ħ/ℓ`.
    pub fn wp(&self) -> f64 {
        self.hbar / self.ell
    }

    /// `κ = (1+η)/(1-η)`.
    pub fn kappa(&self) -> C64 {
        (1.0 + self.eta) / (1.0 - self.eta)
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        let k = self.kappa();
        let (kr, ki) = (k.re, k.im);
        (-q * q / (4.0 * self.ell.powi(2)) * (kr + ki * ki / kr)
            - p * p / (4.0 * self.wp().powi(2) * kr)
            - ki / kr * q * p / (2.0 * self.hbar))
            .exp()
    }

    /// Normalized squeezed vacuum `ψℓ,η(x)`.
    pub fn state(&self, x: f64) -> C64 {
        let eta = self.eta;
        let one = C64::new(1.0, 0.0);
        let norm = ((1.0 - eta.norm_sqr()) / (PI * self.ell.powi(2) * (one - eta).powi(2))).powf(0.25);
        norm * (-x * x / (2.0 * self.ell.powi(2)) * self.kappa()).exp()
    }
}

/// `σℓ² = 2ℓ²κR/|κ|²`, `σp² = 2℘²κR`, `γ = -κI/(κR ħ)`.
pub fn squeezed_to_gaussian(s: &SqueezedWindow) -> Result<GaussianWindow> {
    let k = s.kappa();
    let sl2 = 2.0 * s.ell().powi(2) * k.re / k.norm_sqr();
    let sp2 = 2.0 * s.wp().powi(2) * k.re;
    GaussianWindow::new(sl2.sqrt(), sp2.sqrt(), -k.im / (k.re * s.hbar()), s.hbar())
}

/// The catalogue of windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    Unit,
    BornJordan { hbar: f64 },
    SeparableGaussian(GaussianWindow),
    NonSeparableGaussian(GaussianWindow),
    Squeezed(SqueezedWindow),
}

const BORN_JORDAN_SERIES_CUTOFF: f64 = 1e-4;

impl WindowKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            WindowKind::BornJordan { hbar } if !(*hbar > 0.0) => {
                Err(Error::InvalidWindow(format!("hbar must be positive, got {hbar}")))
            }
            WindowKind::SeparableGaussian(g) if g.gamma() != 0.0 => {
                Err(Error::InvalidWindow(format!("separable window with gamma = {}", g.gamma())))
            }
            _ => Ok(()),
        }
    }

    pub fn hbar(&self) -> Option<f64> {
        match self {
            WindowKind::Unit => None,
            WindowKind::BornJordan { hbar } => Some(*hbar),
            WindowKind::SeparableGaussian(g) | WindowKind::NonSeparableGaussian(g) => Some(g.hbar()),
            WindowKind::Squeezed(s) => Some(s.hbar()),
        }
    }

    /// Equivalent Gaussian window, where one exists.
    pub fn as_gaussian(&self) -> Option<GaussianWindow> {
        match self {
            WindowKind::SeparableGaussian(g) | WindowKind::NonSeparableGaussian(g) => Some(*g),
            WindowKind::Squeezed(s) => squeezed_to_gaussian(s).ok(),
            _ => None,
        }
    }

    pub fn is_separable(&self) -> bool {
        match self {
            WindowKind::Unit | WindowKind::SeparableGaussian(_) => true,
            WindowKind::BornJordan { .. } => false,
            WindowKind::NonSeparableGaussian(g) => g.gamma() == 0.0,
            WindowKind::Squeezed(s) => s.kappa().im == 0.0,
        }
    }
}

/// `Π(q,p)` for any catalogued window.
pub fn pi_eval(w: &WindowKind, q: f64, p: f64) -> Result<f64> {
    w.validate()?;
    Ok(match w {
        WindowKind::Unit => 1.0,
        WindowKind::BornJordan { hbar } => {
            let u = q * p / hbar;
            if u.abs() < BORN_JORDAN_SERIES_CUTOFF {
                let u2 = u * u;
                1.0 - u2 / 6.0 + u2 * u2 / 120.0
            } else {
                u.sin() / u
            }
        }
        WindowKind::SeparableGaussian(g) | WindowKind::NonSeparableGaussian(g) => g.eval(q, p),
        WindowKind::Squeezed(s) => s.eval(q, p),
    })
}

/// Window generated by a pure state, sampled on the self-dual grid
/// (shifts of the state grid) x (its dual momentum grid).
#[derive(Debug, Clone)]
pub struct StateWindow {
    pub field: PhaseField,
    /// Largest imaginary part before it was discarded (or kept).
    pub imag_residue: f64,
    pub is_real: bool,
}

pub const NORM_TOL: f64 = 1e-8;
pub const REAL_TOL: f64 = 1e-8;

/// `Π(q,p) = exp(-iqp/2ħ) ∫ ψ*(x) ψ(x+q) exp(-ipx/ħ) dx`.
pub fn pi_from_state(psi: &[C64], grid: &Grid1D, hbar: f64) -> Result<StateWindow> {
    let n = grid.len();
    if psi.len() != n {
        return Err(Error::Grid(format!("{} samples for a grid of {n}", psi.len())));
    }
    if n % 2 != 0 {
        return Err(Error::Grid("state grid needs an even node count".into()));
    }
    let norm2: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(Error::Norm(norm2));
    }
    let qgrid = Grid1D::centered(n, grid.dx())?;
    let pgrid = grid.dual(hbar)?;
    let phase_grid = PhaseGrid::new(qgrid, pgrid, hbar)?;
    let root = (2.0 * PI * hbar).sqrt();
    let half = (n / 2) as isize;
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|s| -> Result<Vec<C64>> {
            let shift = s as isize - half;
            let g: Vec<C64> = (0..n as isize)
                .map(|j| {
                    let k = j + shift;
                    if (0..n as isize).contains(&k) {
                        psi[j as usize].conj() * psi[k as usize]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            let spec = fourier1(&g, grid, hbar)?;
            let q = qgrid.x(s);
            Ok(spec
                .values
                .iter()
                .enumerate()
                .map(|(m, v)| {
                    let p = spec.grid.x(m);
                    v * root * C64::from_polar(1.0, -q * p / (2.0 * hbar))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut values: Vec<C64> = rows.into_iter().flatten().collect();
    let imag_residue = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let is_real = imag_residue < REAL_TOL;
    if is_real {
        values.iter_mut().for_each(|v| v.im = 0.0);
    }
    Ok(StateWindow { field: PhaseField::from_values(phase_grid, values)?, imag_residue, is_real })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_validation() {
        assert!(GaussianWindow::new(4.0, 4.0, 0.1, 1.0).is_ok());
        assert!(matches!(GaussianWindow::new(4.0, 4.0, 0.3, 1.0), Err(Error::InvalidWindow(_))));
        assert!(GaussianWindow::new(4.0, 4.0, 0.125, 1.0).is_err());
        assert!(GaussianWindow::new(-1.0, 4.0, 0.0, 1.0).is_err());
        assert!(GaussianWindow::new(1.0, 4.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn derived_lambda_quantities() {
        let w = GaussianWindow::new(4.0, 4.0, 0.1, 1.0).unwrap();
        assert!((w.lambda2() - 0.36).abs() < 1e-14);
        let pre = w.fs_autocorr(0.0, 0.0);
        assert!((pre - 16.0 / 1.2).abs() < 1e-12);
        let w0 = w.with_gamma(0.0).unwrap();
        let (q, p) = (0.3, -0.7);
        let exact = 8.0 * (-16.0 * q * q / 4.0 - 16.0 * p * p / 4.0_f64).exp();
        assert!((w0.fs_autocorr(q, p) - exact).abs() < 1e-14);
    }

    #[test]
    fn pi_eval_catalogue() {
        let g = GaussianWindow::new(2.0, 2.0, 0.1, 1.0).unwrap();
        let v = pi_eval(&WindowKind::NonSeparableGaussian(g), 1.0, 1.0).unwrap();
        assert!((v - (-0.125_f64 - 0.125 + 0.05).exp()).abs() < 1e-15);
        assert!(pi_eval(&WindowKind::SeparableGaussian(g), 1.0, 1.0).is_err());
        let bj = WindowKind::BornJordan { hbar: 1.0 };
        assert_eq!(pi_eval(&bj, 0.0, 3.0).unwrap(), 1.0);
        assert!((pi_eval(&bj, 2.0, 0.5).unwrap() - 1f64.sin()).abs() < 1e-15);
        // both branches agree at the cutoff
        let u = BORN_JORDAN_SERIES_CUTOFF;
        assert!((pi_eval(&bj, u, 1.0).unwrap() - u.sin() / u).abs() < 1e-16);
        assert_eq!(pi_eval(&WindowKind::Unit, 5.0, -2.0).unwrap(), 1.0);
    }

    #[test]
    fn squeezed_reduces_to_coherent() {
        let s = SqueezedWindow::new(1.0, C64::new(0.0, 0.0), 1.0).unwrap();
        let (q, p) = (0.8, -1.3);
        assert!((s.eval(q, p) - (-q * q / 4.0 - p * p / 4.0_f64).exp()).abs() < 1e-15);
        let g = squeezed_to_gaussian(&s).unwrap();
        assert!((g.sigma_l() - 2f64.sqrt()).abs() < 1e-15);
        assert!((g.sigma_p() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.gamma(), 0.0);
        assert!(SqueezedWindow::new(1.0, C64::new(0.6, 0.8), 1.0).is_err());
    }

    #[test]
    fn real_squeezing_keeps_gamma_zero() {
        let s = SqueezedWindow::new(1.0, C64::new(0.5, 0.0), 1.0).unwrap();
        assert!((s.kappa() - C64::new(3.0, 0.0)).norm() < 1e-15);
        assert_eq!(squeezed_to_gaussian(&s).unwrap().gamma(), 0.0);
    }
}
