//! Semi-classical portraits of observables truncated to an interval, for
//! the position-dependent-mass oscillator
//! `H = p²(q-a)(b-q)/(2 m0 L²) + V0 (q-q0)²/2` on `(a,b)`.
//!
//! Both the mass profile and the regularized characteristic function are
//! Gaussian smoothings of their truncated classical counterparts. They are
//! written below in terms of the smoothing standard deviation `s`:
//! `B(x) = Φ((b-x)/s) - Φ((a-x)/s)` and `φ(u) = exp(-u²/2s²)/(s√(2π))`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::math::fourier::{convolve2, Transformed};
use crate::math::grid::{PhaseField, PhaseGrid};
use crate::math::quadrature::{gauss_hermite, gaussian_expectation};
use crate::math::special::{erfc, gauss_pdf};
use crate::window::GaussianWindow;

/// Confinement interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("interval needs a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        (self.a + self.b) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    /// Sharp characteristic function, `1/2` on the endpoints.
    pub fn indicator(&self, x: f64) -> f64 {
        if self.contains(x) {
            1.0
        } else if x == self.a || x == self.b {
            0.5
        } else {
            0.0
        }
    }
}

/// Classical model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdmOscillator {
    m0: f64,
    l: f64,
    v0: f64,
    q0: f64,
    interval: Interval,
}

impl PdmOscillator {
    pub fn new(m0: f64, l: f64, v0: f64, q0: f64, interval: Interval) -> Result<Self> {
        if !(m0 > 0.0) || !(l > 0.0) {
            return Err(Error::Domain(format!("need m0, L > 0, got {m0}, {l}")));
        }
        if !(v0 >= 0.0) || !q0.is_finite() {
            return Err(Error::Domain(format!("need V0 >= 0 and finite q0, got {v0}, {q0}")));
        }
        Ok(Self { m0, l, v0, q0, interval })
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn with_q0(&self, q0: f64) -> Result<Self> {
        Self::new(self.m0, self.l, self.v0, q0, self.interval)
    }

    pub fn with_v0(&self, v0: f64) -> Result<Self> {
        Self::new(self.m0, self.l, v0, self.q0, self.interval)
    }

    fn m0l2(&self) -> f64 {
        self.m0 * self.l * self.l
    }

    /// Truncated inverse mass `(q-a)(b-q) χ(q) / (m0 L²)`.
    pub fn inverse_mass_truncated(&self, q: f64) -> f64 {
        let (a, b) = (self.interval.a, self.interval.b);
        (q - a) * (b - q) * self.interval.indicator(q) / self.m0l2()
    }

    /// Truncated potential `V0 (q-q0)² χ(q) / 2`.
    pub fn potential_truncated(&self, q: f64) -> f64 {
        self.v0 / 2.0 * (q - self.q0).powi(2) * self.interval.indicator(q)
    }

    /// Truncated Hamiltonian `χ(q) H(q,p)`.
    pub fn hamiltonian_truncated(&self, q: f64, p: f64) -> f64 {
        p * p * self.inverse_mass_truncated(q) / 2.0 + self.potential_truncated(q)
    }

    /// Threshold below which the regularized inverse mass is treated as
    /// zero: `1e-12 (b-a)² / (4 m0 L²)`, i.e. `1e-12` of the classical peak.
    pub fn mass_floor(&self) -> f64 {
        1e-12 * self.interval.width().powi(2) / (4.0 * self.m0l2())
    }
}

/// Model plus window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitContext {
    pub model: PdmOscillator,
    pub window: GaussianWindow,
}

impl PortraitContext {
    pub fn new(model: PdmOscillator, window: GaussianWindow) -> Self {
        Self { model, window }
    }

    pub fn hbar(&self) -> f64 {
        self.window.hbar()
    }

    /// Smoothing width of the semi-classical portraits in `q`, `√2 ħ/σp`.
    pub fn check_width(&self) -> f64 {
        SQRT_2 * self.hbar() / self.window.sigma_p()
    }

    /// Smoothing width of the quantum multiplication profiles, `ħ/σp`.
    pub fn hat_width(&self) -> f64 {
        self.hbar() / self.window.sigma_p()
    }
}

/// `B_σ(a,b;x) = ½(erfc(σ(x-b)/ħ) - erfc(σ(x-a)/ħ))`.
pub fn b_sigma(sigma: f64, iv: &Interval, x: f64, hbar: f64) -> f64 {
    let k = sigma / hbar;
    if x < iv.midpoint() {
        0.5 * (erfc(k * (iv.a - x)) - erfc(k * (iv.b - x)))
    } else {
        0.5 * (erfc(k * (x - iv.b)) - erfc(k * (x - iv.a)))
    }
}

/// `B` in terms of the smoothing standard deviation `s = ħ/(√2 σ)`.
fn b_std(iv: &Interval, x: f64, s: f64) -> f64 {
    b_sigma(1.0 / (SQRT_2 * s), iv, x, 1.0)
}

/// Value and first three derivatives of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// `χ̌(q) = B_{σp/2}(a,b;q)`.
pub fn chi_check(ctx: &PortraitContext, q: f64) -> f64 {
    b_sigma(ctx.window.sigma_p() / 2.0, ctx.model.interval(), q, ctx.hbar())
}

/// Derivative of `χ̌`.
pub fn chi_check_d1(ctx: &PortraitContext, q: f64) -> f64 {
    let s = ctx.check_width();
    let iv = ctx.model.interval();
    gauss_pdf(q - iv.a, s) - gauss_pdf(q - iv.b, s)
}

/// Profile of the quantum window operator, `B_{σp/√2}(a,b;x)`.
pub fn chi_hat_profile(ctx: &PortraitContext, x: f64) -> f64 {
    b_sigma(ctx.window.sigma_p() / SQRT_2, ctx.model.interval(), x, ctx.hbar())
}

/// `𝔐_σ(x)`: Gaussian smoothing of the truncated inverse mass.
pub fn mass_profile(sigma: f64, model: &PdmOscillator, x: f64, hbar: f64) -> f64 {
    mass_jet(sigma, model, x, hbar).value
}

/// `𝔐_σ` with analytic derivatives up to third order.
pub fn mass_jet(sigma: f64, model: &PdmOscillator, x: f64, hbar: f64) -> Jet {
    let s = hbar / sigma;
    let s2 = s * s;
    let iv = model.interval();
    let (a, b) = (iv.a, iv.b);
    let bb = b_std(iv, x, s);
    let (pa, pb) = (gauss_pdf(x - a, s), gauss_pdf(x - b, s));
    let (xa, xb) = (x - a, x - b);
    let c = 1.0 / model.m0l2();
    let value = (-xa * xb - s2) * bb + s2 * (xa * pb - xb * pa);
    let d1 = (a + b - 2.0 * x) * bb - 2.0 * s2 * (pa - pb);
    let d2 = -2.0 * bb + (b - a) * (pa + pb);
    let d3 = -2.0 * (pa - pb) - (b - a) / s2 * (xa * pa + xb * pb);
    Jet { value: c * value, d1: c * d1, d2: c * d2, d3: c * d3 }
}

/// Semi-classical inverse mass `1/m̌ = 𝔐_{σp/√2}`.
pub fn m_check(ctx: &PortraitContext, q: f64) -> f64 {
    m_check_jet(ctx, q).value
}

pub fn m_check_jet(ctx: &PortraitContext, q: f64) -> Jet {
    mass_jet(ctx.window.sigma_p() / SQRT_2, &ctx.model, q, ctx.hbar())
}

/// Quantum inverse-mass profile `1/M̂ = 𝔐_{σp}`.
pub fn m_hat_profile(ctx: &PortraitContext, x: f64) -> f64 {
    m_hat_jet(ctx, x).value
}

pub fn m_hat_jet(ctx: &PortraitContext, x: f64) -> Jet {
    mass_jet(ctx.window.sigma_p(), &ctx.model, x, ctx.hbar())
}

fn guarded_mass(ctx: &PortraitContext, q: f64) -> Result<Jet> {
    let w = m_check_jet(ctx, q);
    let floor = ctx.model.mass_floor();
    if w.value < floor {
        return Err(Error::MassFloor { q, value: w.value, floor });
    }
    Ok(w)
}

/// Minimal-coupling term `A(q) = ħ²γ m̌'/m̌`.
pub fn coupling(ctx: &PortraitContext, q: f64) -> Result<f64> {
    let w = guarded_mass(ctx, q)?;
    Ok(coupling_from(ctx, &w))
}

fn coupling_from(ctx: &PortraitContext, w: &Jet) -> f64 {
    -ctx.hbar().powi(2) * ctx.window.gamma() * w.d1 / w.value
}

/// Derivative of `A(q)`.
pub fn coupling_d1(ctx: &PortraitContext, q: f64) -> Result<f64> {
    let w = guarded_mass(ctx, q)?;
    let r = w.d1 / w.value;
    Ok(-ctx.hbar().powi(2) * ctx.window.gamma() * (w.d2 / w.value - r * r))
}

/// Which Gaussian-correction prefactor of the effective potential to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionPrefactor {
    /// `V0 ħ/√(4π σp²)` for portraits, `V0 ħ/√(2π σp²)` for the operator,
    /// exactly as the two potentials are written in the source.
    #[default]
    AsPublished,
    /// The value obtained by smoothing the truncated parabola with the
    /// respective kernel (`V0 ħ/√(8π σp²)` for the operator).
    ConvolutionConsistent,
}

struct VeffParts {
    value: f64,
    d1: f64,
}

fn v_eff_parts(ctx: &PortraitContext, q: f64) -> Result<VeffParts> {
    let w = guarded_mass(ctx, q)?;
    let (h, g) = (ctx.hbar(), ctx.window.gamma());
    let (sl, sp) = (ctx.window.sigma_l(), ctx.window.sigma_p());
    let (v0, q0) = (ctx.model.v0(), ctx.model.q0());
    let iv = ctx.model.interval();
    let chi = chi_check(ctx, q);
    let dchi = chi_check_d1(ctx, q);
    let off = 2.0 * h * h / (sp * sp);
    let v1 = v0 / 2.0 * ((q - q0).powi(2) + off) * chi;
    let v1d = v0 * (q - q0) * chi + v0 / 2.0 * ((q - q0).powi(2) + off) * dchi;

    let g2h4 = g * g * h.powi(4);
    let v2 = g2h4 / 2.0 * (w.d2 - w.d1 * w.d1 / w.value) + h * h * w.value / (sl * sl);
    let v2d = g2h4 / 2.0
        * (w.d3 - 2.0 * w.d1 * w.d2 / w.value + w.d1.powi(3) / w.value.powi(2))
        + h * h * w.d1 / (sl * sl);

    let c = v0 * h / (4.0 * PI * sp * sp).sqrt();
    let kappa = sp * sp / (4.0 * h * h);
    let eb = (-kappa * (q - iv.b).powi(2)).exp();
    let ea = (-kappa * (q - iv.a).powi(2)).exp();
    let v3 = -c * ((q + iv.b - 2.0 * q0) * eb - (q + iv.a - 2.0 * q0) * ea);
    let v3d = -c
        * (eb * (1.0 - 2.0 * kappa * (q - iv.b) * (q + iv.b - 2.0 * q0))
            - ea * (1.0 - 2.0 * kappa * (q - iv.a) * (q + iv.a - 2.0 * q0)));
    Ok(VeffParts { value: v1 + v2 + v3, d1: v1d + v2d + v3d })
}

/// Semi-classical effective potential `V̌_eff(q)`.
pub fn v_eff_check(ctx: &PortraitContext, q: f64) -> Result<f64> {
    Ok(v_eff_parts(ctx, q)?.value)
}

/// `∂V̌_eff/∂q`.
pub fn v_eff_check_d1(ctx: &PortraitContext, q: f64) -> Result<f64> {
    Ok(v_eff_parts(ctx, q)?.d1)
}

/// Semi-classical Hamiltonian `Ȟ = (p - A)²/(2m̌) + V̌_eff`.
pub fn h_check(ctx: &PortraitContext, q: f64, p: f64) -> Result<f64> {
    let w = guarded_mass(ctx, q)?;
    let a = coupling_from(ctx, &w);
    Ok(w.value / 2.0 * (p - a).powi(2) + v_eff_parts(ctx, q)?.value)
}

/// Portrait of `p² h(q) χ(q)` from the portrait `ȟ` of `h χ` and its
/// first two derivatives:
/// `ȟ (p + ħ²γ ȟ'/ȟ)² + ȟ [ħ⁴γ² (ȟ'/ȟ)' + 2ħ²/σℓ²]`.
pub fn portrait_p2h(h: &Jet, gamma: f64, sigma_l: f64, hbar: f64, p: f64, floor: f64) -> Result<f64> {
    if h.value < floor {
        return Err(Error::MassFloor { q: f64::NAN, value: h.value, floor });
    }
    let r = h.d1 / h.value;
    let dr = h.d2 / h.value - r * r;
    let h2 = hbar * hbar;
    Ok(h.value * (p + h2 * gamma * r).powi(2)
        + h.value * (h2 * h2 * gamma * gamma * dr + 2.0 * h2 / (sigma_l * sigma_l)))
}

/// Brute-force portrait `f̌ = (F̄s[Π Π̃] * f)/(2πħ)` by grid convolution with
/// the closed-form autocorrelation kernel.
pub fn portrait_numeric(f: &PhaseField, w: &GaussianWindow) -> Result<Transformed> {
    let grid: PhaseGrid = *f.grid();
    if (grid.hbar() - w.hbar()).abs() > 1e-15 * w.hbar() {
        return Err(Error::Grid("field and window carry different hbar".into()));
    }
    let norm = 1.0 / (2.0 * PI * w.hbar());
    // F̄s[Π Π̃] is even, so it coincides with Fs[Π Π̃].
    let kernel = PhaseField::from_real_fn(grid, |q, p| w.fs_autocorr(q, p) * norm);
    convolve2(&kernel, f)
}

/// Portrait of a product `u(q) v(p)` under a separable window,
/// `[F̄[λλ̃] * u](q) [F̄[μμ̃] * v](p)` normalized so constants are fixed.
pub fn portrait_separable(
    u: impl Fn(f64) -> f64,
    v: impl Fn(f64) -> f64,
    w: &GaussianWindow,
) -> Result<impl Fn(f64, f64) -> f64> {
    if w.gamma() != 0.0 {
        return Err(Error::InvalidWindow(format!("separable portrait needs gamma = 0, got {}", w.gamma())));
    }
    let rule = gauss_hermite(64)?;
    let (vq, vp, _) = w.portrait_covariance();
    let (sq, sp) = (vq.sqrt(), vp.sqrt());
    Ok(move |q: f64, p: f64| {
        gaussian_expectation(&rule, q, sq, &u) * gaussian_expectation(&rule, p, sp, &v)
    })
}
