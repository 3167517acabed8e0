//! Quantization rules for separable windows: potentials, functions of `p`
//! and the `L(q) pⁿ` family for `n ≤ 2`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{central_p, central_p2, GridOperator};
use crate::error::{Error, Result};
use crate::math::grid::Grid1D;
use crate::math::quadrature::{gauss_hermite, gaussian_expectation};
use crate::portrait::Interval;
use crate::window::WindowKind;

/// Kernel of the position smoothing `(1/√(2πħ)) 𝓕̄[μ]`. For a Gaussian
/// `μ(p) = exp(-p²/2σp²)` it is the normal density of width `s = ħ/σp`.
struct SmoothingKernel {
    s: f64,
}

/// The kernel is cut at this many widths.
const KERNEL_WIDTHS: f64 = 12.0;
const SMOOTHING_TOL: f64 = 1e-12;
const MAX_DEPTH: u32 = 48;

fn require_separable(w: &WindowKind) -> Result<()> {
    w.validate()?;
    if !w.is_separable() {
        return Err(Error::InvalidWindow("rule needs a separable window (gamma = 0)".into()));
    }
    Ok(())
}

impl SmoothingKernel {
    /// `None` for windows with `μ ≡ 1`, whose kernel is a delta.
    fn new(w: &WindowKind) -> Option<Self> {
        w.as_gaussian().map(|g| Self { s: g.hbar() / g.sigma_p() })
    }

    /// `order`-th derivative of the kernel at `y`.
    fn eval(&self, y: f64, order: usize) -> f64 {
        let s2 = self.s * self.s;
        let g = (-y * y / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
        match order {
            0 => g,
            1 => -y / s2 * g,
            _ => (y * y / s2 - 1.0) / s2 * g,
        }
    }

    /// `∫ f(x - y) κ^{(order)}(y) dy` by adaptive Simpson, which bisects down
    /// to any jumps of `f`.
    fn smooth(&self, f: &dyn Fn(f64) -> f64, x: f64, order: usize) -> f64 {
        let g = |y: f64| f(x - y) * self.eval(y, order);
        let h = KERNEL_WIDTHS * self.s;
        // split at the origin so the peak is a node
        [(-h, 0.0), (0.0, h)]
            .iter()
            .map(|&(lo, hi)| {
                let mid = 0.5 * (lo + hi);
                let (fl, fm, fh) = (g(lo), g(mid), g(hi));
                let whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
                adaptive_simpson(&g, lo, hi, fl, fm, fh, whole, SMOOTHING_TOL / self.s, MAX_DEPTH)
            })
            .sum()
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    fl: f64,
    fm: f64,
    fh: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
    let (flm, frm) = (g(lm), g(rm));
    let left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
    let right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(g, lo, mid, fl, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(g, mid, hi, fm, frm, fh, right, 0.5 * tol, depth - 1)
}

/// Position profile `(1/√(2πħ)) (V * 𝓕̄[Π(0,·)])(x_j)` and, on request, its
/// derivatives.
fn smoothed_profile(v: &dyn Fn(f64) -> f64, w: &WindowKind, grid: &Grid1D, order: usize) -> Result<Vec<f64>> {
    match SmoothingKernel::new(w) {
        Some(k) => Ok(grid.points().map(|x| k.smooth(v, x, order)).collect()),
        None => {
            let h = grid.dx();
            Ok(grid
                .points()
                .map(|x| match order {
                    0 => v(x),
                    1 => (v(x + h) - v(x - h)) / (2.0 * h),
                    _ => (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h),
                })
                .collect())
        }
    }
}

/// Multiplication operator `𝔙(Q)` of a potential `V(q)`.
pub fn quantize_potential(v: &dyn Fn(f64) -> f64, w: &WindowKind, grid: &Grid1D) -> Result<GridOperator> {
    w.validate()?;
    GridOperator::diagonal(*grid, &smoothed_profile(v, w, grid, 0)?)
}

/// `ℰ(Q)`: quantized indicator of the interval.
pub fn window_operator(w: &WindowKind, iv: &Interval, grid: &Grid1D) -> Result<GridOperator> {
    require_separable(w)?;
    quantize_potential(&|x| iv.indicator(x), w, grid)
}

/// `Q` on the grid.
pub fn position_operator(grid: &Grid1D) -> GridOperator {
    let x: Vec<f64> = grid.points().collect();
    GridOperator::diagonal(*grid, &x).expect("finite grid")
}

/// `P = -iħ d/dx` by central differences.
pub fn momentum_operator(grid: &Grid1D, hbar: f64) -> GridOperator {
    GridOperator::new(*grid, central_p(grid.len(), grid.dx(), hbar)).expect("finite stencil")
}

pub const MOMENTUM_HERMITE_NODES: usize = 64;

/// `A_v = ṽ(P)` with `ṽ = (1/√(2πħ)) v * 𝓕[Π(·,0)]`, built in the discrete
/// Fourier basis of the grid:
/// `A_{jl} = (1/n) Σ_k ṽ(p_k) exp(i p_k (x_j - x_l)/ħ)`.
pub fn quantize_momentum_fn(
    v: &dyn Fn(f64) -> f64,
    w: &WindowKind,
    grid: &Grid1D,
    hbar: f64,
) -> Result<GridOperator> {
    w.validate()?;
    let dual = grid.dual(hbar)?;
    let smoothed: Vec<f64> = match w.as_gaussian() {
        Some(g) => {
            let rule = gauss_hermite(MOMENTUM_HERMITE_NODES)?;
            let s = hbar / g.sigma_l();
            dual.points().map(|p| gaussian_expectation(&rule, p, s, v)).collect()
        }
        None => dual.points().map(v).collect(),
    };
    let n = grid.len();
    let toeplitz: Vec<C64> = (0..2 * n - 1)
        .map(|d| {
            let dist = (d as f64 - (n - 1) as f64) * grid.dx();
            dual.points().zip(&smoothed).map(|(p, &vt)| vt * C64::from_polar(1.0, p * dist / hbar)).sum::<C64>()
                / n as f64
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |j, l| toeplitz[j + n - 1 - l]);
    Ok(GridOperator::new(*grid, m)?.hermitian_part())
}

/// Quantized `L(q) pⁿ` together with the symmetry diagnostic.
#[derive(Debug, Clone)]
pub struct LpnOperator {
    pub operator: GridOperator,
    /// `λ'(0) ≠ 0`: the rule does not produce a symmetric operator and the
    /// returned matrix is only its Hermitian part.
    pub asymmetric: bool,
}

/// `λ(0)`, `λ'(0)`, `λ''(0)` of `λ(q) = Π(q,0)`.
fn lambda_derivatives(w: &WindowKind) -> (f64, f64, f64) {
    match w.as_gaussian() {
        Some(g) => (1.0, 0.0, -1.0 / g.sigma_l().powi(2)),
        None => (1.0, 0.0, 0.0),
    }
}

/// `A_{L(q) pⁿ}` for `n ∈ {0, 1, 2}` with `T = (1/√(2πħ)) 𝓕̄[μ] * L`:
///
/// ```text
/// n = 0: λ(0) T
/// n = 1: λ(0)(TP + PT)/2 + iħ λ'(0) T
/// n = 2: λ(0)(TP² + P²T)/2 + 2iħ λ'(0) T P + ħ²(-λ''(0) T + λ'(0) T' + λ(0) T''/4)
/// ```
pub fn quantize_l_pn(
    l: &dyn Fn(f64) -> f64,
    n: usize,
    w: &WindowKind,
    grid: &Grid1D,
    hbar: f64,
) -> Result<LpnOperator> {
    if n > 2 {
        return Err(Error::Order(n));
    }
    require_separable(w)?;
    let (l0, l1, l2) = lambda_derivatives(w);
    let size = grid.len();
    let t = smoothed_profile(l, w, grid, 0)?;
    let tm = DMatrix::from_fn(size, size, |i, j| if i == j { C64::new(t[i], 0.0) } else { C64::new(0.0, 0.0) });
    let ih = C64::new(0.0, hbar);
    let m = match n {
        0 => &tm * C64::new(l0, 0.0),
        1 => {
            let p = central_p(size, grid.dx(), hbar);
            (&tm * &p + &p * &tm) * C64::new(l0 / 2.0, 0.0) + &tm * (ih * l1)
        }
        _ => {
            let p = central_p(size, grid.dx(), hbar);
            let p2 = central_p2(size, grid.dx(), hbar);
            let t1 = smoothed_profile(l, w, grid, 1)?;
            let t2 = smoothed_profile(l, w, grid, 2)?;
            let pot: Vec<C64> = (0..size)
                .map(|i| C64::new(hbar * hbar * (-l2 * t[i] + l1 * t1[i] + l0 * t2[i] / 4.0), 0.0))
                .collect();
            let mut m = (&tm * &p2 + &p2 * &tm) * C64::new(l0 / 2.0, 0.0) + (&tm * &p) * (ih * 2.0 * l1);
            for (i, v) in pot.into_iter().enumerate() {
                m[(i, i)] += v;
            }
            m
        }
    };
    let op = GridOperator::new(*grid, m)?;
    let asymmetric = l1 != 0.0;
    Ok(LpnOperator { operator: if asymmetric { op.hermitian_part() } else { op }, asymmetric })
}
