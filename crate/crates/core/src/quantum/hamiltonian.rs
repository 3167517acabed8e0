//! Grid discretization of the regularized PDM Hamiltonian
//!
//! ```text
//! Ĥ = ½{1/(2M̂), (P - (ħ²γ/2) [M̂]'/M̂)²} + V̂_eff(Q)
//! ```
//!
//! with `1/M̂ = 𝔐_{σp}`. Below the mass floor the inverse mass and the shift
//! are clamped to zero, so the kinetic term switches off outside the walls.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::GridOperator;
use crate::error::{Error, Result};
use crate::math::grid::Grid1D;
use crate::portrait::{chi_hat_profile, m_hat_jet, CorrectionPrefactor, PortraitContext};

pub const MIN_NODES: usize = 64;

/// Sampled ingredients of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub kinetic: GridOperator,
    /// `V̂_eff(x_j)`.
    pub potential: Vec<f64>,
    /// Clamped `1/M̂(x_j)`.
    pub inverse_mass: Vec<f64>,
    /// Clamped shift `c(x_j)` in `K = P + c`.
    pub shift: Vec<f64>,
}

fn check_grid(ctx: &PortraitContext, grid: &Grid1D) -> Result<()> {
    if grid.len() < MIN_NODES {
        return Err(Error::Grid(format!("need at least {MIN_NODES} nodes, got {}", grid.len())));
    }
    let iv = ctx.model.interval();
    let pad = 4.0 * ctx.hat_width();
    let eps = 1e-9 * grid.dx();
    if grid.x0() > iv.a() - pad + eps || grid.last() < iv.b() + pad - eps {
        return Err(Error::Grid(format!(
            "grid [{}, {}] must cover [{}, {}]",
            grid.x0(),
            grid.last(),
            iv.a() - pad,
            iv.b() + pad
        )));
    }
    Ok(())
}

/// Quantum effective potential at `x`:
///
/// ```text
/// (V0/2)[(x-q0)² + ħ²/σp²] χ̂ + 𝔐[(ħ⁴γ²/4)(𝔐'/𝔐)' + ħ²/σℓ²]
///   - c [(x+b-2q0) e^{-σp²(x-b)²/2ħ²} - (x+a-2q0) e^{-σp²(x-a)²/2ħ²}]
/// ```
///
/// The middle term is dropped below the mass floor.
pub fn quantum_v_eff(ctx: &PortraitContext, x: f64, prefactor: CorrectionPrefactor) -> f64 {
    let (h, g) = (ctx.hbar(), ctx.window.gamma());
    let (sl, sp) = (ctx.window.sigma_l(), ctx.window.sigma_p());
    let (v0, q0) = (ctx.model.v0(), ctx.model.q0());
    let iv = ctx.model.interval();
    let v1 = v0 / 2.0 * ((x - q0).powi(2) + h * h / (sp * sp)) * chi_hat_profile(ctx, x);
    let w = m_hat_jet(ctx, x);
    let v2 = if w.value >= ctx.model.mass_floor() {
        g * g * h.powi(4) / 4.0 * (w.d2 - w.d1 * w.d1 / w.value) + h * h * w.value / (sl * sl)
    } else {
        0.0
    };
    let c = match prefactor {
        CorrectionPrefactor::AsPublished => v0 * h / (2.0 * PI * sp * sp).sqrt(),
        CorrectionPrefactor::ConvolutionConsistent => v0 * h / (8.0 * PI * sp * sp).sqrt(),
    };
    let k = sp * sp / (2.0 * h * h);
    let v3 = -c
        * ((x + iv.b() - 2.0 * q0) * (-k * (x - iv.b()).powi(2)).exp()
            - (x + iv.a() - 2.0 * q0) * (-k * (x - iv.a()).powi(2)).exp());
    v1 + v2 + v3
}

fn mass_samples(ctx: &PortraitContext, grid: &Grid1D) -> (Vec<f64>, Vec<f64>) {
    let floor = ctx.model.mass_floor();
    let scale = ctx.hbar().powi(2) * ctx.window.gamma() / 2.0;
    grid.points()
        .map(|x| {
            let w = m_hat_jet(ctx, x);
            if w.value >= floor {
                (w.value, scale * w.d1 / w.value)
            } else {
                (0.0, 0.0)
            }
        })
        .unzip()
}

/// `¼(W K² + K² W)` with `W = 1/M̂`, `K² = P² + (Pc + cP) + c²`.
///
/// `P²` is the three-point Laplacian rather than the square of the
/// central-difference `P`, whose five-point stencil decouples even and odd
/// nodes.
pub fn kinetic_operator(ctx: &PortraitContext, grid: &Grid1D) -> Result<GridOperator> {
    check_grid(ctx, grid)?;
    let (w, c) = mass_samples(ctx, grid);
    assemble_kinetic(grid, ctx.hbar(), &w, &c)
}

fn assemble_kinetic(grid: &Grid1D, hbar: f64, w: &[f64], c: &[f64]) -> Result<GridOperator> {
    let n = grid.len();
    let dx = grid.dx();
    let lap = hbar * hbar / (dx * dx);
    let pc = C64::new(0.0, hbar / (2.0 * dx));
    let k2 = |i: usize, j: usize| -> C64 {
        if i == j {
            C64::new(2.0 * lap + c[i] * c[i], 0.0)
        } else if j == i + 1 {
            C64::new(-lap, 0.0) - pc * (c[i] + c[j])
        } else if i == j + 1 {
            C64::new(-lap, 0.0) + pc * (c[i] + c[j])
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let m = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) <= 1 { k2(i, j) * (0.25 * (w[i] + w[j])) } else { C64::new(0.0, 0.0) });
    Ok(GridOperator::new(*grid, m)?.hermitian_part())
}

pub fn build_hamiltonian_with(
    ctx: &PortraitContext,
    grid: &Grid1D,
    prefactor: CorrectionPrefactor,
) -> Result<HamiltonianParts> {
    check_grid(ctx, grid)?;
    let (w, c) = mass_samples(ctx, grid);
    let kinetic = assemble_kinetic(grid, ctx.hbar(), &w, &c)?;
    let potential = grid.points().map(|x| quantum_v_eff(ctx, x, prefactor)).collect();
    Ok(HamiltonianParts { kinetic, potential, inverse_mass: w, shift: c })
}

/// Full Hamiltonian with the published correction prefactor.
pub fn build_hamiltonian(ctx: &PortraitContext, grid: &Grid1D) -> Result<GridOperator> {
    let parts = build_hamiltonian_with(ctx, grid, CorrectionPrefactor::AsPublished)?;
    parts.kinetic.add(&GridOperator::diagonal(*grid, &parts.potential)?)
}

impl HamiltonianParts {
    pub fn total(&self) -> Result<GridOperator> {
        self.kinetic.add(&GridOperator::diagonal(*self.kinetic.grid(), &self.potential)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portrait::{Interval, PdmOscillator};
    use crate::window::GaussianWindow;

    fn ctx(gamma: f64) -> PortraitContext {
        let model = PdmOscillator::new(1.0, 1.0, 3.0, 3.0, Interval::new(1.0, 5.0).unwrap()).unwrap();
        PortraitContext::new(model, GaussianWindow::new(4.0, 4.0, gamma, 1.0).unwrap())
    }

    #[test]
    fn potential_vanishes_far_outside() {
        for prefactor in [CorrectionPrefactor::AsPublished, CorrectionPrefactor::ConvolutionConsistent] {
            assert!(quantum_v_eff(&ctx(0.1), -20.0, prefactor).abs() < 1e-300);
            assert!(quantum_v_eff(&ctx(0.1), 30.0, prefactor).abs() < 1e-300);
        }
    }

    #[test]
    fn centre_of_the_well() {
        // V0 ħ²/(2σp²) + ħ² 𝔐/σℓ² at the minimum; walls are negligible there
        let c = ctx(0.0);
        let w = m_hat_jet(&c, 3.0).value;
        let want = 3.0 / (2.0 * 16.0) + w / 16.0;
        assert!((quantum_v_eff(&c, 3.0, CorrectionPrefactor::AsPublished) - want).abs() < 1e-12);
    }

    #[test]
    fn constant_mass_gives_the_laplacian() {
        let g = Grid1D::spanning(0.0, 1.0, 8).unwrap();
        let k = assemble_kinetic(&g, 1.0, &[2.0; 8], &[0.0; 8]).unwrap();
        let lap = 1.0 / g.dx().powi(2);
        assert!((k.matrix()[(3, 3)].re - 2.0 * lap).abs() < 1e-12 * lap);
        assert!((k.matrix()[(3, 4)].re + lap).abs() < 1e-12 * lap);
        assert_eq!(k.matrix()[(3, 5)], C64::new(0.0, 0.0));
    }

    #[test]
    fn coupling_makes_the_kinetic_block_complex() {
        let g = Grid1D::spanning(-1.0, 7.0, 128).unwrap();
        assert!(kinetic_operator(&ctx(0.0), &g).unwrap().is_real());
        assert!(!kinetic_operator(&ctx(0.1), &g).unwrap().is_real());
    }
}
