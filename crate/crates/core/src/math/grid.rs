//! Uniform discretizations of the line and of the phase plane.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Uniform grid `x_i = x0 + i dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x0: f64,
    dx: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 nodes, got {n}")));
        }
        if !(dx > 0.0) || !dx.is_finite() || !x0.is_finite() {
            return Err(Error::Grid(format!("invalid spacing dx = {dx} or origin x0 = {x0}")));
        }
        Ok(Self { x0, dx, n })
    }

    /// Grid of `n` nodes over `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::Grid(format!("cannot span [{lo}, {hi}] with {n} nodes")));
        }
        Self::new(lo, (hi - lo) / (n - 1) as f64, n)
    }

    /// Grid with node `n/2` at the origin. `n` must be even.
    pub fn centered(n: usize, dx: f64) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::Grid(format!("centered grids need an even node count, got {n}")));
        }
        Self::new(-((n / 2) as f64) * dx, dx, n)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn last(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Index of the centre node of a centered grid.
    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && (self.x0 - other.x0).abs() <= 1e-12 * self.dx.max(1.0)
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }

    pub(crate) fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::Grid("operators live on different grids".into()))
        }
    }

    pub fn is_centered(&self) -> bool {
        self.n % 2 == 0 && (self.x(self.n / 2)).abs() <= 1e-12 * self.dx
    }

    /// Reciprocal grid of a Fourier pair with kernel `exp(-i k x / hbar)`:
    /// centered, same length, spacing `2 pi hbar / (n dx)`.
    pub fn dual(&self, hbar: f64) -> Result<Self> {
        Self::centered(self.n, 2.0 * PI * hbar / (self.n as f64 * self.dx))
    }
}

/// Phase-plane grid with the reduced Planck constant carried alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    q: Grid1D,
    p: Grid1D,
    hbar: f64,
}

impl PhaseGrid {
    pub fn new(q: Grid1D, p: Grid1D, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::Grid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { q, p, hbar })
    }

    /// Square grid on which the discrete symplectic Fourier transform maps
    /// the grid onto itself: `n dq dp = 2 pi hbar`. `aspect = dq / dp`
    /// in units where the geometric mean of the two spacings is 1.
    pub fn self_dual(n: usize, hbar: f64, aspect: f64) -> Result<Self> {
        if !(aspect > 0.0) {
            return Err(Error::Grid(format!("aspect must be positive, got {aspect}")));
        }
        let h = (2.0 * PI * hbar / n as f64).sqrt();
        Self::new(Grid1D::centered(n, h * aspect)?, Grid1D::centered(n, h / aspect)?, hbar)
    }

    pub fn q(&self) -> &Grid1D {
        &self.q
    }

    pub fn p(&self) -> &Grid1D {
        &self.p
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.q.len(), self.p.len())
    }

    /// Area element divided by `2 pi hbar`.
    pub fn measure(&self) -> f64 {
        self.q.dx() * self.p.dx() / (2.0 * PI * self.hbar)
    }

    pub fn is_self_dual(&self) -> bool {
        let n = self.q.len();
        self.q.is_centered()
            && self.p.is_centered()
            && self.p.len() == n
            && ((n as f64 * self.q.dx() * self.p.dx()) / (2.0 * PI * self.hbar) - 1.0).abs() < 1e-10
    }

    pub(crate) fn check_same(&self, other: &PhaseGrid) -> Result<()> {
        if self.q.same_as(&other.q) && self.p.same_as(&other.p) && self.hbar == other.hbar {
            Ok(())
        } else {
            Err(Error::Grid("fields live on different phase grids".into()))
        }
    }
}

/// Complex field sampled on a [`PhaseGrid`], stored row-major with the
/// momentum index running fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<C64>,
}

impl PhaseField {
    pub fn from_values(grid: PhaseGrid, values: Vec<C64>) -> Result<Self> {
        let (nq, np) = grid.shape();
        if values.len() != nq * np {
            return Err(Error::Grid(format!(
                "expected {} samples for a {nq}x{np} grid, got {}",
                nq * np,
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = grid
            .q()
            .points()
            .flat_map(|q| grid.p().points().map(move |p| (q, p)))
            .map(|(q, p)| f(q, p))
            .collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |q, p| C64::new(f(q, p), 0.0))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn get(&self, iq: usize, ip: usize) -> C64 {
        self.values[iq * self.grid.p().len() + ip]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Largest magnitude on the outermost ring of nodes.
    pub fn edge_max(&self) -> f64 {
        let (nq, np) = self.grid.shape();
        let mut m: f64 = 0.0;
        for iq in 0..nq {
            m = m.max(self.get(iq, 0).norm()).max(self.get(iq, np - 1).norm());
        }
        for ip in 0..np {
            m = m.max(self.get(0, ip).norm()).max(self.get(nq - 1, ip).norm());
        }
        m
    }

    /// Riemann sum of the field against `dq dp / (2 pi hbar)`.
    pub fn phase_space_average(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.measure()
    }

    /// Field sampled at the parity-reflected nodes, `f(-q, -p)`. Node 0 of
    /// each axis has no mirror on a centered grid and is wrapped onto itself.
    pub fn parity(&self) -> Self {
        let (nq, np) = self.grid.shape();
        let mut values = vec![C64::new(0.0, 0.0); nq * np];
        for iq in 0..nq {
            for ip in 0..np {
                values[iq * np + ip] = self.get((nq - iq) % nq, (np - ip) % np);
            }
        }
        Self { grid: self.grid, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 0.1, 1).is_err());
        assert!(Grid1D::new(0.0, -0.1, 10).is_err());
        assert!(Grid1D::new(0.0, 0.0, 10).is_err());
        assert!(Grid1D::centered(7, 0.1).is_err());
        let g = Grid1D::spanning(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.last(), 1.0);
    }

    #[test]
    fn self_dual_grid_closes() {
        let g = PhaseGrid::self_dual(128, 1.0, 1.0).unwrap();
        assert!(g.is_self_dual());
        assert_eq!(g.q().x(64), 0.0);
        let d = g.q().dual(1.0).unwrap();
        assert!((d.dx() - g.p().dx()).abs() < 1e-14);
        let g2 = PhaseGrid::self_dual(64, 0.5, 2.0).unwrap();
        assert!(g2.is_self_dual());
        assert!(PhaseGrid::self_dual(64, -1.0, 1.0).is_err());
    }

    #[test]
    fn parity_reflects_nodes() {
        let g = PhaseGrid::self_dual(8, 1.0, 1.0).unwrap();
        let f = PhaseField::from_real_fn(g, |q, p| q + 10.0 * p);
        let pf = f.parity();
        for iq in 1..8 {
            for ip in 1..8 {
                assert!((pf.get(iq, ip).re + f.get(iq, ip).re).abs() < 1e-12);
            }
        }
    }
}
