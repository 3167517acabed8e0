//! Regularized quantum operators on a position grid and in the number basis.

mod fock;
mod hamiltonian;
mod rules;

pub use fock::{
    calibrate, closed_form_matrix, fock_q0_closed, fock_q0_numeric, thermal_cutoff, thermal_diagonal, trace_formula_check,
    CalibrationReport, CandidateN, ClosedForm, FockMatrix, FockQuadrature, TraceCheck, CALIBRATION_TOL,
    DEFAULT_N_MAX,
};
pub use hamiltonian::{
    build_hamiltonian, build_hamiltonian_with, kinetic_operator, quantum_v_eff, HamiltonianParts,
};
pub use rules::{
    momentum_operator, position_operator, quantize_l_pn, quantize_momentum_fn, quantize_potential, window_operator,
    LpnOperator,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::math::grid::Grid1D;
use crate::portrait::Interval;

/// Dense operator on the nodes of a position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    grid: Grid1D,
    matrix: DMatrix<C64>,
}

impl GridOperator {
    pub fn new(grid: Grid1D, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != grid.len() || matrix.ncols() != grid.len() {
            return Err(Error::Grid(format!(
                "{}x{} matrix on a grid of {} nodes",
                matrix.nrows(),
                matrix.ncols(),
                grid.len()
            )));
        }
        if matrix.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Grid("operator has non-finite entries".into()));
        }
        Ok(Self { grid, matrix })
    }

    /// Multiplication operator by `f(x_j)`.
    pub fn diagonal(grid: Grid1D, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Self::new(grid, DMatrix::from_diagonal(&d))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn norm_inf(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `‖A - A†‖∞`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.row_iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|v| v.im == 0.0)
    }

    /// Diagonal entries as real numbers (imaginary parts dropped).
    pub fn diagonal_values(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|v| v.re).collect()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = DVector::from_column_slice(v);
        (&self.matrix * x).iter().copied().collect()
    }

    pub fn add(&self, other: &GridOperator) -> Result<GridOperator> {
        self.grid.check_same(&other.grid)?;
        Self::new(self.grid, &self.matrix + &other.matrix)
    }

    /// `½(A + A†)`.
    pub fn hermitian_part(&self) -> GridOperator {
        Self { grid: self.grid, matrix: (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// Full spectrum of a Hermitian operator, ascending. Real operators use
    /// the real symmetric solver.
    pub fn eigen(&self) -> Spectrum {
        let n = self.dim();
        let mut pairs: Vec<(f64, Vec<C64>)> = if self.is_real() {
            let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.matrix[(i, j)].re + self.matrix[(j, i)].re));
            let e = m.symmetric_eigen();
            (0..n)
                .map(|k| (e.eigenvalues[k], e.eigenvectors.column(k).iter().map(|&x| C64::new(x, 0.0)).collect()))
                .collect()
        } else {
            let e = self.hermitian_part().matrix.symmetric_eigen();
            (0..n).map(|k| (e.eigenvalues[k], e.eigenvectors.column(k).iter().copied().collect())).collect()
        };
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let values = pairs.iter().map(|p| p.0).collect();
        let vectors = pairs.into_iter().map(|p| p.1).collect();
        Spectrum { grid: self.grid, values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.is_real() {
            let n = self.dim();
            let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.matrix[(i, j)].re + self.matrix[(j, i)].re));
            let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        } else {
            let mut v: Vec<f64> = self.hermitian_part().matrix.symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        }
    }
}

/// Eigenvalues (ascending) with unit-norm eigenvectors in grid samples.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Probability of eigenvector `k` on the nodes inside `iv`.
    pub fn interior_weight(&self, k: usize, iv: &Interval) -> f64 {
        self.grid.points().zip(&self.vectors[k]).filter(|(x, _)| iv.contains(*x)).map(|(_, v)| v.norm_sqr()).sum()
    }

    /// Indices, ascending in energy, of eigenvectors with at least
    /// `threshold` of their weight inside `iv`.
    ///
    /// Outside the walls the inverse mass is exponentially small, so the
    /// regularized operator carries a dense band of states living there.
    /// Their number grows with the grid and they interleave with the
    /// states of the well.
    pub fn confined(&self, iv: &Interval, threshold: f64) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.interior_weight(k, iv) >= threshold).collect()
    }

    /// Envelope `max |ψ_k(x)|` over nodes at distance at least `d` from
    /// `iv`, for `d = 0, step, 2 step, ...` up to the grid edge.
    pub fn tail_envelope(&self, k: usize, iv: &Interval, step: f64) -> Vec<(f64, f64)> {
        let dist: Vec<f64> = self.grid.points().map(|x| (iv.a() - x).max(x - iv.b()).max(0.0)).collect();
        let reach = dist.iter().copied().fold(0.0, f64::max);
        let mut out = Vec::new();
        let mut d = 0.0;
        while d <= reach {
            let m = dist
                .iter()
                .zip(&self.vectors[k])
                .filter(|(&r, _)| r >= d && r > 0.0)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            out.push((d, m));
            d += step;
        }
        out
    }
}

/// Three-point stencil coefficients for `P` and `P²` on a uniform grid.
pub(crate) fn central_p(n: usize, dx: f64, hbar: f64) -> DMatrix<C64> {
    let c = C64::new(0.0, hbar / (2.0 * dx));
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            -c
        } else if i == j + 1 {
            c
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub(crate) fn central_p2(n: usize, dx: f64, hbar: f64) -> DMatrix<C64> {
    let k = hbar * hbar / (dx * dx);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(2.0 * k, 0.0)
        } else if i.abs_diff(j) == 1 {
            C64::new(-k, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_hermitian() {
        let g = Grid1D::spanning(0.0, 1.0, 9).unwrap();
        let p = GridOperator::new(g, central_p(9, g.dx(), 1.0)).unwrap();
        let p2 = GridOperator::new(g, central_p2(9, g.dx(), 1.0)).unwrap();
        assert_eq!(p.hermiticity_residual(), 0.0);
        assert!(p2.is_real());
        assert_eq!(p2.hermiticity_residual(), 0.0);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = Grid1D::spanning(0.0, 1.0, 4).unwrap();
        assert!(GridOperator::new(g, DMatrix::zeros(3, 3)).is_err());
        assert!(GridOperator::diagonal(g, &[1.0, 2.0]).is_err());
        assert!(GridOperator::diagonal(g, &[1.0, 2.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn diagonal_spectrum_is_sorted_and_localized() {
        let g = Grid1D::spanning(0.0, 3.0, 4).unwrap();
        let s = GridOperator::diagonal(g, &[3.0, -1.0, 2.0, 0.5]).unwrap().eigen();
        assert_eq!(s.values, vec![-1.0, 0.5, 2.0, 3.0]);
        let iv = Interval::new(0.5, 1.5).unwrap();
        assert_eq!(s.confined(&iv, 0.5), vec![0]);
        assert_eq!(s.interior_weight(1, &iv), 0.0);
        let env = s.tail_envelope(1, &iv, 1.0);
        assert_eq!(env[0], (0.0, 1.0));
        assert_eq!(env[1], (1.0, 1.0));
    }

    #[test]
    fn complex_spectrum_matches_real_part_when_real() {
        let g = Grid1D::spanning(0.0, 1.0, 6).unwrap();
        let p2 = GridOperator::new(g, central_p2(6, g.dx(), 1.0)).unwrap();
        let p = GridOperator::new(g, central_p(6, g.dx(), 1.0)).unwrap();
        let sum = p2.add(&p).unwrap();
        let e = sum.eigenvalues();
        let full = sum.eigen();
        for (a, b) in e.iter().zip(&full.values) {
            assert!((a - b).abs() < 1e-9);
        }
        for (k, v) in full.vectors.iter().enumerate() {
            let av = sum.apply(v);
            let res: f64 = av.iter().zip(v).map(|(x, y)| (x - y * full.values[k]).norm_sqr()).sum();
            assert!(res.sqrt() < 1e-9);
        }
    }
}
