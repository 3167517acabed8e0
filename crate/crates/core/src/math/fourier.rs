//! Discrete Fourier, symplectic-Fourier and convolution operators on uniform
//! grids.
//!
//! Conventions, with `hbar` explicit:
//!
//! ```text
//! Fs[f](q,p)  = ∫ exp(-i (q p' - p q') / hbar) f(q',p') dq' dp' / (2 pi hbar)
//! F̄s[f](q,p)  = Fs[f](-q,-p)
//! F[f](k)     = (2 pi hbar)^(-1/2) ∫ f(x) exp(-i k x / hbar) dx
//! (f * g)(x)  = ∫ f(x - y) g(y) dy
//! ```
//!
//! On a self-dual phase grid (`n dq dp = 2 pi hbar`, both axes centered)
//! the discrete symplectic transform is an exact involution.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid1D, PhaseField, PhaseGrid};
use crate::error::{Error, Result};

/// Edge-to-peak ratio above which a transform input is flagged.
pub const EDGE_LEAKAGE_RATIO: f64 = 1e-10;

/// Input did not decay to numerical zero at the grid boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLeakage {
    pub ratio: f64,
}

/// Output of a grid transform together with its edge diagnostic.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub field: PhaseField,
    pub leakage: Option<EdgeLeakage>,
}

pub fn edge_leakage(f: &PhaseField) -> Option<EdgeLeakage> {
    let peak = f.max_abs();
    if peak == 0.0 {
        return None;
    }
    let ratio = f.edge_max() / peak;
    (ratio > EDGE_LEAKAGE_RATIO).then_some(EdgeLeakage { ratio })
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

fn alt(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `G_k = sum_j exp(∓ 2 pi i (k - n/2)(j - n/2) / n) g_j`, in place.
fn centered_dft(buf: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
    let n = buf.len();
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= alt(j);
    }
    fft.process(buf);
    let global = alt(n / 2);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= alt(k) * global;
    }
}

/// Centered DFT along both axes of a row-major `rows x cols` array.
/// `row_inverse` selects the `+` sign for the transform over the column
/// index (within rows), `col_inverse` for the transform over the row index.
fn centered_dft2(data: &mut [C64], rows: usize, cols: usize, row_inverse: bool, col_inverse: bool) {
    let fr = plan(cols, row_inverse);
    data.par_chunks_mut(cols).for_each(|row| centered_dft(row, &fr));
    let fc = plan(rows, col_inverse);
    let mut cols_data: Vec<Vec<C64>> =
        (0..cols).map(|c| (0..rows).map(|r| data[r * cols + c]).collect()).collect();
    cols_data.par_iter_mut().for_each(|col| centered_dft(col, &fc));
    for (c, col) in cols_data.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            data[r * cols + c] = *v;
        }
    }
}

fn require_self_dual(g: &PhaseGrid) -> Result<()> {
    if g.is_self_dual() {
        Ok(())
    } else {
        Err(Error::Grid(
            "symplectic transform needs a square centered grid with n dq dp = 2 pi hbar".into(),
        ))
    }
}

fn symplectic(f: &PhaseField, reflected: bool) -> Result<Transformed> {
    let grid = *f.grid();
    require_self_dual(&grid)?;
    let n = grid.q().len();
    let mut data = f.values().to_vec();
    // Fs: exp(-i q p'/hbar) over p' and exp(+i p q'/hbar) over q'.
    centered_dft2(&mut data, n, n, reflected, !reflected);
    // data[m][k] carries output (q_k, p_m); transpose and apply dq dp/(2 pi hbar) = 1/n.
    let scale = 1.0 / n as f64;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for m in 0..n {
        for k in 0..n {
            out[k * n + m] = data[m * n + k] * scale;
        }
    }
    Ok(Transformed { field: PhaseField::from_values(grid, out)?, leakage: edge_leakage(f) })
}

/// Symplectic Fourier transform on a self-dual phase grid.
pub fn sympl_ft(f: &PhaseField) -> Result<Transformed> {
    symplectic(f, false)
}

/// Reflected (dual) symplectic Fourier transform, `F̄s[f](q,p) = Fs[f](-q,-p)`.
pub fn sympl_ft_reflected(f: &PhaseField) -> Result<Transformed> {
    symplectic(f, true)
}

/// Linear (zero-padded) convolution of two fields on the same centered
/// phase grid, `(f*g)(q,p) = ∫ f(q-q',p-p') g(q',p') dq' dp'`.
pub fn convolve2(f: &PhaseField, g: &PhaseField) -> Result<Transformed> {
    let grid = *f.grid();
    grid.check_same(g.grid())?;
    if !grid.q().is_centered() || !grid.p().is_centered() {
        return Err(Error::Grid("convolution needs centered grids".into()));
    }
    let (nq, np) = grid.shape();
    let (mq, mp) = ((2 * nq).next_power_of_two(), (2 * np).next_power_of_two());
    let pad = |src: &PhaseField| {
        let mut buf = vec![C64::new(0.0, 0.0); mq * mp];
        for iq in 0..nq {
            buf[iq * mp..iq * mp + np].copy_from_slice(&src.values()[iq * np..(iq + 1) * np]);
        }
        buf
    };
    let mut a = pad(f);
    let mut b = pad(g);
    fft2_plain(&mut a, mq, mp, false);
    fft2_plain(&mut b, mq, mp, false);
    a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x *= *y);
    fft2_plain(&mut a, mq, mp, true);
    let (cq, cp) = (grid.q().center_index(), grid.p().center_index());
    let scale = grid.q().dx() * grid.p().dx() / (mq * mp) as f64;
    let mut out = Vec::with_capacity(nq * np);
    for iq in 0..nq {
        for ip in 0..np {
            out.push(a[(iq + cq) * mp + ip + cp] * scale);
        }
    }
    let leakage = edge_leakage(f).or_else(|| edge_leakage(g));
    Ok(Transformed { field: PhaseField::from_values(grid, out)?, leakage })
}

/// Plain (uncentered, unnormalized) 2D FFT.
pub(crate) fn fft2_plain(data: &mut [C64], rows: usize, cols: usize, inverse: bool) {
    let fr = plan(cols, inverse);
    data.par_chunks_mut(cols).for_each(|row| fr.process(row));
    let fc = plan(rows, inverse);
    let mut cols_data: Vec<Vec<C64>> =
        (0..cols).map(|c| (0..rows).map(|r| data[r * cols + c]).collect()).collect();
    cols_data.par_iter_mut().for_each(|col| fc.process(col));
    for (c, col) in cols_data.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            data[r * cols + c] = *v;
        }
    }
}

/// Samples of a 1D transform on the reciprocal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1 {
    pub grid: Grid1D,
    pub values: Vec<C64>,
}

/// `F[f](k) = (2 pi hbar)^(-1/2) ∫ f(x) exp(-i k x/hbar) dx` on the dual
/// grid `dk = 2 pi hbar/(n dx)`. The input grid may have any origin but an
/// even node count.
pub fn fourier1(f: &[C64], grid: &Grid1D, hbar: f64) -> Result<Spectrum1> {
    let n = grid.len();
    if f.len() != n {
        return Err(Error::Grid(format!("{} samples for a grid of {n}", f.len())));
    }
    if n % 2 != 0 {
        return Err(Error::Grid("fourier1 needs an even node count".into()));
    }
    let dual = grid.dual(hbar)?;
    let mut buf: Vec<C64> = f.iter().enumerate().map(|(j, &v)| v * alt(j)).collect();
    plan(n, false).process(&mut buf);
    let scale = grid.dx() / (2.0 * std::f64::consts::PI * hbar).sqrt();
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(m, v)| {
            let k = dual.x(m);
            v * C64::from_polar(scale, -k * grid.x0() / hbar)
        })
        .collect();
    Ok(Spectrum1 { grid: dual, values })
}

/// `F̄[F](x) = (2 pi hbar)^(-1/2) ∫ F(k) exp(+i k x/hbar) dk`, evaluated on
/// `target`, the grid whose dual `spec` lives on.
pub fn inverse_fourier1(spec: &Spectrum1, target: &Grid1D, hbar: f64) -> Result<Vec<C64>> {
    let n = target.len();
    let dual = target.dual(hbar)?;
    if spec.values.len() != n || (dual.dx() - spec.grid.dx()).abs() > 1e-12 * dual.dx() {
        return Err(Error::Grid("spectrum does not live on the dual of the target grid".into()));
    }
    let mut buf: Vec<C64> = spec
        .values
        .iter()
        .enumerate()
        .map(|(m, &v)| v * C64::from_polar(1.0, spec.grid.x(m) * target.x0() / hbar))
        .collect();
    plan(n, true).process(&mut buf);
    let scale = spec.grid.dx() / (2.0 * std::f64::consts::PI * hbar).sqrt();
    Ok(buf.into_iter().enumerate().map(|(j, v)| v * (scale * alt(j))).collect())
}

/// `(f*g)(x) = ∫ f(x-y) g(y) dy` for real samples on a shared centered grid.
pub fn convolve1(f: &[f64], g: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    let n = grid.len();
    if f.len() != n || g.len() != n {
        return Err(Error::Grid("convolve1 operands must match the grid".into()));
    }
    if !grid.is_centered() {
        return Err(Error::Grid("convolve1 needs a centered grid".into()));
    }
    let m = (2 * n).next_power_of_two();
    let mut a: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
    a.resize(m, C64::new(0.0, 0.0));
    let mut b: Vec<C64> = g.iter().map(|&v| C64::new(v, 0.0)).collect();
    b.resize(m, C64::new(0.0, 0.0));
    let fwd = plan(m, false);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    plan(m, true).process(&mut a);
    let c = grid.center_index();
    let scale = grid.dx() / m as f64;
    Ok((0..n).map(|i| a[i + c].re * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_field(g: PhaseGrid, sq: f64, sp: f64) -> PhaseField {
        PhaseField::from_real_fn(g, |q, p| (-q * q / (2.0 * sq * sq) - p * p / (2.0 * sp * sp)).exp())
    }

    #[test]
    fn rejects_non_self_dual_grid() {
        let q = Grid1D::centered(32, 0.1).unwrap();
        let g = PhaseGrid::new(q, q, 1.0).unwrap();
        let f = PhaseField::from_real_fn(g, |_, _| 0.0);
        assert!(matches!(sympl_ft(&f), Err(Error::Grid(_))));
    }

    #[test]
    fn flags_edge_leakage() {
        let g = PhaseGrid::self_dual(32, 1.0, 1.0).unwrap();
        let f = PhaseField::from_real_fn(g, |_, _| 1.0);
        let t = sympl_ft(&f).unwrap();
        assert!(t.leakage.is_some());
        // constant -> discrete delta of height n dq dp/(dq dp) * 1/n ... peak equals n at origin
        let c = g.q().center_index();
        assert!((t.field.get(c, c).re - 32.0).abs() < 1e-9);
        let narrow = gaussian_field(g, 0.5, 0.5);
        assert!(sympl_ft(&narrow).unwrap().leakage.is_none());
    }

    #[test]
    fn reflected_transform_of_odd_field_is_mirrored() {
        let g = PhaseGrid::self_dual(64, 1.0, 1.0).unwrap();
        let f = PhaseField::from_real_fn(g, |q, p| q * (-(q * q + p * p) / 2.0).exp());
        let a = sympl_ft(&f).unwrap().field;
        let b = sympl_ft_reflected(&f).unwrap().field.parity();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier1_gaussian_width() {
        let hbar = 1.0;
        let s = 0.8;
        let grid = Grid1D::centered(256, 0.05).unwrap();
        let f: Vec<C64> = grid.points().map(|x| C64::new((-x * x / (2.0 * s * s)).exp(), 0.0)).collect();
        let spec = fourier1(&f, &grid, hbar).unwrap();
        for (m, v) in spec.values.iter().enumerate() {
            let k = spec.grid.x(m);
            // (2 pi hbar)^(-1/2) sqrt(2 pi) s exp(-k^2 s^2 / 2 hbar^2)
            let exact = s / hbar.sqrt() * (-k * k * s * s / (2.0 * hbar * hbar)).exp();
            assert!((v.re - exact).abs() < 1e-12, "k = {k}");
            assert!(v.im.abs() < 1e-12);
        }
        let back = inverse_fourier1(&spec, &grid, hbar).unwrap();
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier1_shifted_grid_round_trip() {
        let grid = Grid1D::new(-3.3, 0.03, 300).unwrap();
        let f: Vec<C64> =
            grid.points().map(|x| C64::new((-(x - 1.0).powi(2)).exp(), x.sin() * (-x * x).exp())).collect();
        let spec = fourier1(&f, &grid, 0.7).unwrap();
        let back = inverse_fourier1(&spec, &grid, 0.7).unwrap();
        let err = back.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        // a shifted Gaussian picks up the phase exp(-i k x_c / hbar)
        let g: Vec<C64> = grid.points().map(|x| C64::new((-4.0 * (x - 1.0).powi(2)).exp(), 0.0)).collect();
        let spec = fourier1(&g, &grid, 0.7).unwrap();
        for (m, v) in spec.values.iter().enumerate() {
            let k = spec.grid.x(m);
            let exact = C64::from_polar(
                (PI / 4.0 / (2.0 * PI * 0.7)).sqrt() * (-k * k / (16.0 * 0.49)).exp(),
                -k / 0.7,
            );
            assert!((v - exact).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn convolve1_delta_translates() {
        let grid = Grid1D::centered(128, 0.1).unwrap();
        let c = grid.center_index();
        let mut delta = vec![0.0; 128];
        delta[c + 5] = 1.0 / grid.dx();
        let g: Vec<f64> = grid.points().map(|x| (-x * x).exp()).collect();
        let out = convolve1(&delta, &g, &grid).unwrap();
        for i in 5..128 {
            assert!((out[i] - g[i - 5]).abs() < 1e-12);
        }
    }
}
