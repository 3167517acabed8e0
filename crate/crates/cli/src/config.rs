//! Run configuration: flat `key = value` entries under bracketed sections,
//! read as TOML. Every key has a default matching the reference parameter
//! set (`a = 1`, `b = 5`, `V0 = 3`, `q0 = 3`, `σℓ = σp = 4`, `ħ = 1`).

use std::path::Path;

use num_complex::Complex64 as C64;
use phasequant::portrait::{Interval, PdmOscillator, PortraitContext};
use phasequant::window::{GaussianWindow, SqueezedWindow, WindowKind};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub window: WindowSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub traj: TrajSection,
    pub spectrum: SpectrumSection,
    pub fock: FockSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub a: f64,
    pub b: f64,
    pub m0: f64,
    pub l: f64,
    pub v0: f64,
    pub q0: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { a: 1.0, b: 5.0, m0: 1.0, l: 1.0, v0: 3.0, q0: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowChoice {
    Gaussian,
    Coherent,
    Squeezed,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub kind: WindowChoice,
    pub sigma_l: f64,
    pub sigma_p: f64,
    pub gamma: f64,
    pub hbar: f64,
    /// Oscillator length of coherent and squeezed windows and of the
    /// number basis.
    pub ell: f64,
    pub eta_re: f64,
    pub eta_im: f64,
}

impl Default for WindowSection {
    fn default() -> Self {
        Self {
            kind: WindowChoice::Gaussian,
            sigma_l: 4.0,
            sigma_p: 4.0,
            gamma: 0.0,
            hbar: 1.0,
            ell: 1.0,
            eta_re: 0.0,
            eta_im: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub q_min: f64,
    pub q_max: f64,
    pub q_nodes: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// Momentum nodes of the vector-field lattice.
    pub p_nodes: usize,
    /// Position nodes of the vector-field lattice.
    pub field_q_nodes: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { q_min: -1.0, q_max: 7.0, q_nodes: 801, p_min: -6.0, p_max: 6.0, p_nodes: 25, field_q_nodes: 33 }
    }
}

/// Parameter lists fanned out by the figure commands. An empty list means
/// "use the single value of the corresponding section".
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub sigma_p: Vec<f64>,
    /// Isotropic widths `σℓ = σp`.
    pub sigma: Vec<f64>,
    pub q0: Vec<f64>,
    pub energies: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { sigma_p: vec![3.0, 5.0, 10.0], sigma: vec![], q0: vec![3.0, 3.5, 5.0], energies: vec![0.5, 2.0, 3.5] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajSection {
    /// Starting positions; each start sits on the upper branch of the level
    /// set of the matching entry of `energy`, unless `p` is given.
    pub q: Vec<f64>,
    pub energy: Vec<f64>,
    pub p: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    /// Keep integrating after the particle is committed to a wall.
    pub follow_escape: bool,
}

impl Default for TrajSection {
    fn default() -> Self {
        Self { q: vec![3.0], energy: vec![2.0], p: vec![], dt: 1e-3, steps: 20_000, follow_escape: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub nodes: Vec<usize>,
    /// Grid margin beyond each wall, in units of `ħ/σp`.
    pub margin: f64,
    /// Eigenvalues written per grid (all when 0).
    pub count: usize,
    /// Interior weight above which an eigenvector counts as confined.
    pub confined: f64,
    /// Confined levels listed in the refinement table.
    pub levels: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { nodes: vec![256, 512, 1024], margin: 6.0, count: 0, confined: 0.99, levels: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockSection {
    pub n_max: usize,
    pub nodes: usize,
    pub widths: f64,
    /// Number states used to calibrate the closed form.
    pub n_cal: usize,
    /// Fail (exit 3) when no resolution of the closed form matches.
    pub require_calibration: bool,
    /// Raise `n_max` (and the node count with it) until the thermal tail of
    /// an isotropic window is below 1e-10.
    pub auto_cutoff: bool,
}

impl Default for FockSection {
    fn default() -> Self {
        Self { n_max: 64, nodes: 200, widths: 8.0, n_cal: 8, require_calibration: false, auto_cutoff: true }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// Builds every domain object once so that bad values surface before
    /// any output is written.
    pub fn validate(&self) -> Result<()> {
        self.context()?;
        self.window_kind()?;
        let g = &self.grid;
        if !(g.q_min < g.q_max) || !(g.p_min < g.p_max) {
            return Err(CliError::Config("grid bounds must satisfy min < max".into()));
        }
        if g.q_nodes < 2 || g.p_nodes < 2 || g.field_q_nodes < 2 {
            return Err(CliError::Config("grids need at least 2 nodes".into()));
        }
        if !(self.traj.dt > 0.0) || self.traj.steps == 0 {
            return Err(CliError::Config("traj needs dt > 0 and steps > 0".into()));
        }
        if self.traj.q.len() != self.traj.energy.len() && self.traj.q.len() != self.traj.p.len() {
            return Err(CliError::Config("traj.q needs one traj.energy or traj.p entry per start".into()));
        }
        if self.spectrum.nodes.is_empty() || !(0.0..=1.0).contains(&self.spectrum.confined) {
            return Err(CliError::Config("spectrum needs grid sizes and a confinement threshold in [0,1]".into()));
        }
        if self.fock.n_max == 0 || self.fock.n_cal == 0 || self.fock.nodes < 2 {
            return Err(CliError::Config("fock sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn interval(&self) -> Result<Interval> {
        Ok(Interval::new(self.model.a, self.model.b)?)
    }

    pub fn model(&self) -> Result<PdmOscillator> {
        let m = &self.model;
        Ok(PdmOscillator::new(m.m0, m.l, m.v0, m.q0, self.interval()?)?)
    }

    pub fn gaussian(&self) -> Result<GaussianWindow> {
        let w = &self.window;
        Ok(GaussianWindow::new(w.sigma_l, w.sigma_p, w.gamma, w.hbar)?)
    }

    pub fn context(&self) -> Result<PortraitContext> {
        Ok(PortraitContext::new(self.model()?, self.gaussian()?))
    }

    /// Window of the number-basis commands.
    pub fn window_kind(&self) -> Result<WindowKind> {
        let w = &self.window;
        Ok(match w.kind {
            WindowChoice::Gaussian => {
                let g = self.gaussian()?;
                if g.gamma() == 0.0 {
                    WindowKind::SeparableGaussian(g)
                } else {
                    WindowKind::NonSeparableGaussian(g)
                }
            }
            WindowChoice::Coherent => WindowKind::SeparableGaussian(GaussianWindow::coherent(w.ell, w.hbar)?),
            WindowChoice::Squeezed => {
                WindowKind::Squeezed(SqueezedWindow::new(w.ell, C64::new(w.eta_re, w.eta_im), w.hbar)?)
            }
        })
    }

    pub fn q0_list(&self) -> Vec<f64> {
        non_empty(&self.sweep.q0, self.model.q0)
    }

    pub fn sigma_p_list(&self) -> Vec<f64> {
        non_empty(&self.sweep.sigma_p, self.window.sigma_p)
    }

    pub fn sigma_list(&self) -> Vec<f64> {
        non_empty(&self.sweep.sigma, self.window.sigma_p)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.sweep.energies.clone()
    }

    /// Context with `q0` replaced.
    pub fn context_q0(&self, q0: f64) -> Result<PortraitContext> {
        let c = self.context()?;
        Ok(PortraitContext::new(c.model.with_q0(q0)?, c.window))
    }

    /// Context with isotropic widths `σℓ = σp = σ`.
    pub fn context_sigma(&self, sigma: f64) -> Result<PortraitContext> {
        let w = &self.window;
        Ok(PortraitContext::new(self.model()?, GaussianWindow::new(sigma, sigma, w.gamma, w.hbar)?))
    }

    /// Context with only `σp` replaced.
    pub fn context_sigma_p(&self, sigma_p: f64) -> Result<PortraitContext> {
        let w = &self.window;
        Ok(PortraitContext::new(self.model()?, GaussianWindow::new(w.sigma_l, sigma_p, w.gamma, w.hbar)?))
    }
}

fn non_empty(list: &[f64], single: f64) -> Vec<f64> {
    if list.is_empty() {
        vec![single]
    } else {
        list.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_reference_parameters() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.q0_list(), vec![3.0, 3.5, 5.0]);
        assert_eq!(c.sigma_list(), vec![4.0]);
    }

    #[test]
    fn sections_override_defaults() {
        let c = RunConfig::from_toml("[model]\nv0 = 0.0\n\n[sweep]\nsigma = [2.0, 4.0, 6.0]\n").unwrap();
        assert_eq!(c.model.v0, 0.0);
        assert_eq!(c.sigma_list(), vec![2.0, 4.0, 6.0]);
        assert_eq!(c.model.b, 5.0);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in [
            "[model]\nfoo = 1\n",
            "[model]\na = 6.0\n",
            "[window]\ngamma = 0.3\n",
            "[window]\nkind = \"wigner\"\n",
            "[grid]\nq_nodes = 1\n",
            "[traj]\nq = [1.0, 2.0]\nenergy = [1.0]\n",
            "not toml at all",
        ] {
            let e = RunConfig::from_toml(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn window_kinds() {
        let c = RunConfig::from_toml("[window]\nkind = \"squeezed\"\neta_im = 0.3\n").unwrap();
        assert!(matches!(c.window_kind().unwrap(), WindowKind::Squeezed(_)));
        let c = RunConfig::from_toml("[window]\ngamma = 0.1\n").unwrap();
        assert!(matches!(c.window_kind().unwrap(), WindowKind::NonSeparableGaussian(_)));
        let c = RunConfig::from_toml("[window]\nkind = \"coherent\"\n").unwrap();
        assert_eq!(c.window_kind().unwrap().as_gaussian().unwrap().sigma_l(), 2f64.sqrt());
    }
}
