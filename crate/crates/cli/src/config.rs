//! Run configuration: one TOML file with `[model]`, `[grid]`, `[solver]`,
//! `[simulate]` and `[output]` sections.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lrfput::catalog::ModelConfig;
use lrfput::solver::Method;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-length of the periodic domain `[−L, L)`.
    #[serde(rename = "L", alias = "half_length")]
    pub half_length: f64,
    /// Number of grid points, a power of two.
    #[serde(rename = "N", alias = "points")]
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_length: 40.0, points: 2048 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub eps: f64,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    /// Replaces the certified working σ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Cross-check the solution with the other method.
    pub oracle: bool,
    /// Largest accepted `H¹` residual.
    pub residual_limit: f64,
    /// Largest accepted disagreement with the oracle.
    pub oracle_limit: f64,
    /// Sweep check: slope within 25% of this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_slope: Option<f64>,
}

fn default_eps_list() -> Vec<f64> {
    vec![0.4, 0.28, 0.2, 0.14, 0.1]
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            eps_list: default_eps_list(),
            sigma: None,
            tol: 1e-12,
            max_iter: 300,
            method: Method::Contraction,
            oracle: true,
            residual_limit: 1e-8,
            oracle_limit: 1e-6,
            expected_slope: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    #[serde(rename = "J", alias = "sites")]
    pub sites: usize,
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force_range: Option<usize>,
    pub checkpoint_every: f64,
    /// A solution document written by `solve`; solved inline when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { sites: 4096, t_final: 200.0, dt: None, force_range: None, checkpoint_every: 1.0, solution: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Points on the λ(k) curve.
    pub curve_points: usize,
    pub seed: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), curve_points: 801, seed: 0 }
    }
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub eps: Option<f64>,
    pub sigma: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(out) = &overrides.out {
            config.output.dir = out.clone();
        }
        if let Some(eps) = overrides.eps {
            config.solver.eps = eps;
        }
        if let Some(sigma) = overrides.sigma {
            config.solver.sigma = Some(sigma);
        }
        if let Some(solution) = &config.simulate.solution {
            if solution.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.simulate.solution = Some(base.join(solution));
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        if !(s.eps >= 0.0 && s.eps.is_finite()) {
            bail!("solver.eps = {} must be a non-negative number", s.eps);
        }
        if s.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            bail!("solver.eps_list entries must be positive");
        }
        if let Some(sigma) = s.sigma {
            if !(sigma > 0.0 && sigma <= 2.0) {
                bail!("sigma = {sigma} must lie in (0, 2]");
            }
        }
        if !(s.tol > 0.0) || s.max_iter == 0 {
            bail!("solver.tol must be positive and solver.max_iter at least 1");
        }
        let sim = &self.simulate;
        if !(sim.t_final > 0.0) || !(sim.checkpoint_every > 0.0) || sim.sites < 16 {
            bail!("simulate needs T > 0, checkpoint_every > 0 and J ≥ 16");
        }
        if self.output.curve_points < 2 {
            bail!("output.curve_points must be at least 2");
        }
        lrfput::spectral::Grid::new(self.grid.half_length, self.grid.points)?;
        self.model.build()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, without the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("[model]\nfamily = \"calogero_moser\"\na = 4.0\n");
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.solver.eps, 0.1);
        assert_eq!(c.simulate.sites, 4096);
        c.validate().unwrap();
    }

    #[test]
    fn grid_keys_and_aliases() {
        let a = parse("[model]\nfamily = \"calogero_moser\"\na = 4.0\n[grid]\nL = 30.0\nN = 1024\n");
        let b = parse("[model]\nfamily = \"calogero_moser\"\na = 4.0\n[grid]\nhalf_length = 30.0\npoints = 1024\n");
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[model]\nfamily = \"calogero_moser\"\na = 4.0\n[grid]\nsize = 3\n").is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let mut c = parse("[model]\nfamily = \"nnn\"\ng = 1.0\nbeta1 = 1.0\nbeta2 = 0.0\n");
        let h = c.hash();
        assert_eq!(h.len(), 64);
        c.output.dir = PathBuf::from("elsewhere");
        assert_eq!(c.hash(), h);
        c.solver.eps = 0.2;
        assert_ne!(c.hash(), h);
    }

    #[test]
    fn invalid_sections_fail_validation() {
        let mut c = parse("[model]\nfamily = \"calogero_moser\"\na = 4.0\n");
        c.grid.points = 1000;
        assert!(c.validate().is_err());
        let mut c = parse("[model]\nfamily = \"calogero_moser\"\na = 4.0\n");
        c.solver.sigma = Some(3.0);
        assert!(c.validate().is_err());
        let c = parse("[model]\nfamily = \"calogero_moser\"\na = 2.5\n");
        assert!(c.validate().is_err());
    }
}
