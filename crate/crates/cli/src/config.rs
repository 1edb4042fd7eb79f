use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hodge_rsm::covering::{decaying_weight, weight_from_radius, RadiusField, WeightField};
use hodge_rsm::hodge::DecompositionMode;
use hodge_rsm::{ManifoldKind, SimplicialManifold, WorkspaceOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    Path { path: PathBuf },
    Generator { kind: String, resolution: usize, #[serde(default)] distortion: f64 },
}

impl MeshSource {
    pub fn load(&self) -> Result<SimplicialManifold> {
        match self {
            MeshSource::Path { path } => {
                hodge_rsm::load_mesh(path).with_context(|| format!("loading mesh {}", path.display()))
            }
            MeshSource::Generator { kind, resolution, distortion } => {
                let kind: ManifoldKind = kind.parse()?;
                Ok(hodge_rsm::generate_test_manifold(kind, *resolution, *distortion)?)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            MeshSource::Path { path } => path.display().to_string(),
            MeshSource::Generator { kind, resolution, distortion } if *distortion != 0.0 => {
                format!("{kind}({resolution}, {distortion})")
            }
            MeshSource::Generator { kind, resolution, .. } => format!("{kind}({resolution})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant,
    /// R^{−2k}.
    RadiusPower { k: u32 },
    /// (1 + dist(base, ·))^{−q}.
    Decaying { base: usize, q: f64 },
}

impl WeightSpec {
    pub fn build(&self, m: &SimplicialManifold, rf: &RadiusField) -> Result<WeightField> {
        Ok(match self {
            WeightSpec::Constant => WeightField::constant(m.num_vertices()),
            WeightSpec::RadiusPower { k } => weight_from_radius(rf, *k),
            WeightSpec::Decaying { base, q } => {
                if *base >= m.num_vertices() {
                    bail!("weight base vertex {base} out of range ({} vertices)", m.num_vertices());
                }
                decaying_weight(m, *base, *q)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub epsilon: f64,
    pub divisor: f64,
    pub r: f64,
    pub s: f64,
    /// None picks the smallest step count reaching s.
    pub steps: Option<usize>,
    pub weight: WeightSpec,
    pub alpha: WeightSpec,
    pub degrees: Vec<usize>,
    pub harmonic_tol: f64,
    pub eigen_count: usize,
    pub bounded_radius: Option<bool>,
    pub neumann_series: bool,
    pub mode: DecompositionMode,
    pub weak: bool,
    /// Random test forms per degree.
    pub forms: usize,
    pub czi_samples: usize,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshSource::Generator { kind: "flat_torus".into(), resolution: 16, distortion: 0.0 },
            epsilon: 0.1,
            divisor: 120.0,
            r: 1.5,
            s: 2.0,
            steps: None,
            weight: WeightSpec::Constant,
            alpha: WeightSpec::Constant,
            degrees: vec![0, 1],
            harmonic_tol: 1e-8,
            eigen_count: 6,
            bounded_radius: None,
            neumann_series: false,
            mode: DecompositionMode::Laplacian,
            weak: true,
            forms: 3,
            czi_samples: 50,
            output: PathBuf::from("hodge-rsm-out"),
            seed: 1,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
    pub degrees: Vec<usize>,
    pub mode: Option<DecompositionMode>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub harmonic_tol: Option<f64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Defaults, then the file (if any), then the overrides.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(x) = overrides.epsilon {
            cfg.epsilon = x;
        }
        if let Some(x) = overrides.r {
            cfg.r = x;
        }
        if !overrides.degrees.is_empty() {
            cfg.degrees = overrides.degrees.clone();
        }
        if let Some(x) = overrides.mode {
            cfg.mode = x;
        }
        if let Some(x) = overrides.seed {
            cfg.seed = x;
        }
        if let Some(x) = &overrides.output {
            cfg.output = x.clone();
        }
        if let Some(x) = overrides.harmonic_tol {
            cfg.harmonic_tol = x;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            bail!("epsilon must lie in (0, 1), got {}", self.epsilon);
        }
        if !(self.r > 1.0) || !self.r.is_finite() {
            bail!("r must be finite and > 1, got {}", self.r);
        }
        if !(self.s >= 2.0) {
            bail!("s must be ≥ 2, got {}", self.s);
        }
        if !(self.harmonic_tol > 0.0) {
            bail!("harmonic_tol must be > 0");
        }
        if !(self.divisor > 0.0) {
            bail!("divisor must be > 0");
        }
        Ok(())
    }

    pub fn workspace_options(&self) -> WorkspaceOptions {
        WorkspaceOptions {
            epsilon: self.epsilon,
            divisor: self.divisor,
            harmonic_tol: self.harmonic_tol,
            eigen_count: self.eigen_count,
            bounded_radius: self.bounded_radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_cli_then_file_then_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"epsilon": 0.2, "r": 1.4, "seed": 9}"#).unwrap();
        let o = Overrides { r: Some(1.3), ..Default::default() };
        let cfg = RunConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!((cfg.epsilon, cfg.r, cfg.seed), (0.2, 1.3, 9));
        assert_eq!(cfg.degrees, vec![0, 1]);
    }

    #[test]
    fn rejects_bad_values_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"epsilon": 1.5}"#).unwrap();
        assert!(RunConfig::resolve(Some(&path), &Overrides::default()).is_err());
        std::fs::write(&path, r#"{"epsilonn": 0.1}"#).unwrap();
        assert!(RunConfig::resolve(Some(&path), &Overrides::default()).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig { weight: WeightSpec::Decaying { base: 3, q: 1.5 }, ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
