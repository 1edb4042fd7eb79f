use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::covering::{partition_of_unity, radius_field, vitali_cover, AdmissibleCovering, Partition, RadiusField, DEFAULT_DIVISOR};
use crate::dec::Dec;
use crate::error::{HodgeError, Result};
use crate::local::LocalSolver;
use crate::mesh::SimplicialManifold;
use crate::spectral::{spectrum_with_tol, SpectrumReport, DEFAULT_HARMONIC_TOL};

/// Radius field is "bounded below" when min R ≥ this fraction of max R.
pub const BOUNDED_RADIUS_RATIO: f64 = 0.25;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WorkspaceOptions {
    pub epsilon: f64,
    pub divisor: f64,
    /// Relative harmonic threshold.
    pub harmonic_tol: f64,
    /// Eigenpairs computed per degree (raised to the rank count + 3 if smaller).
    pub eigen_count: usize,
    /// Forces the bounded-radius flag instead of measuring it.
    #[serde(default)]
    pub bounded_radius: Option<bool>,
}

impl Default for WorkspaceOptions {
    fn default() -> Self {
        WorkspaceOptions { epsilon: 0.1, divisor: DEFAULT_DIVISOR, harmonic_tol: DEFAULT_HARMONIC_TOL, eigen_count: 6, bounded_radius: None }
    }
}

/// A mesh with its operators, covering and lazily built per-degree solvers.
pub struct Workspace {
    dec: Dec,
    radius: RadiusField,
    covering: AdmissibleCovering,
    options: WorkspaceOptions,
    solvers: Vec<OnceLock<LocalSolver>>,
    spectra: Vec<OnceLock<SpectrumReport>>,
}

impl Workspace {
    pub fn new(mesh: SimplicialManifold, options: WorkspaceOptions) -> Result<Self> {
        let radius = radius_field(&mesh, options.epsilon, options.divisor)?;
        let covering = vitali_cover(&mesh, &radius)?;
        Self::from_parts(mesh, radius, covering, options)
    }

    /// From a given radius field and covering; builds the partition if absent.
    pub fn from_parts(
        mesh: SimplicialManifold,
        radius: RadiusField,
        mut covering: AdmissibleCovering,
        options: WorkspaceOptions,
    ) -> Result<Self> {
        if covering.partition.is_none() {
            partition_of_unity(&mesh, &mut covering)?;
        }
        let n = mesh.dim();
        let dec = Dec::new(Arc::new(mesh));
        Ok(Workspace {
            dec,
            radius,
            covering,
            options,
            solvers: (0..=n).map(|_| OnceLock::new()).collect(),
            spectra: (0..=n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn dec(&self) -> &Dec {
        &self.dec
    }
    pub fn mesh(&self) -> &SimplicialManifold {
        self.dec.mesh()
    }
    pub fn dim(&self) -> usize {
        self.dec.dim()
    }
    pub fn radius(&self) -> &RadiusField {
        &self.radius
    }
    pub fn covering(&self) -> &AdmissibleCovering {
        &self.covering
    }
    pub fn partition(&self) -> &Partition {
        self.covering.partition.as_ref().expect("partition built on construction")
    }
    pub fn options(&self) -> &WorkspaceOptions {
        &self.options
    }

    /// min R ≥ 0.25 max R, unless overridden in the options.
    pub fn bounded_radius(&self) -> bool {
        self.options.bounded_radius.unwrap_or_else(|| self.radius.min() >= BOUNDED_RADIUS_RATIO * self.radius.max())
    }

    fn check_degree(&self, p: usize) -> Result<()> {
        if p > self.dim() {
            return Err(HodgeError::Domain(format!("degree {p} exceeds dimension {}", self.dim())));
        }
        Ok(())
    }

    pub fn local_solver(&self, p: usize) -> Result<&LocalSolver> {
        self.check_degree(p)?;
        if let Some(s) = self.solvers[p].get() {
            return Ok(s);
        }
        let solver = LocalSolver::new(&self.dec, &self.covering, p)?;
        Ok(self.solvers[p].get_or_init(|| solver))
    }

    pub fn spectrum(&self, p: usize) -> Result<&SpectrumReport> {
        self.check_degree(p)?;
        if let Some(s) = self.spectra[p].get() {
            return Ok(s);
        }
        let report = spectrum_with_tol(&self.dec, p, self.options.eigen_count, self.options.harmonic_tol)?;
        Ok(self.spectra[p].get_or_init(|| report))
    }
}
