use thiserror::Error;

#[derive(Debug, Error)]
pub enum HodgeError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-manifold mesh: facet {facet:?} is shared by {count} top simplices (expected 2)")]
    NonManifold { facet: Vec<usize>, count: usize },
    #[error("inconsistent orientation across facet {facet:?}")]
    InconsistentOrientation { facet: Vec<usize> },
    #[error("degenerate simplex {simplex}: volume {volume:e} below threshold {threshold:e}")]
    DegenerateSimplex { simplex: usize, volume: f64, threshold: f64 },
    #[error("mesh is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("unsupported dimension {0} (only 2 and 3)")]
    UnsupportedDimension(usize),
    #[error("resolution {0} outside [4, 256]")]
    ResolutionOutOfRange(usize),
    #[error("vertex {vertex} out of range ({count} vertices)")]
    InvalidVertex { vertex: usize, count: usize },
    #[error("degree mismatch: expected {expected}, got {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected} values for degree {degree}, got {found}")]
    LengthMismatch { degree: usize, expected: usize, found: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("coverage gap: vertex {vertex} lies in no covering ball")]
    CoverageGap { vertex: usize },
    #[error("matrix not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("eigensolver did not converge in {iterations} iterations")]
    EigenNoConvergence { iterations: usize },
    #[error("iterative solver stagnated at relative residual {residual:e} after {iterations} iterations")]
    Stagnation { residual: f64, iterations: usize },
    #[error("Neumann series diverges on ball {ball} (contraction {contraction:.3}); use a smaller epsilon")]
    NeumannDivergence { ball: usize, contraction: f64 },
    #[error("harmonic part too large (relative {relative:e}): project first")]
    ProjectFirst { relative: f64 },
    #[error("ball {ball}: {message}")]
    Ball { ball: usize, message: String },
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T, E = HodgeError> = std::result::Result<T, E>;
