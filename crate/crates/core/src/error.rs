use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("simplex {simplex} references vertex {vertex}, but the mesh has {count} vertices")]
    IndexOutOfRange {
        simplex: usize,
        vertex: usize,
        count: usize,
    },

    #[error("simplex {simplex} is degenerate (measure {measure:e})")]
    DegenerateSimplex { simplex: usize, measure: f64 },

    #[error("vertex {0} is not referenced by any simplex")]
    UnreferencedVertex(usize),

    #[error("boundary facets do not form a closed complex")]
    OpenBoundary,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("quadrature point of simplex {simplex} in subdomain {subdomain} lies in no subdomain")]
    ZeroCoverage { subdomain: usize, simplex: usize },

    #[error("negative adjusted volume {value:e} on simplex {simplex}")]
    NegativeVolume { simplex: usize, value: f64 },

    #[error("singular system of size {size} (numerical rank about {rank})")]
    Singular { size: usize, rank: usize },

    #[error("infeasible constraints (residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("zero lumped mass at global vertex {0}")]
    ZeroMass(usize),

    #[error("low-order derivative coupling is only discretized in 1D, got d = {0}")]
    LowOrderDimension(usize),

    #[error("subdomains do not overlap")]
    EmptyOverlap,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
