use thiserror::Error;

/// Every failure the library can report.
///
/// Codes returned by [`Error::code`] are stable and used by the CLI's
/// machine-readable error output.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("chart {chart} undefined: |w_{chart}| below threshold")]
    ChartUndefined { chart: usize },
    #[error("|y| = {y_abs} does not exceed rho = {rho}")]
    OutsideDomain { y_abs: f64, rho: f64 },
    #[error("line passes within {distance:e} of a boundary sample")]
    NearIncidence { distance: f64 },
    #[error("{what} = {value} is not within guard of an integer")]
    RoundingGuard { what: &'static str, value: f64 },
    #[error("Laurent coefficient (k={k}, m={m}, n={n}) differs between routes by {diff:e}")]
    TruncationMismatch { k: usize, m: usize, n: usize, diff: f64 },
    #[error("negative sheet count {0}")]
    NegativeSheets(i64),
    #[error("|1 + y b| = {0:e} too small")]
    ResonantY(f64),
    #[error("root iteration did not converge")]
    NoConvergence,
    #[error("no rational part fits: {0}")]
    NoFit(String),
    #[error("grid of {nx}x{ny} nodes is too small for the stencil")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("y^-1 term of size {0:e} cannot be primitivized without a logarithm")]
    ResidueObstruction(f64),
    #[error("1/B expansion needs |omega| > 1.5 max|root(B)| ({0})")]
    BInversionDiverged(String),
    #[error("coefficient y^{n} outside stored range")]
    TruncationExceeded { n: i32 },
    #[error("base point omega invalid: {0}")]
    InvalidOmega(String),
    #[error("second x-derivative of G_1 vanishes on the test circle")]
    E2Degenerate,
    #[error("fiber discriminant {0:e} below threshold")]
    DegenerateFiber(f64),
    #[error("points coincide")]
    Coincident,
    #[error("quadrature refinement estimate {0:e} exceeds tolerance")]
    MeshTooCoarse(f64),
    #[error("Fredholm system numerically singular (condition {0:e})")]
    SingularFredholm(f64),
    #[error("form vanishes on the boundary")]
    ZeroOnBoundary,
    #[error("unknown oracle '{0}'")]
    UnknownOracle(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "E_INPUT",
            Error::Io(_) => "E_IO",
            Error::ChartUndefined { .. } => "E_CHART_UNDEFINED",
            Error::OutsideDomain { .. } => "E_OUTSIDE_DOMAIN",
            Error::NearIncidence { .. } => "E_NEAR_INCIDENCE",
            Error::RoundingGuard { .. } => "E_ROUNDING_GUARD",
            Error::TruncationMismatch { .. } => "E_TRUNCATION_MISMATCH",
            Error::NegativeSheets(_) => "E_NEGATIVE_SHEETS",
            Error::ResonantY(_) => "E_RESONANT_Y",
            Error::NoConvergence => "E_NO_CONVERGENCE",
            Error::NoFit(_) => "E_NO_FIT",
            Error::GridTooSmall { .. } => "E_GRID_TOO_SMALL",
            Error::ResidueObstruction(_) => "E_RESIDUE_OBSTRUCTION",
            Error::BInversionDiverged(_) => "E_B_INVERSION_DIVERGED",
            Error::TruncationExceeded { .. } => "E_TRUNCATION_EXCEEDED",
            Error::InvalidOmega(_) => "E_INVALID_OMEGA",
            Error::E2Degenerate => "E_E2_DEGENERATE",
            Error::DegenerateFiber(_) => "E_DEGENERATE_FIBER",
            Error::Coincident => "E_COINCIDENT",
            Error::MeshTooCoarse(_) => "E_MESH_TOO_COARSE",
            Error::SingularFredholm(_) => "E_SINGULAR_FREDHOLM",
            Error::ZeroOnBoundary => "E_ZERO_ON_BOUNDARY",
            Error::UnknownOracle(_) => "E_UNKNOWN_ORACLE",
        }
    }

    /// Validation failures are caller mistakes; everything else is numerical.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Io(_)
                | Error::UnknownOracle(_)
                | Error::InvalidOmega(_)
                | Error::GridTooSmall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
