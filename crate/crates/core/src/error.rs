use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth {requested} exceeds configured maximum {max}")]
    DepthOverflow { requested: usize, max: usize },
    #[error("invalid word {0:?}: letters must be 1 or 2")]
    InvalidWord(String),
    #[error("polyline needs at least {min} vertices, got {got}")]
    TooFewSegments { min: usize, got: usize },
    #[error("degenerate polyline: {0}")]
    DegeneratePolyline(String),
    #[error("radius {radius} too large: must stay below reach {reach}")]
    RadiusTooLarge { radius: f64, reach: f64 },
    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),
    #[error("infeasible geometry at word {word}: {reason}")]
    InfeasibleGeometry { word: String, reason: String },
    #[error("curve not transverse to disk plane after {retries} jitter retries")]
    NonTransverse { retries: usize },
    #[error("distortion product {product} exceeds budget {budget}")]
    BudgetExceeded { product: f64, budget: f64 },
    #[error("shrink needs m = {m} ({leaves:.3e} leaf tubes), beyond the enumeration cap of {cap} leaves")]
    ShrinkTooDeep { m: usize, leaves: f64, cap: usize },
    #[error("tube radius {radius:e} at word {word} is below floating-point resolution of its coordinates")]
    PrecisionExhausted { word: String, radius: f64 },
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),
    #[error("planted balls overlap: {0}")]
    Overlap(String),
    #[error("invalid surface family: {0}")]
    InvalidFamily(String),
    #[error("oracle size exceeded: {cells} cells, {members} members")]
    SizeExceeded { cells: usize, members: usize },
    #[error("solver did not converge after {iterations} iterations (best admissible value {best})")]
    NonConvergence { iterations: usize, best: f64 },
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
