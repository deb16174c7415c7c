use thiserror::Error;

/// Everything that can go wrong while building groups, charting strata,
/// finding zeros or synthesizing maps.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("group closure exceeded the cap of {cap} elements")]
    CapExceeded { cap: usize },
    #[error("generator {index} is not orthogonal (defect {defect:e})")]
    NotOrthogonal { index: usize, defect: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambiguous isotropy at {point:?}: {detail}")]
    AmbiguousIsotropy { point: Vec<f64>, detail: String },
    #[error("domain is empty")]
    EmptyDomain,
    #[error("orbit type H{type_id}: quotient component {component} has only {cells} cell(s) at delta {delta}")]
    ResolutionTooCoarse {
        type_id: usize,
        component: usize,
        cells: usize,
        delta: f64,
    },
    #[error("point {point:?} is not covered by the chart of orbit type H{type_id}")]
    OutsideChart { type_id: usize, point: Vec<f64> },
    #[error("point {point:?} is outside the map domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("the map does not preserve the fixed subspace of H{type_id} (defect {defect:e})")]
    NotInvariantSubspace { type_id: usize, defect: f64 },
    #[error("degenerate zero at {point:?}: |det| = {det:e} below the regularity floor; perturb the map or refine")]
    DegenerateZero { point: Vec<f64>, det: f64 },
    #[error("orbit type H{type_id}, component {component}: raw sign sum {sum} not divisible by |WH| = {weyl_order}")]
    DivisibilityViolation {
        type_id: usize,
        component: usize,
        sum: i64,
        weyl_order: usize,
    },
    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("oracle map vanishes at interval endpoint {at}")]
    ZeroAtEndpoint { at: f64 },
    #[error("oracle map too small on the contour at {point:?} (|g| = {norm:e})")]
    BoundaryTooClose { point: Vec<f64>, norm: f64 },
    #[error("contour step too coarse: angle increment {increment} rad")]
    StepTooCoarse { increment: f64 },
    #[error("no room for an atom: {detail}")]
    NoRoom { detail: String },
    #[error("domains overlap: {detail}")]
    Overlap { detail: String },
    #[error("no valid linearization radius around {point:?}")]
    NoValidRadius { point: Vec<f64> },
    #[error("not an otopy: zero set reaches the domain boundary near t = {t}, x = {point:?} (|h| = {norm:e})")]
    NotAnOtopy { t: f64, point: Vec<f64>, norm: f64 },
    #[error("unknown degree key H{type_id} alpha{component}")]
    InvalidKey { type_id: usize, component: usize },
    #[error("target not realizable: {detail}")]
    Unrealizable { detail: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
