use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operands live on different domains")]
    DomainMismatch,
    #[error("integrability exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error("threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("budget must lie in [0, measure(domain)]")]
    BadBudget,
    #[error("invalid rational literal: {0}")]
    BadRational(String),
    #[error("value is not finite")]
    NonFiniteValue,
    #[error("invalid domain: left endpoint must be below right endpoint")]
    BadDomain,
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("invalid subset: {0}")]
    BadSubset(String),
    #[error("unknown gallery family: {0}")]
    UnknownFamily(String),
    #[error("families are calibrated to different exponents")]
    ExponentMismatch,
    #[error("family has no limit candidate")]
    MissingLimit,
    #[error("family has no witness sets")]
    MissingWitness,
    #[error("horizon exhausted before index {0} could be extracted")]
    HorizonExhausted(u32),
    #[error("sequence is not certified Cauchy at this horizon")]
    NotCauchy,
    #[error("no breaking pair found for index {0}")]
    NoBreakingPair(u32),
    #[error("cfl condition violated: dt = {dt}, bound = {bound}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("negative density produced by a step")]
    NegativeDensity,
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("reference density leaves [{lo}, {hi}] on some cell")]
    ReferenceOutOfRange { lo: f64, hi: f64 },
    #[error("lemma constants degenerate near rho = {rho}, rho_bar = {rho_bar}")]
    DegenerateConstants { rho: f64, rho_bar: f64 },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("family table does not cover index {0}")]
    TableGap(u32),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
