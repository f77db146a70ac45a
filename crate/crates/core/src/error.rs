use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin {0} is not a non-negative half-integer")]
    InvalidSpin(f64),
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("matrix is not Hermitian (relative defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("level {index} is degenerate; use block_rabi for degenerate clusters")]
    DegenerateLevel { index: usize },
    #[error("cluster has dimension {found}, expected {expected}")]
    ClusterSize { expected: String, found: usize },
    #[error("doublet matches neither irrep; C3 phases (units of pi) {phases:?}")]
    UnclassifiedDoublet { phases: Vec<f64> },
    #[error("drive amplitude is zero")]
    ZeroDrive,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("doublet tracking failed: {0}")]
    DoubletTracking(String),
    #[error("doublet not isolated: gap {gap:e} Hz vs perturbation scale {scale:e} Hz")]
    DoubletNotIsolated { gap: f64, scale: f64 },
    #[error("effective form does not fit the projected block (residual {residual:e} Hz > {threshold:e} Hz)")]
    FormMismatch { residual: f64, threshold: f64 },
    #[error("extracted transverse hyperfine is zero; cannot calibrate")]
    ZeroExtraction,
    #[error("scan grid is empty")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
