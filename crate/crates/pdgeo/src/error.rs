use thiserror::Error as ThisError;

fn epsilon_hint(fit: &Option<f64>) -> String {
    match fit {
        Some(eps) => format!("; the cap admits epsilon >= {eps:.6e} at this d_X"),
        None => String::new(),
    }
}

/// Errors produced by the geometry kernels and the algorithm drivers.
#[derive(Debug, Clone, ThisError)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix dimension {0} is not supported (need n >= 2)")]
    BadDimension(usize),

    #[error("matrix is not positive definite: min eigenvalue {min_eig:e}, max eigenvalue {max_eig:e}")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    EigDidNotConverge { sweeps: usize, off: f64 },

    #[error("matrix is not a rotation: {0}")]
    NotRotation(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty point set")]
    EmptyInput,

    #[error("numeric overflow in {0}")]
    Overflow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("direction grid needs {cells} cells, over the cap {cap}{}", epsilon_hint(epsilon_fit))]
    GridCap {
        cells: u128,
        cap: usize,
        epsilon_fit: Option<f64>,
    },

    #[error("{n_points} points exceed the constraint-generation cap {cap}; thin the dataset or raise the cap")]
    TooManyPoints { n_points: usize, cap: usize },

    #[error("solver stopped after {iterations} iterations with max violation {best_violation:e}")]
    Solver {
        iterations: usize,
        best_violation: f64,
    },
}
