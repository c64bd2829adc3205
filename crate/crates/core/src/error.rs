use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid sizes must be powers of two, at least 8.
    #[error("grid size {0} is not a power of two >= 8")]
    GridSize(usize),

    /// The loop comes too close to the origin to be treated as a loop in the punctured plane.
    #[error("collision guard: min modulus {min_modulus:e} <= eps_collision {eps:e}")]
    Collision { min_modulus: f64, eps: f64 },

    /// The lift is not strictly increasing with slope above the configured floor.
    #[error("not a diffeomorphism: min slope {min_slope:e} <= delta_mono {delta:e}")]
    NotDiffeomorphism { min_slope: f64, delta: f64 },

    /// Adjacent refined samples turn by half a revolution or more.
    #[error("under-resolved loop: angular step {step:.6} rad between adjacent refined samples")]
    Resolution { step: f64 },

    #[error("root finder did not converge for target {target}: residual {residual:e}")]
    NoConvergence { target: f64, residual: f64 },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid file contents: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Guard violations: the input left the open domain (punctured plane or diffeomorphism group).
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::Collision { .. } | Error::NotDiffeomorphism { .. }
        )
    }
}
