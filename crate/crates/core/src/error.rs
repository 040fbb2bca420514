use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("degenerate geometry: emitters {i} and {j} coincide")]
    DegenerateGeometry { i: usize, j: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("site index {index} out of range for {n_sites} sites")]
    SiteIndexOutOfRange { index: usize, n_sites: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error(
        "steady state is not unique: second-smallest Liouvillian eigenvalue \
         magnitude {second:.3e} is below the uniqueness threshold {threshold:.3e}"
    )]
    NonUniqueSteadyState { second: f64, threshold: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error(
        "correlation trace too short: |g(T) - g_inf| = {deviation:.3e} at T = {duration}, \
         need roughly T >= {required:.1} to reach the coherent plateau"
    )]
    TraceTooShort {
        duration: f64,
        deviation: f64,
        required: f64,
    },

    #[error("no emission from the steady state: field correlation denominator is zero")]
    ZeroEmission,

    #[error("Hamiltonian does not conserve total excitation number (deviation {deviation:.3e})")]
    NotExcitationConserving { deviation: f64 },

    #[error(
        "Liouvillian eigenbasis is ill-conditioned (cond ~ {cond:.3e}); \
         eigenmode spectrum is unreliable"
    )]
    IllConditionedEigenbasis { cond: f64 },

    #[error("linear algebra error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
