use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("DimensionMismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("NonFiniteInput: matrix contains NaN or infinite entries")]
    NonFiniteInput,
    #[error("NotHermitian: hermiticity defect {defect:e} exceeds {limit:e}")]
    NotHermitian { defect: f64, limit: f64 },
    #[error("NotUnitaryDiagonal: {0}")]
    NotUnitaryDiagonal(String),
    #[error("SingularShift: shifted system stayed singular after perturbation")]
    SingularShift,
    #[error("invalid solver argument: {0}")]
    InvalidSolverArgument(String),
    #[error("DegenerateProblem: the square-root argument has no quadratic or linear part")]
    DegenerateProblem,
    #[error("NoBoundStateBranch: neither branch gives Re(tau') < 0 (tau' = {plus} or {minus})")]
    NoBoundStateBranch { plus: String, minus: String },
    #[error("NonAffineEnergy: secant failed to converge for level {level}; supply an affine energy dependence or a better starting guess")]
    NonAffineEnergy { level: usize },
    #[error("invalid NU problem: {0}")]
    InvalidProblem(String),
    #[error("UnresolvableLevels: {requested} levels requested, at most {limit} resolvable")]
    UnresolvableLevels { requested: usize, limit: usize },
}
