use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frame has rank below its column count")]
    RankDeficient,
    #[error("frame is not isotropic (defect {0:.3e})")]
    NotLagrangian(f64),
    #[error("subspaces are not transversal (separation {0:.3e})")]
    NotTransversal(f64),
    #[error("subspace meets the chart complement")]
    NotInChart,
    #[error("no transversal complement among {0} candidates")]
    SearchExhausted(usize),
    #[error("no chart covers the stencil around t = {0}")]
    ChartFailure(f64),
    #[error("curve is not regular at t = {0}")]
    NotRegular(f64),
    #[error("curve is not monotone")]
    NotMonotone,
    #[error("curve endpoint t = {0} lies on the train")]
    EndpointOnTrain(f64),
    #[error("no chart covers the curve near t = {0} after maximal refinement")]
    SubdivisionFailure(f64),
    #[error("endpoint subspace meets the initial subspace (dimension {0})")]
    DegenerateEndpoint(usize),
    #[error("chart-difference index {chart_sum} disagrees with pair-index sum {pair_sum}")]
    IndexMismatch { chart_sum: i64, pair_sum: i64 },
    #[error("doubled index {0} is odd")]
    Parity(i64),
    #[error("constraint differential is not surjective")]
    RankDrop,
    #[error("subspace has dimension {found}, expected {expected}")]
    DimensionDefect { expected: usize, found: usize },
    #[error("Hessian on the constraint kernel is degenerate at parameter {0}")]
    EndpointDegenerate(f64),
    #[error("Newton iteration did not converge (residual {0:.3e})")]
    NewtonFailure(f64),
    #[error("state norm exceeded the cap at t = {0}")]
    BlowUp(f64),
    #[error("Hamiltonian vector field is tangent to the fiber")]
    TangentFiber,
    #[error("reduction needs n >= 2; the quotient is trivial for n = 1")]
    TrivialQuotient,
    #[error("reduction refused: {0}")]
    ReductionRefused(String),
}

impl Error {
    /// True for failures caused by the caller's input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::TrivialQuotient)
    }
}
