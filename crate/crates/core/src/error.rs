use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a simple parabolic germ: {0}")]
    NotSimpleParabolic(String),
    #[error("inconsistent rational data: {0}")]
    NotRational(String),
    #[error("series expansion cannot reach order {0}")]
    TruncationOverflow(usize),
    #[error("formal exp/log/pow needs constant term 1")]
    NonUnitLeadingTerm,
    #[error("valuation {found} below required {required}")]
    ValTooLow { required: usize, found: usize },
    #[error("zero leading divisor at index {0}")]
    ZeroDivisor(usize),
    #[error("B_alpha failed to raise the order (leading residue {0:e})")]
    OrderGainViolated(f64),
    #[error("valuation identity failed: {0}")]
    ValCheckFailed(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("Gamma has a pole at {0}")]
    PoleOfGamma(f64),
    #[error("entire series needs more terms: bound {bound:e} > tol {tol:e} at |z| = {radius}")]
    InsufficientTerms { bound: f64, tol: f64, radius: f64 },
    #[error("cancellation needs {needed} bits, only {available} available")]
    PrecisionBudgetExceeded { needed: u32, available: u32 },
    #[error("Laplace integral diverges: Re(z e^(i theta)) = {0} does not exceed the type bound")]
    DivergentLaplace(f64),
    #[error("path passes within {distance:.3e} of 2*pi*i*{lattice}")]
    PathTooCloseToLattice { lattice: i64, distance: f64 },
    #[error("path passes through the origin")]
    PathThroughOrigin,
    #[error("residua do not decay (fitted ratio {0})")]
    ConvergenceNotDetected(f64),
    #[error("panel refinement exhausted near s = {0}")]
    QuadratureStalled(f64),
    #[error("series tail {bound:e} exceeds tolerance {tol:e}")]
    TailNotBounded { bound: f64, tol: f64 },
    #[error("path endpoint lies on 2*pi*i*Z")]
    EndpointOnLattice,
    #[error("loop radius {0} below quadrature resolution")]
    LoopTooClose(f64),
    #[error("orbit left the domain after {0} steps")]
    OrbitEscapesDomain(usize),
    #[error("no asymptotic regime: smallest term {0:e}")]
    NoAsymptoticRegime(f64),
    #[error("Newton iteration diverged at {0}")]
    NewtonDiverged(String),
    #[error("Fourier mode {m} below noise floor {floor:e}")]
    NoiseFloorDominates { m: i64, floor: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
