use thiserror::Error;

/// Failures while reading user-supplied text (matrices, rationals, specs).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("not a rational number: {0:?}")]
    Rational(String),
    #[error("malformed matrix: {0}")]
    Matrix(String),
    #[error("malformed nonstationary spec: {0}")]
    Nonstationary(String),
    #[error("malformed polynomial: {0}")]
    Polynomial(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a dilation matrix: {0}")]
    NotDilation(String),
    #[error("matrix is not isotropic: {0}")]
    NotIsotropic(String),
    #[error("no positive definite solution of A X A^T = q^(2/d) X")]
    NoPositiveDefiniteSolution,
    #[error("solution space of A X A^T = q^(2/d) X has dimension {0} and does not contain the identity")]
    AmbiguousSolution(usize),
    #[error("could not rationalize the quadratic form: {0}")]
    RationalizationFailed(String),
    #[error("no factorization n = (A^T)^j (s + k) found for {point:?} within {bound} steps")]
    FactorizationGap { point: Vec<i64>, bound: usize },
    #[error("coset shift with denominator {0} needs roots of unity outside Q(i)")]
    UnsupportedShiftDenominator(String),
    #[error("G vanishes at the coset point 2*pi*{0}")]
    GVanishesAtCoset(String),
    #[error("synthesized mask is not 2*pi-periodic")]
    NonPeriodicMask,
    #[error("no sin-monomial correction cancels the degree-{0} jet")]
    UnderdeterminedCorrection(usize),
    #[error("condition failed: {0}")]
    ConditionFailed(String),
    #[error("normalized powers of A form a group of order {0}; only orders 1 and 2 are supported")]
    UnsupportedGroupOrder(String),
    #[error("no Strang-Fix order found up to degree {0}")]
    OrderExceedsBound(usize),
    #[error("order definitions disagree: plateau at {plateau}, graded at {graded}")]
    DefinitionMismatch { plateau: usize, graded: usize },
    #[error("kernel did not stabilize; dimensions per radius {0:?}")]
    NoStabilization(Vec<usize>),
    #[error("cascade diverges; level differences {0:?}")]
    Divergence(Vec<f64>),
    #[error("nonstationary specs have no cascade")]
    NonstationaryCascade,
}

pub type Result<T> = std::result::Result<T, Error>;
