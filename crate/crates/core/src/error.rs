use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a polytope description was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidPolytope {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("facet {facet}: normal has {found} components, expected {expected}")]
    DimensionMismatch {
        facet: usize,
        expected: usize,
        found: usize,
    },
    #[error("facet {facet}: zero normal")]
    ZeroNormal { facet: usize },
    #[error("facet {facet}: invalid lambda: {reason}")]
    BadLambda { facet: usize, reason: String },
    #[error("polytope is unbounded (nontrivial recession cone)")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("facet {facet} is redundant (touches the polytope in {contacts} vertices)")]
    RedundantFacet { facet: usize, contacts: usize },
    #[error("need more facets than dimensions (d = {facets}, n = {dim})")]
    TooFewFacets { facets: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid polytope: {0}")]
    InvalidPolytope(#[from] InvalidPolytope),
    #[error("{context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("point outside the open domain: component {index} = {value:e}")]
    BoundaryDomain { index: usize, value: f64 },
    #[error("matrix is not positive definite (pivot {pivot:e}, threshold {threshold:e})")]
    NotPositiveDefinite { pivot: f64, threshold: f64 },
    #[error("polytope is not Delzant: {0}")]
    NotDelzant(String),
    #[error("point is off the momentum level set (residual {residual:e})")]
    OffLevelSet { residual: f64 },
    #[error("facet system is inconsistent (defect {defect:e})")]
    InconsistentSystem { defect: f64 },
    #[error("face normals are linearly dependent")]
    DependentNormals,
    #[error("point is not stable: {0}")]
    Unstable(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
}
