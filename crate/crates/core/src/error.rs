use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("isometry is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { trace: f64 },
    #[error("matrix determinant {det} is not 1")]
    BadDeterminant { det: f64 },
    #[error("ideal points coincide")]
    CoincidentPoints,
    #[error("geodesics share an ideal endpoint")]
    AsymptoticGeodesics,
    #[error("geodesics intersect")]
    IntersectingGeodesics,
    #[error("degenerate right-angled pentagon: sinh(a)·sinh(b) = {product} <= 1")]
    DegeneratePentagon { product: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid surface spec: {0}")]
    Spec(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("uncertified Dirichlet domain: {0}")]
    Uncertified(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error(
        "covering homomorphism is not surjective: image has order {image_order} in Z/{modulus}"
    )]
    DisconnectedCover { image_order: u64, modulus: u64 },
    #[error("nothing found up to {0}")]
    NotFound(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("insufficient cutoff: {0}")]
    InsufficientCutoff(String),
    #[error("reconstruction inconsistent: {0}")]
    Inconsistent(String),
    #[error("surface failed validation: {0}")]
    InvalidSurface(String),
}

pub type Result<T> = std::result::Result<T, Error>;
