//! Exact computer algebra for supercurves of dimension 1|q over a thick
//! superpoint, with reduced space the projective line.
//!
//! The crate provides Grassmann algebras over a finite-dimensional local base,
//! rational superfunctions with exact Laurent expansions, Berezinians and
//! Berezin residues, truncated repartition cohomology with its Serre duality
//! pairing, Cartier divisors, and the Abel map. Everything is computed over
//! the Gaussian rationals, so all identities are checked by exact equality.

pub mod scalars;
pub mod superalgebra;
pub mod superfunction;
pub mod superlinalg;
pub mod berezin;
pub mod curve;
pub mod divisor;
pub mod cli;

pub use scalars::{GaussianRational, LogScalar};
pub use superalgebra::{BaseAlgebra, SuperElement};
// pub use superfunction::{PointP1, SuperRationalFunction};
// pub use superlinalg::{BModuleRep, SuperMatrix};
// pub use berezin::{BerSection, DifferentialOperator, LocalAutomorphism};
pub use curve::{BundleData, DualityReport, H1Space, SectionSpace, SuperCurve, TruncationBounds};
pub use divisor::{AbelCheck, AbelImage, CartierDivisor};

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not an even unit: {0}")]
    NotAUnit(String),
    #[error("theta index {0} out of range (q = {1})")]
    ThetaIndexOutOfRange(usize, usize),
    #[error("not an invertible even meromorphic function: {0}")]
    NotInKtimes(String),
    #[error("matrix block has wrong parity at ({0},{1})")]
    ParityViolation(usize, usize),
    #[error("supermatrix D block is not invertible")]
    SingularOddBlock,
    #[error("map is not B-linear")]
    NotBLinear,
    #[error("invalid base algebra: {0}")]
    InvalidBaseAlgebra(String),
    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),
    #[error("truncation bounds unstable: {0}")]
    UnstableBounds(String),
    #[error("log branch point {0} lies in the working point set")]
    BranchPointInRegion(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
