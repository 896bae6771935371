//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("multiplication table violates group axioms: {0}")]
    InvalidTable(String),
    #[error("designated element is not central in the parent group")]
    NonCentralElement,
    #[error("designated element has infinite order (or order above the cap) in the parent group")]
    ElementInfiniteOrder,
    #[error("operation requires a finite group")]
    InfiniteGroup,
    #[error("group order exceeds the configured cap of {0}")]
    OrderCapExceeded(u64),
    #[error("element does not belong to the expected group")]
    GroupMismatch,
    #[error("not a homomorphism: images of {0} violate multiplicativity")]
    NotAHomomorphism(String),
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("scalar is not a unit")]
    NotAUnit,
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial is not irreducible over the base field")]
    NotIrreducible,
    #[error("operands belong to different rings or groups")]
    Mismatch,

    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("XY != I: the pair is not a one-sided unit pair")]
    NotOneSidedPair,
    #[error("unsupported group for linear solving: {0}")]
    UnsupportedGroup(String),
    #[error("search budget exceeded (needed {needed}, budget {budget})")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("matrix is not upper unitriangular")]
    NotUnitriangular,
    #[error("Z*Y is not congruent to I mod p")]
    NotCongruentModP,
    #[error("Z*Y != I: Z is not a left inverse of Y")]
    NotLeftInverse,
    #[error("matrix violates the required block shape at block ({0},{1})")]
    ShapeViolation(usize, usize),

    #[error("the base group is not abelian")]
    NonAbelianBase,
    #[error("endomorphism is not basic: image of the base group leaves the base group")]
    NotBasic,
    #[error("endomorphism is not surjective")]
    NotSurjective,

    #[error("alphabet is not a vector space over a prime field")]
    NotLinearAlphabet,
    #[error("invalid alphabet endomorphism: entry ({0},{1}) violates the order congruence")]
    InvalidAlphabetEndo(usize, usize),

    #[error("no base local embedding available: {0}")]
    BaseEmbeddingUnavailable(String),

    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    UsageError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
