//! Exact rank engine over prime fields: realizations of scheme specs,
//! interpolation matrices in P^n and on P^1 x P^1, and rank certificates.

mod field;
mod geometry;
mod matrix;
mod monomials;
mod p1p1;
mod quadric;
mod rows;
mod verify;

use thiserror::Error;

use crate::expected::ExpectedError;

pub use field::{is_prime, PrimeField, DEFAULT_PRIME, SECOND_PRIME};
pub use geometry::{
    chain_through, draw_generic, random_chain, random_cross, random_point, realize, realize_with,
    span_rank, Chain, ConcreteScheme, Cross, LineFrame, Point, Shape, DEFAULT_REDRAWS,
};
pub use matrix::Matrix;
pub use monomials::{Exps, MonomialBasis};
pub use p1p1::{p1p1_h0, p1p1_matrix, p1p1_special};
pub use quadric::{
    castelnuovo_check, compose_with_quadric, quadric_value, residual_zigzag_check, segre,
    CastelnuovoReport, ResidualZigzagReport,
};
pub use rows::{
    build_matrix, chain_embedded_rows, chain_line_rows, cross_rows, derivative_row,
    derivative_rows_oracle, embedded_point_row, fat_line_row_labels, fat_line_rows, line_rows,
    point_row, Row,
};
pub use verify::{
    matrix_shape, multi_prime_check, scheme_length, verify_maximal_rank, ConsensusReport,
    RankJob, RankReport, Verdict, SUSPECT_FLAG,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("{0} is not a prime below 2^32")]
    BadPrime(u64),
    #[error("degenerate after {redraws} redraws; the field is too small")]
    Degenerate { redraws: u32 },
    #[error("multiplicity {m} exceeds degree {d}")]
    MultiplicityExceedsDegree { m: u64, d: u64 },
    #[error("field of size {p} has too few scalars for degree {d}")]
    FieldTooSmall { p: u64, d: u64 },
    #[error("ambient dimension {n} < 3")]
    AmbientTooSmall { n: usize },
    #[error("frame lives in P^{frame}, expected P^{n}")]
    AmbientMismatch { frame: usize, n: usize },
    #[error("scheme has a zig-zag of length 1; canonicalize first")]
    NonCanonical,
    #[error("invalid bidegree ({a}, {b})")]
    InvalidBidegree { a: i64, b: i64 },
    #[error("invalid point scheme: {0}")]
    InvalidOmega(String),
    #[error("multi-prime check needs at least two distinct primes")]
    TooFewPrimes,
    #[error("{0}")]
    Scheme(String),
    #[error(transparent)]
    Expected(#[from] ExpectedError),
}

/// splitmix64 over a sequence of words; used to derive independent seeds
/// for retries, primes and scan cells.
pub fn mix_seed(words: &[u64]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &w in words {
        h ^= w;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut x = h;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = x ^ (x >> 31);
    }
    h
}
