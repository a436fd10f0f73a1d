//! Closed-form condition counts and the virtual-dimension bookkeeping.
//!
//! Every quantity here is computed with arbitrary-precision integers and
//! narrowed to a machine word only at the boundary, so intermediate binomials
//! never overflow. Divisions that must be exact are checked.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schemes::{OmegaSpec, SchemeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpectedError {
    #[error("ambient dimension n = {n} is below 2")]
    AmbientTooSmall { n: u64 },
    #[error("degree {d} is below the multiplicity {m}; use the rank engine instead")]
    BelowStableRange { m: u64, d: u64 },
    #[error("fat line oversaturates degree {d} (m = {m})")]
    Oversaturated { d: u64, m: u64 },
    #[error("non-integral intermediate in {0}")]
    Inexact(&'static str),
    #[error("zig-zag of length 1 is not canonical")]
    NonCanonicalZigzag,
    #[error("eps must be 0, 1 or 2, got {0}")]
    BadResidue(u64),
    #[error("value does not fit in 64 bits: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, ExpectedError>;

/// Bidegree `(a, b)` of a linear system on P^1 x P^1.
///
/// Negative entries are representable so that an overdrawn trace can be
/// reported; consumers reject them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bidegree {
    pub a: i64,
    pub b: i64,
}

impl Bidegree {
    pub fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    /// Returns the pair ordered so that `a <= b`.
    pub fn normalized(self) -> Self {
        if self.a <= self.b {
            self
        } else {
            Self { a: self.b, b: self.a }
        }
    }

    pub fn is_valid(self) -> bool {
        self.a >= 0 && self.b >= 0
    }
}

pub(crate) fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` as an `i64`; panics only if the value exceeds 63 bits.
pub fn binomial(n: u64, k: u64) -> u64 {
    narrow_u64(&binom(n, k)).expect("binomial overflow")
}

fn narrow_u64(x: &BigInt) -> Result<u64> {
    x.to_u64().ok_or_else(|| ExpectedError::Overflow(x.to_string()))
}

fn narrow_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| ExpectedError::Overflow(x.to_string()))
}

fn exact_div(num: &BigInt, den: &BigInt, what: &'static str) -> Result<BigInt> {
    let (q, r) = num.div_rem(den);
    if !r.is_zero() {
        return Err(ExpectedError::Inexact(what));
    }
    Ok(q)
}

/// Number of conditions imposed on degree-`d` forms of P^n by vanishing to
/// order `m` along a line.
pub fn conditions_fat_line(n: u64, m: u64, d: u64) -> Result<u64> {
    if n < 2 {
        return Err(ExpectedError::AmbientTooSmall { n });
    }
    if d < m {
        return Err(ExpectedError::BelowStableRange { m, d });
    }
    let (nb, mb, db) = (BigInt::from(n), BigInt::from(m), BigInt::from(d));
    let inner = &nb * &db + 2u32 * &nb + &mb - &mb * &nb - 1u32;
    let num = &mb * inner * binom(n + m - 2, m);
    let den = &nb * (&nb - 1u32);
    narrow_u64(&exact_div(&num, &den, "conditions_fat_line")?)
}

/// The P^3 specialization `c(d, m) = m(m+1)(3d+5-2m)/6`; zero for `m = 0`.
pub fn conditions_fat_line_p3(m: u64, d: u64) -> Result<u64> {
    if d < m {
        return Err(ExpectedError::BelowStableRange { m, d });
    }
    let (mb, db) = (BigInt::from(m), BigInt::from(d));
    let num = &mb * (&mb + 1u32) * (3u32 * db + 5u32 - 2u32 * &mb);
    narrow_u64(&exact_div(&num, &BigInt::from(6u32), "conditions_fat_line_p3")?)
}

/// `C(d+n, n)`, the dimension of degree-`d` forms on P^n.
pub fn hilbert_poly_pn(n: u64, d: u64) -> u64 {
    binomial(d + n, n)
}

/// The unique `(r, q)` with `C(d+3,3) = c(d,m) + r(d+1) + q` and `0 <= q <= d`.
pub fn split_r_q(d: u64, m: u64) -> Result<(u64, u64)> {
    let c = BigInt::from(conditions_fat_line_p3(m, d)?);
    let rest = binom(d + 3, 3) - c;
    if rest.is_negative() {
        return Err(ExpectedError::Oversaturated { d, m });
    }
    let (r, q) = rest.div_rem(&BigInt::from(d + 1));
    Ok((narrow_u64(&r)?, narrow_u64(&q)?))
}

/// Residue-class formulas for `(r, q)` at `d = 3k + eps`.
pub fn r_q_branch(k: u64, eps: u64, m: u64) -> Result<(u64, u64)> {
    // 2r = 3k^2 + c1 k + 2 c0 - 2 C(m+1, 2)
    let (c1, c0) = match eps {
        0 => (5u32, 1u32),
        1 => (7, 2),
        2 => (9, 3),
        other => return Err(ExpectedError::BadResidue(other)),
    };
    let kb = BigInt::from(k);
    let twice_r = 3u32 * &kb * &kb + c1 * &kb + 2u32 * c0 - 2u32 * binom(m + 1, 2);
    let r = exact_div(&twice_r, &BigInt::from(2u32), "r_q_branch")?;
    let mut q = 2u32 * binom(m + 1, 3);
    if eps == 2 {
        q += &kb + 1u32;
    }
    if r.is_negative() {
        return Err(ExpectedError::Oversaturated { d: 3 * k + eps, m });
    }
    Ok((narrow_u64(&r)?, narrow_u64(&q)?))
}

/// Degree threshold `3 C(m+1, 3)`.
pub fn d0(m: u64) -> u64 {
    3 * binomial(m + 1, 3)
}

/// Degree-`d` length of `Z(m, r, s, q, z)` in P^3: the number of independent
/// conditions a general realization imposes.
pub fn length_p3(d: u64, z: &SchemeSpec) -> Result<u64> {
    if z.z == 1 {
        return Err(ExpectedError::NonCanonicalZigzag);
    }
    let fat = BigInt::from(conditions_fat_line_p3(z.m, d)?);
    let db = BigInt::from(d);
    let zig = if z.z >= 2 {
        BigInt::from(z.z) * (&db + 1u32) - (z.z - 1)
    } else {
        BigInt::zero()
    };
    let total = fat
        + BigInt::from(z.r) * (&db + 1u32)
        + BigInt::from(z.s) * (2u32 * &db + 1u32)
        + z.q
        + zig;
    narrow_u64(&total)
}

/// Virtual dimension of the system of bidegree `bd` through `om` on P^1 x P^1.
pub fn vdim_p1p1(bd: Bidegree, om: &OmegaSpec) -> i64 {
    let ambient = BigInt::from(bd.a + 1) * BigInt::from(bd.b + 1);
    let fat = BigInt::from(om.p_m) * binom(om.m_pt + 1, 2);
    let v = ambient - om.p - 3u32 * BigInt::from(om.p_d) - fat;
    narrow_i64(&v).expect("vdim overflow")
}

/// Lenarcik's classification of special systems with points of multiplicity
/// at most two on P^1 x P^1.
///
/// `doubles` counts general double points, `simples` general simple points.
/// A system of bidegree `(a, b)`, `a <= b`, is special iff either `a = 0`,
/// at least one double point is present and `simples + 2 doubles <= b`, or
/// `a = 2`, there are no simple points, and `b = doubles - 1` with an odd
/// number of double points.
pub fn lenarcik_special(bd: Bidegree, doubles: u64, simples: u64) -> bool {
    let Bidegree { a, b } = bd.normalized();
    let b = b as i128;
    let (dbl, smp) = (doubles as i128, simples as i128);
    (a == 0 && dbl >= 1 && smp + 2 * dbl <= b)
        || (a == 2 && smp == 0 && b == dbl - 1 && dbl % 2 == 1)
}

/// `max(0, C(d+3,3) - length_p3(d, Z))`, the maximal-rank prediction.
pub fn expected_h0_p3(d: u64, z: &SchemeSpec) -> Result<u64> {
    let len = length_p3(d, z)?;
    Ok(hilbert_poly_pn(3, d).saturating_sub(len))
}
