use serde::{Deserialize, Serialize};

use super::InterpError;

/// Default prime: the largest prime below 2^16.
pub const DEFAULT_PRIME: u64 = 65521;
/// Second oracle prime, 2^31 - 1.
pub const SECOND_PRIME: u64 = 2_147_483_647;

/// Arithmetic modulo a word-size prime `p < 2^32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: DEFAULT_PRIME }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, InterpError> {
        if p >= 1 << 32 || !is_prime(p) {
            return Err(InterpError::BadPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Products of two reduced elements fit in 64 bits and rows can absorb
    /// many unreduced updates before overflowing.
    #[inline]
    pub fn is_small(&self) -> bool {
        self.p < 1 << 16
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Maps a small signed integer into the field.
    pub fn from_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64);
        r as u64
    }

    /// `n (n-1) ... (n-k+1)` reduced mod p.
    pub fn falling(&self, n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1 % self.p, |acc, i| self.mul(acc, (n - i) % self.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(PrimeField::new(DEFAULT_PRIME).is_ok());
        assert!(PrimeField::new(SECOND_PRIME).is_ok());
        assert!(PrimeField::new(65535).is_err());
        assert!(PrimeField::new(1 << 33).is_err());
        assert!(is_prime(2) && is_prime(3) && !is_prime(1) && !is_prime(91));
    }

    #[test]
    fn arithmetic() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.add(5, 4), 2);
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.neg(3), 4);
        assert_eq!(f.mul(3, 5), 1);
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        assert_eq!(f.from_i64(-1), 6);
        assert_eq!(f.falling(5, 2), 20 % 7);
        assert_eq!(f.falling(2, 3), 0);
        let big = PrimeField::new(SECOND_PRIME).unwrap();
        assert_eq!(big.mul(SECOND_PRIME - 1, SECOND_PRIME - 1), 1);
    }
}
