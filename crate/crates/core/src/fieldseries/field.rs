use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime accepted; keeps products of two residues inside `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes in `[2, bound]`, ascending.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// Prime factorization as (prime, exponent) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The prime field F_p for a prime p >= 5.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldContext {
    p: u64,
}

impl TryFrom<u64> for FieldContext {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        FieldContext::new(p)
    }
}

impl From<FieldContext> for u64 {
    fn from(ctx: FieldContext) -> u64 {
        ctx.p
    }
}

impl std::fmt::Display for FieldContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

impl FieldContext {
    pub fn new(p: u64) -> Result<Self> {
        if p < 5 || p > MAX_PRIME || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(FieldContext { p })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
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

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    pub fn from_bigint(&self, a: &BigInt) -> u64 {
        let r = a.mod_floor(&BigInt::from(self.p));
        r.to_u64().expect("residue fits in u64")
    }

    /// `base^exp` for a possibly negative exponent; `base` must be a unit when `exp < 0`.
    pub fn pow_signed(&self, base: u64, exp: i64) -> Option<u64> {
        if exp >= 0 {
            Some(self.pow(base, exp as u64))
        } else {
            self.inv(base).map(|b| self.pow(b, exp.unsigned_abs()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_composite() {
        assert_eq!(FieldContext::new(3), Err(Error::InvalidPrime(3)));
        assert_eq!(FieldContext::new(2), Err(Error::InvalidPrime(2)));
        assert_eq!(FieldContext::new(9), Err(Error::InvalidPrime(9)));
        assert!(FieldContext::new(5).is_ok());
        assert!(FieldContext::new(11).is_ok());
    }

    #[test]
    fn inverse_and_negative_residues() {
        let f = FieldContext::new(7).unwrap();
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
        assert_eq!(f.from_i64(-24), 4);
        assert_eq!(f.from_bigint(&BigInt::from(-16744)), 0);
        assert_eq!(f.pow_signed(3, -1), Some(5));
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(12), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert_eq!(primes_up_to(12), vec![2, 3, 5, 7, 11]);
    }
}
