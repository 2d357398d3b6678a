//! Integer, rational and modular helpers shared by the rest of the crate.
//!
//! Every count and moment is carried as an arbitrary-precision integer;
//! machine integers only appear for residues, which stay below the
//! modulus.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ExactInt = BigInt;
pub type ExactRational = BigRational;

/// A modulus `q >= 2` together with its factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    q: u64,
    factors: Vec<(u64, u32)>,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Modulus {
            q,
            factors: factorize(q),
        })
    }

    /// Builds `p^r` without factoring.
    pub fn prime_power(p: u64, r: u32) -> Result<Self> {
        if !is_prime(p) || r == 0 {
            return Err(Error::InvalidArgument(format!("{p}^{r} is not a prime power")));
        }
        let q = p
            .checked_pow(r)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{r} overflows")))?;
        Ok(Modulus {
            q,
            factors: vec![(p, r)],
        })
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// `Some((p, r))` when `q = p^r`.
    pub fn as_prime_power(&self) -> Option<(u64, u32)> {
        match self.factors.as_slice() {
            [(p, r)] => Some((*p, *r)),
            _ => None,
        }
    }

    pub fn expect_prime_power(&self) -> Result<(u64, u32)> {
        self.as_prime_power().ok_or(Error::NotPrimePower(self.q))
    }

    /// The prime-power components `p_i^{m_i}` as plain integers.
    pub fn components(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, m)| p.pow(m)).collect()
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors.iter().map(|&(p, m)| p.pow(m - 1) * (p - 1)).product()
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// Trial division; the crate only deals with desk-scale moduli.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

/// All prime powers `p^r` (r >= 1) in `[lo, hi]`, sorted.
pub fn prime_powers_in(lo: u64, hi: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in primes_in(2, hi) {
        let mut q = p;
        let mut r = 1;
        while q <= hi {
            if q >= lo {
                out.push((p, r));
            }
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
            r += 1;
        }
    }
    out.sort_by_key(|&(p, r)| p.pow(r));
    out
}

/// Canonical representative of `x mod m` in `[0, m)`.
pub fn reduce(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `x` modulo `m`, in `[0, m)`.
pub fn mod_inverse(x: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidModulus(m));
    }
    if m == 1 {
        return Ok(0);
    }
    let a = reduce(x, m) as i128;
    let e = a.extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return Err(Error::NonUnit { value: x, modulus: m });
    }
    Ok(e.x.rem_euclid(m as i128) as u64)
}

pub fn euler_phi(q: &Modulus) -> ExactInt {
    BigInt::from(q.euler_phi())
}

/// The symbol `(p/3)`: `+1` for `p = 1 mod 3`, `-1` for `p = 2 mod 3`.
pub fn jacobi_p_over_3(p: u64) -> Result<i32> {
    match p % 3 {
        1 => Ok(1),
        2 => Ok(-1),
        _ => Err(Error::InvalidArgument(format!(
            "({p}/3) vanishes: {p} is divisible by 3"
        ))),
    }
}

/// Binomial coefficient, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> ExactInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Splits `v` for the coprime factorization `q = q1 * q2`: returns
/// `v1 mod q1`, `v2 mod q2` with `v = v1*q2^2 + v2*q1^2 (mod q)`, so that
/// `K(u, v; q) = K(u, v1; q1) * K(u, v2; q2)`.
pub fn crt_split_v(v: i64, q1: u64, q2: u64) -> Result<(u64, u64)> {
    if q1 == 0 || q2 == 0 || q1.gcd(&q2) != 1 {
        return Err(Error::NotCoprime(q1, q2));
    }
    let v1 = if q1 == 1 {
        0
    } else {
        let inv = mod_inverse(reduce(q2 as i64, q1) as i64, q1)? as u128;
        (reduce(v, q1) as u128 * inv % q1 as u128 * inv % q1 as u128) as u64
    };
    let v2 = if q2 == 1 {
        0
    } else {
        let inv = mod_inverse(reduce(q1 as i64, q2) as i64, q2)? as u128;
        (reduce(v, q2) as u128 * inv % q2 as u128 * inv % q2 as u128) as u64
    };
    let q = q1 as u128 * q2 as u128;
    let lhs = (v1 as u128 * (q2 as u128 * q2 as u128 % q) + v2 as u128 * (q1 as u128 * q1 as u128 % q)) % q;
    debug_assert_eq!(lhs, reduce(v, q as u64) as u128);
    Ok((v1, v2))
}

pub fn pow_big(base: u64, exp: u32) -> ExactInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> ExactRational {
    BigRational::new(num.into(), den.into())
}

pub fn rational_int(n: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(n.into())
}

/// `p^e` as an exact rational for any signed exponent.
pub fn rational_pow(p: u64, e: i64) -> ExactRational {
    let m = pow_big(p, e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(m)
    } else {
        BigRational::new(BigInt::one(), m)
    }
}

/// Decimal text of a rational: `"n"` for integers, otherwise `"num/den"`.
pub fn rational_to_string(r: &ExactRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serializes a rational as its decimal text.
pub fn ser_rational<S: serde::Serializer>(r: &ExactRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

/// Serializes an integer as a decimal string.
pub fn ser_bigint<S: serde::Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

pub fn ser_rationals<S: serde::Serializer>(v: &[ExactRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational_to_string))
}

pub fn parse_rational(s: &str) -> Option<ExactRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert_eq!(mod_inverse(2, 4), Err(Error::NonUnit { value: 2, modulus: 4 }));
        assert_eq!(mod_inverse(-1, 7).unwrap(), 6);
    }

    #[test]
    fn inverse_is_an_involution_up_to_10k() {
        for m in 2..=10_000u64 {
            for x in 1..m.min(60) {
                if x.gcd(&m) != 1 {
                    assert!(mod_inverse(x as i64, m).is_err());
                    continue;
                }
                let y = mod_inverse(x as i64, m).unwrap();
                assert!(y < m);
                assert_eq!((x as u128 * y as u128) % m as u128, 1 % m as u128);
                assert_eq!(mod_inverse(y as i64, m).unwrap(), x % m);
            }
        }
    }

    #[test]
    fn inverse_exhaustive_small_moduli() {
        for m in 2..=300u64 {
            for x in 0..m {
                if x.gcd(&m) == 1 {
                    let y = mod_inverse(x as i64, m).unwrap();
                    assert_eq!(mod_inverse(y as i64, m).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let phi = |q| euler_phi(&Modulus::new(q).unwrap());
        assert_eq!(phi(27), BigInt::from(18));
        assert_eq!(phi(7), BigInt::from(6));
        assert_eq!(phi(12), BigInt::from(4));
        assert_eq!(phi(2), BigInt::from(1));
    }

    #[test]
    fn phi_is_multiplicative() {
        for a in 2..60u64 {
            for b in 2..60u64 {
                if a.gcd(&b) == 1 {
                    let lhs = Modulus::new(a * b).unwrap().euler_phi();
                    let rhs = Modulus::new(a).unwrap().euler_phi() * Modulus::new(b).unwrap().euler_phi();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn modulus_invariants() {
        for q in 2..5000u64 {
            let m = Modulus::new(q).unwrap();
            let prod: u64 = m.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, q);
            assert!(m.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert!(m.factors().iter().all(|&(p, e)| is_prime(p) && e >= 1));
        }
        assert!(Modulus::new(1).is_err());
        assert_eq!(Modulus::new(1024).unwrap().as_prime_power(), Some((2, 10)));
        assert_eq!(Modulus::new(12).unwrap().as_prime_power(), None);
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_p_over_3(7).unwrap(), 1);
        assert_eq!(jacobi_p_over_3(5).unwrap(), -1);
        assert_eq!(jacobi_p_over_3(13).unwrap(), 1);
        assert!(jacobi_p_over_3(3).is_err());
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(6, -1), BigInt::zero());
        assert_eq!(binomial(3, 1), BigInt::from(3));
        assert_eq!(binomial(3, 4), BigInt::zero());
    }

    #[test]
    fn binomial_symmetry_and_pascal() {
        for n in 0..=64i64 {
            for k in -1..=n + 1 {
                assert_eq!(binomial(n, k), binomial(n, n - k));
                if n > 0 {
                    assert_eq!(binomial(n, k), binomial(n - 1, k) + binomial(n - 1, k - 1));
                }
            }
        }
    }

    #[test]
    fn crt_split_examples() {
        let (v1, v2) = crt_split_v(1, 3, 5).unwrap();
        // exhaustive search over v1 in [0,3), v2 in [0,5)
        let found: Vec<(u64, u64)> = (0..3)
            .flat_map(|a| (0..5).map(move |b| (a, b)))
            .filter(|&(a, b)| (a * 25 + b * 9) % 15 == 1)
            .collect();
        assert_eq!(found, vec![(v1, v2)]);
        assert_eq!(crt_split_v(0, 3, 5).unwrap(), (0, 0));
        assert_eq!(crt_split_v(11, 1, 13).unwrap(), (0, 11));
        assert!(crt_split_v(1, 4, 6).is_err());
    }

    #[test]
    fn crt_split_congruence_holds() {
        for q1 in 1..=200u64 {
            for q2 in 1..=200 / q1 {
                if q1.gcd(&q2) != 1 || q1 * q2 < 2 {
                    continue;
                }
                let q = q1 * q2;
                for v in 0..q as i64 {
                    let (v1, v2) = crt_split_v(v, q1, q2).unwrap();
                    assert!(v1 < q1.max(1) && v2 < q2.max(1));
                    assert_eq!((v1 * q2 * q2 + v2 * q1 * q1) % q, v as u64 % q);
                }
            }
        }
    }

    #[test]
    fn rational_text_round_trip() {
        let r = rational(-20, 9);
        assert_eq!(rational_to_string(&r), "-20/9");
        assert_eq!(parse_rational("-20/9").unwrap(), r);
        assert_eq!(parse_rational("7").unwrap(), rational_int(7));
        assert_eq!(rational_pow(5, -2), rational(1, 25));
    }

    #[test]
    fn prime_power_listing() {
        let pp: Vec<u64> = prime_powers_in(2, 32).iter().map(|&(p, r)| p.pow(r)).collect();
        assert_eq!(
            pp,
            vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32]
        );
    }
}
