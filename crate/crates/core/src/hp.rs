//! Conversions between astro-float values and fixed-point integers.

use astro_float::{BigFloat, Consts, RoundingMode, Sign as FSign, Word};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

use crate::error::{Error, Result};

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) fn consts() -> Result<Consts> {
    Consts::new().map_err(|e| Error::Float(format!("{e:?}")))
}

pub(crate) fn check(x: BigFloat) -> Result<BigFloat> {
    match x.err() {
        Some(e) => Err(Error::Float(format!("{e:?}"))),
        None if x.is_nan() => Err(Error::Float("NaN".into())),
        None => Ok(x),
    }
}

/// Exact conversion of an integer.
pub fn from_bigint(n: &BigInt) -> BigFloat {
    if n.is_zero() {
        return BigFloat::from_word(0, 64);
    }
    let words: Vec<Word> = n.magnitude().to_u64_digits();
    let sign = if n.sign() == Sign::Minus {
        FSign::Neg
    } else {
        FSign::Pos
    };
    BigFloat::from_words(&words, sign, (64 * words.len()) as i32)
}

/// `mid * 2^-bits` as a float, exactly.
pub fn from_fixed(mid: &BigInt, bits: u32) -> BigFloat {
    let mut x = from_bigint(mid);
    if !mid.is_zero() {
        let e = x.exponent().unwrap_or(0);
        x.set_exponent(e - bits as i32);
    }
    x
}

/// `round(x * 2^bits)`.
pub fn to_fixed(x: &BigFloat, bits: u32) -> Result<BigInt> {
    let (words, _, sign, exp, _) = x
        .as_raw_parts()
        .ok_or_else(|| Error::Float("non-finite value".into()))?;
    if x.is_zero() {
        return Ok(BigInt::zero());
    }
    // value = M * 2^(exp - 64*len)
    let m = BigUint::from_slice(
        &words
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect::<Vec<u32>>(),
    );
    let shift = exp as i64 - 64 * words.len() as i64 + bits as i64;
    let mag = if shift >= 0 {
        m << shift as u64
    } else {
        let s = (-shift) as u64;
        let half = BigUint::from(1u32) << (s - 1);
        (m + half) >> s
    };
    let v = BigInt::from_biguint(Sign::Plus, mag);
    Ok(if sign == FSign::Neg { -v } else { v })
}

pub fn to_f64(x: &BigFloat) -> f64 {
    to_fixed(x, 60)
        .ok()
        .map(|m| crate::ball::grid_to_f64(m.magnitude(), 60) * if m.sign() == Sign::Minus { -1.0 } else { 1.0 })
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_round_trip() {
        for n in [1i64, -1, 7, -123456789, 1 << 62] {
            let b = BigInt::from(n);
            assert_eq!(to_fixed(&from_bigint(&b), 0).unwrap(), b);
        }
        let big: BigInt = "123456789012345678901234567890123".parse().unwrap();
        assert_eq!(to_fixed(&from_bigint(&big), 0).unwrap(), big);
    }

    #[test]
    fn fixed_round_trip() {
        let m = BigInt::from(-12345);
        let x = from_fixed(&m, 7);
        assert!((to_f64(&x) + 12345.0 / 128.0).abs() < 1e-12);
        assert_eq!(to_fixed(&x, 7).unwrap(), m);
    }

    #[test]
    fn pi_digits() {
        let mut cc = consts().unwrap();
        let pi = cc.pi(256, RM);
        assert!((to_f64(&pi) - std::f64::consts::PI).abs() < 1e-15);
    }
}
