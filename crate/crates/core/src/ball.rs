//! Fixed-point balls: a midpoint and a radius on a common `2^-bits` grid.
//!
//! Sums of table entries are exact on the grid, so the only error sources
//! are the rounded table entries themselves and the rounding after each
//! product. Both are folded into the radius.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The closed interval `[(mid - rad) 2^-bits, (mid + rad) 2^-bits]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigUint,
    bits: u32,
}

fn shift_round(x: &BigInt, bits: u32) -> BigInt {
    if bits == 0 {
        return x.clone();
    }
    let half = BigInt::one() << (bits - 1);
    let (q, _) = (x + &half).div_mod_floor(&(BigInt::one() << bits));
    q
}

fn shift_ceil(x: &BigUint, bits: u32) -> BigUint {
    let one = BigUint::one();
    let den = &one << bits;
    (x + &den - &one) >> bits
}

impl Ball {
    pub fn new(mid: BigInt, rad: BigUint, bits: u32) -> Self {
        Ball { mid, rad, bits }
    }

    pub fn zero(bits: u32) -> Self {
        Ball::new(BigInt::zero(), BigUint::zero(), bits)
    }

    pub fn exact(n: &BigInt, bits: u32) -> Self {
        Ball::new(n << bits, BigUint::zero(), bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigUint {
        &self.rad
    }

    pub fn add(&self, other: &Ball) -> Ball {
        debug_assert_eq!(self.bits, other.bits);
        Ball::new(&self.mid + &other.mid, &self.rad + &other.rad, self.bits)
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        debug_assert_eq!(self.bits, other.bits);
        Ball::new(&self.mid - &other.mid, &self.rad + &other.rad, self.bits)
    }

    pub fn neg(&self) -> Ball {
        Ball::new(-&self.mid, self.rad.clone(), self.bits)
    }

    pub fn add_assign(&mut self, other: &Ball) {
        debug_assert_eq!(self.bits, other.bits);
        self.mid += &other.mid;
        self.rad += &other.rad;
    }

    /// Product, rounded back onto the grid; the rounding adds one unit
    /// to the radius.
    pub fn mul(&self, other: &Ball) -> Ball {
        debug_assert_eq!(self.bits, other.bits);
        let full = &self.mid * &other.mid;
        let a = self.mid.magnitude();
        let b = other.mid.magnitude();
        let spread = a * &other.rad + b * &self.rad + &self.rad * &other.rad;
        let mid = shift_round(&full, self.bits);
        let mut rad = shift_ceil(&spread, self.bits);
        rad += 1u32;
        Ball::new(mid, rad, self.bits)
    }

    /// Multiplication by an exact integer.
    pub fn scale(&self, k: &BigInt) -> Ball {
        Ball::new(&self.mid * k, &self.rad * k.magnitude(), self.bits)
    }

    pub fn pow(&self, n: u32) -> Ball {
        let mut acc = Ball::exact(&BigInt::one(), self.bits);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Nearest integer to the midpoint (ties away from zero are irrelevant
    /// here: a tie never certifies).
    pub fn nearest_integer(&self) -> BigInt {
        shift_round(&self.mid, self.bits)
    }

    /// `|mid - round(mid)|` on the grid.
    fn residual_raw(&self) -> BigUint {
        let n = self.nearest_integer();
        (&self.mid - (n << self.bits)).magnitude().clone()
    }

    /// Distance from the midpoint to the nearest integer.
    pub fn residual(&self) -> f64 {
        grid_to_f64(&self.residual_raw(), self.bits)
    }

    pub fn radius(&self) -> f64 {
        grid_to_f64(&self.rad, self.bits)
    }

    pub fn midpoint(&self) -> f64 {
        let m = grid_to_f64(self.mid.magnitude(), self.bits);
        if self.mid.sign() == Sign::Minus {
            -m
        } else {
            m
        }
    }

    /// The integer this ball rounds to, provided both the rounding residual
    /// and the radius are below 1/4.
    pub fn certify_integer(&self) -> Option<BigInt> {
        let quarter = BigUint::one() << self.bits.saturating_sub(2);
        if self.bits < 2 {
            return None;
        }
        if self.residual_raw() < quarter && self.rad < quarter {
            Some(self.nearest_integer())
        } else {
            None
        }
    }

    pub fn contains_integer(&self, n: &BigInt) -> bool {
        let d = (&self.mid - (n << self.bits)).magnitude().clone();
        d <= self.rad
    }

    /// True when the two balls intersect.
    pub fn overlaps(&self, other: &Ball) -> bool {
        debug_assert_eq!(self.bits, other.bits);
        let d = (&self.mid - &other.mid).magnitude().clone();
        d <= &self.rad + &other.rad
    }

    /// Upper bound on `|x|` for every `x` in the ball.
    pub fn abs_upper(&self) -> BigUint {
        self.mid.magnitude() + &self.rad
    }

    /// Compares `|ball|` against `bound` (given on the same grid): `Less`
    /// when the whole ball is strictly inside, `Greater` when the whole ball
    /// is outside, `Equal` when undecided.
    pub fn abs_cmp_bound(&self, bound: &BigUint) -> Ordering {
        let m = self.mid.magnitude();
        if &(m + &self.rad) < bound {
            Ordering::Less
        } else if m > &self.rad && &(m - &self.rad) > bound {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }
}

pub(crate) fn grid_to_f64(x: &BigUint, bits: u32) -> f64 {
    let len = x.bits();
    if len == 0 {
        return 0.0;
    }
    // keep 64 leading bits so to_f64 never overflows
    let drop = len.saturating_sub(64);
    let top = (x >> drop).to_f64().unwrap_or(f64::INFINITY);
    top * 2f64.powi(drop as i32 - bits as i32)
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {:.3e}",
            fixed_to_decimal(&self.mid, self.bits, 30),
            self.radius()
        )
    }
}

/// Decimal expansion of `mid * 2^-bits` with `digits` fractional digits
/// (truncated toward zero).
pub fn fixed_to_decimal(mid: &BigInt, bits: u32, digits: usize) -> String {
    let neg = mid.is_negative();
    let mag = mid.magnitude();
    let int_part = mag >> bits;
    let frac = mag - (&int_part << bits);
    let scaled = (frac * num_traits::pow(BigUint::from(10u32), digits)) >> bits;
    let mut s = format!("{}.{:0>width$}", int_part, scaled.to_string(), width = digits);
    if neg && !(int_part.is_zero() && scaled.is_zero()) {
        s.insert(0, '-');
    }
    s
}
