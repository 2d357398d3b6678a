//! Power moments `S_n(q) = Σ_u K(u, 1; q)^n`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{pow_big, Modulus};
use crate::ball::Ball;
use crate::counter::Counter;
use crate::error::{Error, Result};
use crate::kloosterman::{moment_precision, Evaluator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactCount,
    DirectFloat,
    ClosedForm,
    Oracle,
}

impl Method {
    pub const fn as_str(&self) -> &'static str {
        match self {
            Method::ExactCount => "exact-count",
            Method::DirectFloat => "direct-float",
            Method::ClosedForm => "closed-form",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentRecord {
    pub n: u32,
    pub q: Modulus,
    pub value: BigInt,
    pub method: Method,
}

/// `S_n(p^r)` from the counts `W_n(p^r)` and `W_n(p^{r-1})`.
pub fn prime_power_moment(counter: &Counter, n: u32, p: u64, r: u32) -> Result<BigInt> {
    if n == 1 {
        return Ok(BigInt::zero());
    }
    let q = Modulus::prime_power(p, r)?;
    let w = counter.count_w(n, &q)?;
    let pb = BigInt::from(p);
    if r == 1 {
        let sign = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        return Ok(&pb * &pb * w - (pow_big(p - 1, n - 1) + sign));
    }
    let w_lo = counter.count_w(n, &Modulus::prime_power(p, r - 1)?)?;
    // q² p^{n-3} = (q²/p) p^{n-2}, which stays integral for n = 2
    let q2 = pow_big(p, 2 * r);
    let lower = (&q2 / &pb) * pow_big(p, n - 2) * w_lo;
    Ok(q2 * w - lower)
}

/// Exact `S_n(q)` via counting, multiplied over prime-power components.
pub fn moment_exact(n: u32, q: &Modulus) -> Result<MomentRecord> {
    moment_exact_with(Counter::global(), n, q)
}

pub fn moment_exact_with(counter: &Counter, n: u32, q: &Modulus) -> Result<MomentRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut value = BigInt::one();
    if n == 1 {
        value = BigInt::zero();
    } else {
        for &(p, r) in q.factors() {
            value *= prime_power_moment(counter, n, p, r)?;
        }
    }
    Ok(MomentRecord {
        n,
        q: q.clone(),
        value,
        method: Method::ExactCount,
    })
}

/// `Σ_u K(u,1;q)^n` as balls, for `n = 1..=nmax`, at a fixed precision.
pub fn direct_moment_balls(nmax: u32, q: &Modulus, bits: u32) -> Result<Vec<Ball>> {
    let ev = Evaluator::new(q, bits)?;
    let mut sums = vec![Ball::zero(bits); nmax as usize];
    for u in 1..=q.value() {
        let k = ev.eval(u as i64, 1).value;
        let mut pw = k.clone();
        for s in sums.iter_mut() {
            s.add_assign(&pw);
            pw = pw.mul(&k);
        }
    }
    Ok(sums)
}

/// Largest working precision `moment_direct` escalates to.
pub const MAX_DIRECT_BITS: u32 = 4096;

/// `S_1..S_nmax` by direct summation, each rounded to a certified integer.
pub fn moment_direct_range(nmax: u32, q: &Modulus, precision_bits: u32) -> Result<Vec<MomentRecord>> {
    if nmax == 0 {
        return Ok(Vec::new());
    }
    let mut bits = precision_bits.max(moment_precision(nmax, q.value()));
    loop {
        let balls = direct_moment_balls(nmax, q, bits)?;
        let certified: Option<Vec<BigInt>> = balls.iter().map(Ball::certify_integer).collect();
        if let Some(vals) = certified {
            return Ok(vals
                .into_iter()
                .enumerate()
                .map(|(i, value)| MomentRecord {
                    n: i as u32 + 1,
                    q: q.clone(),
                    value,
                    method: Method::DirectFloat,
                })
                .collect());
        }
        if bits >= MAX_DIRECT_BITS {
            return Err(Error::PrecisionExhausted { bits });
        }
        bits = (bits * 2).min(MAX_DIRECT_BITS);
    }
}

pub fn moment_direct(n: u32, q: &Modulus, precision_bits: u32) -> Result<MomentRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(moment_direct_range(n, q, precision_bits)?.pop().unwrap())
}
