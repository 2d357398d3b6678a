//! Closed formulas for `S_n(p)`, `S_n(p^r)` and the constants around them.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{binomial, is_prime, jacobi_p_over_3, pow_big, rational, rational_int, ExactRational, Modulus};
use crate::counter::census_index_sum;
use crate::error::{invalid, Error, Result};

fn require_prime(p: u64, above: u64) -> Result<()> {
    if !is_prime(p) || p <= above {
        return invalid(format!("expected a prime greater than {above}, got {p}"));
    }
    Ok(())
}

/// `(p/3)`, which vanishes at `p = 3`.
fn legendre3(p: u64) -> BigInt {
    BigInt::from(jacobi_p_over_3(p).unwrap_or(0))
}

/// `(S_2, S_3, S_4)` for a prime `p > 3`.
pub fn salie_moments(p: u64) -> Result<(BigInt, BigInt, BigInt)> {
    require_prime(p, 3)?;
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    let p3 = &p2 * &pb;
    let s2 = &p2 - &pb;
    let s3 = legendre3(p) * &p2 + 2 * &pb;
    let s4 = 2 * p3 - 3 * p2 - 3 * pb;
    Ok((s2, s3, s4))
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `p = a·x² + b·y²` with `x, y ≥ 0`, if any.
fn represent(p: u64, a: u64, b: u64) -> Option<(u64, u64)> {
    (0..=isqrt(p / a)).find_map(|x| {
        let rest = p - a * x * x;
        (rest % b == 0)
            .then(|| isqrt(rest / b))
            .filter(|&y| b * y * y == rest)
            .map(|y| (x, y))
    })
}

/// The integer `a_p` in the fifth-moment formula, for a prime `p > 5`.
pub fn a_p(p: u64) -> Result<BigInt> {
    require_prime(p, 5)?;
    let first = represent(p, 3, 5);
    let second = represent(p, 1, 15);
    let p = BigInt::from(p);
    match (first, second) {
        (Some(_), Some(_)) => Err(Error::InconsistentRepresentation(p.try_into().unwrap())),
        (Some((u, _)), None) => Ok(2 * p - 12 * BigInt::from(u * u)),
        (None, Some((x, _))) => Ok(4 * BigInt::from(x * x) - 2 * p),
        (None, None) => Ok(BigInt::zero()),
    }
}

pub fn s5_closed(p: u64) -> Result<BigInt> {
    let a = a_p(p)?;
    let pb = BigInt::from(p);
    Ok(legendre3(p) * 4 * pb.pow(3) + (a + 5) * pb.pow(2) + 4 * pb)
}

/// `q`-expansion coefficients `c_1..c_order` of `(η(6z)η(3z)η(2z)η(z))²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaExpansion {
    pub order: usize,
    pub coefficients: Vec<BigInt>,
}

impl EtaExpansion {
    pub fn new(order: usize) -> Self {
        // ∏(1 - q^m) by the pentagonal number theorem, to degree `order - 1`
        let deg = order.saturating_sub(1);
        let mut euler = vec![0i64; deg + 1];
        for k in 0i64.. {
            let mut any = false;
            for g in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
                if (g as usize) <= deg && !(k == 0 && g != 0) {
                    euler[g as usize] = if k % 2 == 0 { 1 } else { -1 };
                    any = true;
                }
            }
            if !any && k > 0 {
                break;
            }
        }
        let mut prod = vec![BigInt::zero(); deg + 1];
        prod[0] = BigInt::one();
        for d in [1usize, 2, 3, 6] {
            let mut f = vec![0i64; deg + 1];
            for (i, &c) in euler.iter().enumerate() {
                if i * d <= deg {
                    f[i * d] = c;
                }
            }
            for _ in 0..2 {
                prod = mul_truncated(&prod, &f);
            }
        }
        EtaExpansion {
            order,
            coefficients: prod,
        }
    }

    /// Coefficient of `q^k`, `1 ≤ k ≤ order`.
    pub fn coefficient(&self, k: usize) -> &BigInt {
        &self.coefficients[k - 1]
    }
}

fn mul_truncated(a: &[BigInt], b: &[i64]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len()];
    for (j, &bj) in b.iter().enumerate() {
        if bj == 0 {
            continue;
        }
        for (i, ai) in a.iter().enumerate().take(a.len() - j) {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn eta_coefficient(p: usize, order: usize) -> Result<BigInt> {
    if p == 0 || order < p {
        return invalid(format!("need 1 ≤ p ≤ order, got p = {p}, order = {order}"));
    }
    Ok(EtaExpansion::new(order).coefficient(p).clone())
}

pub fn b_p(p: u64) -> Result<BigInt> {
    eta_coefficient(p as usize, p as usize)
}

pub fn s6_closed(p: u64) -> Result<BigInt> {
    require_prime(p, 6)?;
    let b = b_p(p)?;
    let pb = BigInt::from(p);
    Ok(5 * pb.pow(4) - 10 * pb.pow(3) - (b + 9) * pb.pow(2) - 5 * pb)
}

/// `C(n,k) - C(n,k-1)`.
fn ballot(n: u32, k: u32) -> BigInt {
    binomial(n as i64, k as i64) - binomial(n as i64, k as i64 - 1)
}

/// `T_0..T_n` from `s[m - 1] = S_m` (`m = 1..=n`), seeded with `T_0 = p - 1`.
pub fn convert_s_to_t(p: u64, s: &[BigInt]) -> Result<Vec<BigInt>> {
    let pb = BigInt::from(p);
    let mut t = vec![&pb - 1];
    for n in 1..=s.len() as u32 {
        let sign = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let mut acc = sign * &s[n as usize - 1] - 1;
        for k in 1..=n / 2 {
            acc -= ballot(n, k) * pb.pow(k) * &t[(n - 2 * k) as usize];
        }
        t.push(acc);
    }
    Ok(t)
}

/// Inverse of [`convert_s_to_t`]: `S_1..S_n` from `T_0..T_n`.
pub fn convert_t_to_s(p: u64, t: &[BigInt]) -> Result<Vec<BigInt>> {
    let pb = BigInt::from(p);
    if t.first() != Some(&(&pb - 1)) {
        return invalid("T_0 must equal p - 1");
    }
    Ok((1..t.len() as u32)
        .map(|n| {
            let mut acc = BigInt::one();
            for k in 0..=n / 2 {
                acc += ballot(n, k) * pb.pow(k) * &t[(n - 2 * k) as usize];
            }
            if n % 2 == 0 {
                acc
            } else {
                -acc
            }
        })
        .collect())
}

/// `(1 + T_n)² ≤ [(n-1)/2]² p^{n+1}`.
pub fn t_bound_check(n: u32, p: u64, t_n: &BigInt) -> bool {
    let c = BigInt::from(n.saturating_sub(1) / 2);
    let lhs = (t_n + 1i32).pow(2);
    lhs <= &c * &c * pow_big(p, n + 1)
}

/// `A_n(p)`, `B_n` and the exponent `(n+1)/2` of the estimate
/// `|S_n - A_n(p)| ≤ B_n p^{(n+1)/2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EstimatePair {
    #[serde(serialize_with = "crate::arith::ser_rational")]
    pub main_term: ExactRational,
    #[serde(serialize_with = "crate::arith::ser_rational")]
    pub bound_constant: ExactRational,
    #[serde(serialize_with = "crate::arith::ser_rational")]
    pub exponent: ExactRational,
    pub p: u64,
}

impl EstimatePair {
    /// `(S - A)² ≤ B² p^{2·exponent}`, exactly.
    pub fn holds_for(&self, s: &BigInt) -> bool {
        let diff = ExactRational::from_integer(s.clone()) - &self.main_term;
        let lhs = &diff * &diff;
        let two_e = (&self.exponent * rational_int(2)).to_integer();
        let pw = ExactRational::from_integer(pow_big(self.p, two_e.try_into().unwrap()));
        lhs <= &self.bound_constant * &self.bound_constant * pw
    }
}

fn ratio_term(c: BigInt, num: i64, den: i64) -> ExactRational {
    ExactRational::new(c * num, BigInt::from(den))
}

pub fn estimate_pair(n: u32, p: u64) -> Result<EstimatePair> {
    require_prime(p, 2)?;
    if n < 4 {
        return invalid(format!("the estimate needs n ≥ 4, got {n}"));
    }
    let pw = |k: i64| ExactRational::from_integer(pow_big(p, k as u32));
    let c = |a: i64, b: i64| binomial(a, b);
    let (main, bound) = if n % 2 == 0 {
        let m = (n / 2) as i64;
        let n = 2 * m;
        let mut a = rational_int(1) + ratio_term(c(n, m), 1, m + 1) * pw(m + 1)
            - (ratio_term(c(n, m), 1, m + 1) + ratio_term(c(n, m - 2), 5, m + 3)) * pw(m)
            - ratio_term(c(n, m - 1), 3, m + 2) * pw(m - 1)
            - ratio_term(c(n, m - 2), 5, m + 3) * pw(m - 2);
        let mut b = rational_int(0);
        for k in 0..=m - 3 {
            let coef = ratio_term(c(n, k), n - 2 * k + 1, n - k + 1);
            a -= &coef * pw(k);
            // [m - k - 1/2] = m - k - 1
            b += coef * rational_int(m - k - 1);
        }
        (a, b)
    } else {
        let m = (n / 2) as i64;
        let n = 2 * m + 1;
        let chi = ExactRational::from_integer(legendre3(p));
        let four = ratio_term(c(n, m - 1), 4, m + 3);
        let mut a =
            rational_int(-1) + ratio_term(c(n, m), 2, m + 2) * pw(m) + &four * chi * pw(m + 1) + &four * pw(m - 1);
        let mut b = rational_int(0);
        for k in 0..=m - 2 {
            let coef = ratio_term(c(n, k), n - 2 * k + 1, n - k + 1);
            a += &coef * pw(k);
            b += coef * rational_int(m - k);
        }
        (a, b)
    };
    Ok(EstimatePair {
        main_term: main,
        bound_constant: bound,
        exponent: rational(n + 1, 2),
        p,
    })
}

/// Either a closed value or a marker that `(n, p, r)` is outside every
/// printed validity range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Closed(BigInt),
    OutsideValidity,
}

impl Validity {
    pub fn value(&self) -> Option<&BigInt> {
        match self {
            Validity::Closed(v) => Some(v),
            Validity::OutsideValidity => None,
        }
    }
}

/// Whether `p^e > bound` for `e ≥ 0`.
fn power_exceeds(p: u64, e: i64, bound: u64) -> bool {
    e >= 0 && pow_big(p, e as u32) > BigInt::from(bound)
}

/// `S_n(p^r)` for `r` past the stabilisation threshold.
pub fn prime_power_closed(n: u32, p: u64, r: u32) -> Result<Validity> {
    if !is_prime(p) || n == 0 || r == 0 {
        return invalid(format!("invalid (n, p, r) = ({n}, {p}, {r})"));
    }
    let (ri, half) = (r as i64, (n / 2) as i64);
    let closed = if n % 2 == 1 {
        let ok = if p == 2 {
            r >= 2
        } else {
            power_exceeds(p, ri - 1, n as u64)
        };
        ok.then(BigInt::zero)
    } else {
        let lead = binomial(n as i64 - 1, half - 1);
        if p == 2 {
            power_exceeds(2, ri - 2, n as u64).then(|| lead * pow_big(2, (half - 2 + (half + 1) * ri) as u32))
        } else {
            power_exceeds(p, ri - 1, half as u64)
                .then(|| lead * BigInt::from(p - 1) * pow_big(p, ((half + 1) * ri - 1) as u32))
        }
    };
    Ok(closed.map_or(Validity::OutsideValidity, Validity::Closed))
}

/// `S_n(p^r)` from whichever printed formula covers `(n, p, r)`.
pub fn prime_power_moment_closed(n: u32, p: u64, r: u32) -> Result<Validity> {
    if n == 1 {
        return Ok(Validity::Closed(BigInt::zero()));
    }
    if r == 1 {
        let v = match (n, p) {
            (_, 2) => Some(BigInt::from(if n % 2 == 0 { 2 } else { 0 })),
            (2..=4, p) if p > 3 => {
                let (s2, s3, s4) = salie_moments(p)?;
                Some([s2, s3, s4][n as usize - 2].clone())
            }
            (5, p) if p > 5 => Some(s5_closed(p)?),
            (6, p) if p > 6 => Some(s6_closed(p)?),
            _ => None,
        };
        return Ok(v.map_or(Validity::OutsideValidity, Validity::Closed));
    }
    let general = prime_power_closed(n, p, r)?;
    if general != Validity::OutsideValidity || r != 2 || p == 2 {
        return Ok(general);
    }
    let special = if n % 2 == 1 {
        odd_n_p2_closed(n, p)
    } else {
        even_n_p2_correction(n, p)
    };
    Ok(special.map_or(Validity::OutsideValidity, Validity::Closed))
}

/// `S_n(q)` as a product of closed prime-power values, if every factor has one.
pub fn moment_closed(n: u32, q: &Modulus) -> Result<Validity> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let mut value = BigInt::one();
    for &(p, r) in q.factors() {
        match prime_power_moment_closed(n, p, r)? {
            Validity::Closed(v) => value *= v,
            Validity::OutsideValidity => return Ok(Validity::OutsideValidity),
        }
    }
    Ok(Validity::Closed(value))
}

/// `S_n(p²)` for odd `n` and odd `p` with `p² > n`.
pub fn odd_n_p2_closed(n: u32, p: u64) -> Result<BigInt> {
    if n % 2 == 0 || p == 2 || !is_prime(p) || p * p <= n as u64 {
        return invalid(format!("need odd n, odd prime p, p² > n; got n = {n}, p = {p}"));
    }
    Ok(-pow_big(p, n + 1) * census_index_sum(n, p, false))
}

/// `S_n(p²)` for even `n` and odd `p` with `p² > n/2`, including the
/// correction from the non-obvious singular indices.
pub fn even_n_p2_correction(n: u32, p: u64) -> Result<BigInt> {
    if n % 2 == 1 || n < 2 || p == 2 || !is_prime(p) || p * p <= (n / 2) as u64 {
        return invalid(format!("need even n, odd prime p, p² > n/2; got n = {n}, p = {p}"));
    }
    let half = (n / 2) as i64;
    let lead = binomial(n as i64 - 1, half - 1) * BigInt::from(p - 1) * pow_big(p, n + 1);
    Ok(lead - pow_big(p, n + 1) * census_index_sum(n, p, true))
}

/// `Q` and the pole constant `C` for even `n ≥ 6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IgusaConstants {
    #[serde(serialize_with = "crate::arith::ser_bigint")]
    pub q: BigInt,
    #[serde(serialize_with = "crate::arith::ser_rational")]
    pub c: ExactRational,
}

pub fn igusa_constants(n: u32, p: u64) -> Result<IgusaConstants> {
    if n % 2 == 1 || n < 6 {
        return invalid(format!("need even n ≥ 6, got {n}"));
    }
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let half = n / 2;
    let lead = binomial(n as i64 - 1, half as i64 - 1);
    let q = (pow_big(p, half - 2) + 1) * (pow_big(p, half - 1) - 1);
    let c = if p == 2 {
        ExactRational::new(-lead * pow_big(2, half - 3), pow_big(2, half - 2) - 1)
    } else {
        let pm1 = BigInt::from(p - 1);
        ExactRational::new(-lead * &pm1 * &pm1, pow_big(p, 2) * (pow_big(p, half - 2) - 1))
    };
    Ok(IgusaConstants { q, c })
}

/// Integer check used when a rational is expected to be integral.
pub fn as_integer(x: &ExactRational) -> Option<BigInt> {
    x.denom().is_one().then(|| x.numer().clone())
}

/// Whether `|x| < bound` for integers, used for the Ramanujan-type bounds
/// `|a_p| < 2p` and `|b_p| < 2p^{3/2}` (the latter squared).
pub fn a_p_in_range(p: u64, a: &BigInt) -> bool {
    a.abs() < BigInt::from(2 * p)
}

pub fn b_p_in_range(p: u64, b: &BigInt) -> bool {
    b.pow(2) < 4 * pow_big(p, 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn salie_examples() {
        assert_eq!(salie_moments(5).unwrap(), (big(20), big(-15), big(160)));
        assert_eq!(salie_moments(7).unwrap(), (big(42), big(63), big(518)));
        assert!(salie_moments(3).is_err());
    }

    #[test]
    fn a_p_examples() {
        assert_eq!(a_p(19).unwrap(), big(-22));
        assert_eq!(a_p(23).unwrap(), big(34));
        assert_eq!(a_p(7).unwrap(), big(0));
        assert_eq!(s5_closed(7).unwrap(), big(1645));
    }

    #[test]
    fn eta_examples() {
        let e = EtaExpansion::new(20);
        assert_eq!(e.coefficient(1), &big(1));
        assert_eq!(e.coefficient(2), &big(-2));
        assert_eq!(e.coefficient(3), &big(-3));
        assert_eq!(e.coefficient(4), &big(4));
        assert_eq!(e.coefficient(5), &big(6));
        assert_eq!(e.coefficient(6), &big(6));
        assert_eq!(e.coefficient(7), &big(-16));
        assert!(b_p_in_range(7, e.coefficient(7)));
        assert!(eta_coefficient(10, 5).is_err());
    }

    #[test]
    fn s_t_round_trip() {
        let s = vec![big(0), big(20), big(-15), big(160)];
        let t = convert_s_to_t(5, &s).unwrap();
        assert_eq!(t, vec![big(4), big(-1), big(-1), big(24), big(-26)]);
        assert_eq!(convert_t_to_s(5, &t).unwrap(), s);
    }

    #[test]
    fn t_bound_examples() {
        assert!(t_bound_check(1, 7, &big(-1)));
        assert!(!t_bound_check(1, 7, &big(0)));
    }

    #[test]
    fn estimate_constants() {
        for p in [3u64, 5, 7, 11, 101] {
            let a4 = estimate_pair(4, p).unwrap();
            let s4 = salie_moments(p.max(5)).unwrap().2;
            if p >= 5 {
                assert_eq!(as_integer(&a4.main_term), Some(s4));
            }
            assert!(a4.bound_constant.is_zero());
            let a6 = estimate_pair(6, p).unwrap();
            let pb = big(p as i64);
            let expect = 5 * pb.pow(4) - 10 * pb.pow(3) - 9 * pb.pow(2) - 5 * &pb;
            assert_eq!(as_integer(&a6.main_term), Some(expect));
            assert_eq!(a6.bound_constant, rational_int(2));
        }
        assert_eq!(estimate_pair(5, 7).unwrap().bound_constant, rational_int(2));
        assert_eq!(estimate_pair(9, 7).unwrap().exponent, rational_int(5));
        assert!(estimate_pair(3, 7).is_err());
    }

    #[test]
    fn prime_power_examples() {
        assert_eq!(prime_power_closed(4, 5, 2).unwrap(), Validity::Closed(big(37500)));
        assert_eq!(prime_power_closed(4, 2, 5).unwrap(), Validity::Closed(big(98304)));
        assert_eq!(prime_power_closed(5, 7, 2).unwrap(), Validity::Closed(big(0)));
        assert_eq!(prime_power_closed(4, 2, 4).unwrap(), Validity::OutsideValidity);
        assert_eq!(prime_power_closed(5, 5, 2).unwrap(), Validity::OutsideValidity);
        assert_eq!(prime_power_closed(2, 2, 3).unwrap(), Validity::OutsideValidity);
    }

    #[test]
    fn r2_examples() {
        assert_eq!(odd_n_p2_closed(5, 3).unwrap(), big(-3645));
        assert_eq!(odd_n_p2_closed(7, 11).unwrap(), big(0));
        assert!(odd_n_p2_closed(9, 3).is_err());
        assert!(odd_n_p2_closed(7, 3).is_ok());
        assert!(odd_n_p2_closed(11, 3).is_err());
        assert!(even_n_p2_correction(8, 2).is_err());
        // p ≥ n/2 + 1: no correction
        assert_eq!(
            even_n_p2_correction(6, 5).unwrap(),
            prime_power_closed(6, 5, 2).unwrap().value().unwrap().clone()
        );
    }

    #[test]
    fn igusa_examples() {
        let k = igusa_constants(6, 3).unwrap();
        assert_eq!(k.q, big(32));
        assert_eq!(k.c, rational(-20, 9));
        assert_eq!(igusa_constants(6, 2).unwrap().c, rational_int(-10));
        assert_eq!(igusa_constants(8, 2).unwrap().c, rational(-70, 3));
        assert_eq!(igusa_constants(6, 5).unwrap().c, rational(-8, 5));
        assert!(igusa_constants(4, 5).is_err());
    }

    #[test]
    fn dispatcher_agrees_with_counts() {
        use crate::moments::moment_exact;
        let q = Modulus::new(25).unwrap();
        assert_eq!(moment_closed(4, &q).unwrap(), Validity::Closed(big(37500)));
        let mut covered = 0;
        for q in 2..=130u64 {
            let m = Modulus::new(q).unwrap();
            for n in 1..=7 {
                if let Validity::Closed(v) = moment_closed(n, &m).unwrap() {
                    assert_eq!(v, moment_exact(n, &m).unwrap().value, "n={n} q={q}");
                    covered += 1;
                }
            }
        }
        assert!(covered > 300);
        assert_eq!(
            moment_closed(7, &Modulus::new(11).unwrap()).unwrap(),
            Validity::OutsideValidity
        );
    }
}
