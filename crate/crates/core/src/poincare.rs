//! Truncated Poincaré series `P(t)` of the counts `V_n(p^r)`, the
//! associated `Z(t)`, and exact fits of their rational-function shapes.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{binomial, pow_big, rational, rational_int, rational_pow, ExactRational, Modulus};
use crate::closed::igusa_constants;
use crate::counter::{torus_zero_count_mod_p, Counter};
use crate::error::{invalid, Error, Result};

/// `c_0 + c_1 t + ... + c_R t^R` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedSeries {
    pub p: u64,
    /// Number of variables, `n - 1`.
    pub k: u32,
    #[serde(serialize_with = "crate::arith::ser_rationals")]
    pub coefficients: Vec<ExactRational>,
}

impl TruncatedSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn coefficient(&self, i: usize) -> &ExactRational {
        &self.coefficients[i]
    }

    pub fn truncate(&self, order: usize) -> TruncatedSeries {
        let mut s = self.clone();
        s.coefficients.truncate(order + 1);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serializes")
    }
}

/// Power-series helpers on coefficient vectors of a fixed length.
mod series {
    use super::*;

    pub fn zero(len: usize) -> Vec<ExactRational> {
        vec![ExactRational::zero(); len]
    }

    pub fn poly(coeffs: &[ExactRational], len: usize) -> Vec<ExactRational> {
        let mut s = zero(len);
        for (i, c) in coeffs.iter().enumerate().take(len) {
            s[i] = c.clone();
        }
        s
    }

    /// `1 / (1 - a t^step)`.
    pub fn geometric(a: &ExactRational, step: usize, len: usize) -> Vec<ExactRational> {
        let mut s = zero(len);
        let mut pw = ExactRational::one();
        let mut i = 0;
        while i < len {
            s[i] = pw.clone();
            pw *= a;
            i += step;
        }
        s
    }

    pub fn mul(a: &[ExactRational], b: &[ExactRational]) -> Vec<ExactRational> {
        let len = a.len().min(b.len());
        let mut out = zero(len);
        for i in 0..len {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..len - i {
                out[i + j] += &a[i] * &b[j];
            }
        }
        out
    }

    pub fn add(a: &mut [ExactRational], b: &[ExactRational]) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }

    pub fn scale(a: &[ExactRational], c: &ExactRational) -> Vec<ExactRational> {
        a.iter().map(|x| x * c).collect()
    }

    /// Multiplication by `t^k`.
    pub fn shift(a: &[ExactRational], k: usize) -> Vec<ExactRational> {
        let mut out = zero(a.len());
        if k < a.len() {
            out[k..].clone_from_slice(&a[..a.len() - k]);
        }
        out
    }
}

/// `((p-1)/p)^k`, the measure of the unit torus.
fn torus_measure(p: u64, k: u32) -> ExactRational {
    let f = rational(BigInt::from(p - 1), BigInt::from(p));
    num_traits::pow(f, k as usize)
}

/// `V_n(p^r)` for `r = 1..=order`.
pub fn v_counts(counter: &Counter, n: u32, p: u64, order: u32) -> Result<Vec<BigInt>> {
    (1..=order)
        .map(|r| counter.count_v(n, &Modulus::prime_power(p, r)?))
        .collect()
}

/// `P(t) = ((p-1)/p)^{n-1} + Σ_{r≥1} V_n(p^r) (p^{-(n-1)} t)^r` to order `R`.
pub fn poincare_series(n: u32, p: u64, order: u32) -> Result<TruncatedSeries> {
    poincare_series_with(Counter::global(), n, p, order)
}

pub fn poincare_series_with(counter: &Counter, n: u32, p: u64, order: u32) -> Result<TruncatedSeries> {
    if order < 1 || n < 2 {
        return invalid("need n ≥ 2 and order ≥ 1");
    }
    let k = n - 1;
    let mut coefficients = vec![torus_measure(p, k)];
    for (i, v) in v_counts(counter, n, p, order)?.into_iter().enumerate() {
        let r = i as i64 + 1;
        coefficients.push(ExactRational::from_integer(v) * rational_pow(p, -(k as i64) * r));
    }
    Ok(TruncatedSeries { p, k, coefficients })
}

/// `Z(t) = (((p-1)/p)^k - (1-t) P(t)) / t`, one order shorter than `P`.
pub fn p_to_z(pser: &TruncatedSeries) -> Result<TruncatedSeries> {
    if pser.order() < 1 {
        return invalid("P(t) must have order at least 1");
    }
    let c = &pser.coefficients;
    if c[0] != torus_measure(pser.p, pser.k) {
        return invalid("constant term of P(t) is not the torus measure");
    }
    let coefficients = (1..c.len()).map(|j| &c[j - 1] - &c[j]).collect();
    Ok(TruncatedSeries {
        p: pser.p,
        k: pser.k,
        coefficients,
    })
}

/// Inverse of [`p_to_z`].
pub fn z_to_p(z: &TruncatedSeries) -> TruncatedSeries {
    let mut coefficients = vec![torus_measure(z.p, z.k)];
    for zj in &z.coefficients {
        let next = coefficients.last().unwrap() - zj;
        coefficients.push(next);
    }
    TruncatedSeries {
        p: z.p,
        k: z.k,
        coefficients,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// `A + B/(1 - t/p) + C/(1 - p^{1-n/2} t)`.
    #[serde(rename = "ABC")]
    Abc,
    /// `A + B/(1 - t/p) + C/(1 - t/p)^2`.
    #[serde(rename = "ABC2")]
    Abc2,
}

/// An exactly fitted law for `V_n(p^r)`, certified on every window point
/// from `valid_from` upward.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FittedForm {
    pub shape: Shape,
    pub n: u32,
    pub p: u64,
    #[serde(serialize_with = "crate::arith::ser_rational")]
    pub b: ExactRational,
    #[serde(serialize_with = "crate::arith::ser_rational")]
    pub c: ExactRational,
    #[serde(serialize_with = "crate::arith::ser_rationals")]
    pub pole_bases: Vec<ExactRational>,
    /// First `r` of the window where the law holds through the top.
    pub valid_from: u32,
    pub window: (u32, u32),
}

impl FittedForm {
    /// The law's prediction for `V_n(p^r)`.
    pub fn predict(&self, r: u32) -> ExactRational {
        let p = self.p;
        match self.shape {
            Shape::Abc => {
                &self.b * ExactRational::from_integer(pow_big(p, (self.n - 2) * r))
                    + &self.c * ExactRational::from_integer(pow_big(p, self.n / 2 * r))
            }
            Shape::Abc2 => (&self.c * rational_int(r + 1) + &self.b) * ExactRational::from_integer(pow_big(p, 2 * r)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fitted form serializes")
    }
}

fn check_window(counts: &[(u32, BigInt)]) -> Result<(u32, u32)> {
    if counts.len() < 2 {
        return invalid("need at least two consecutive counts");
    }
    if counts.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return invalid("counts must be for consecutive r");
    }
    Ok((counts[0].0, counts[counts.len() - 1].0))
}

/// Solves `x·a_i + y·b_i = v_i` for the two points.
fn solve2(
    a: [ExactRational; 2],
    b: [ExactRational; 2],
    v: [ExactRational; 2],
) -> Result<(ExactRational, ExactRational)> {
    let det = &a[0] * &b[1] - &a[1] * &b[0];
    if det.is_zero() {
        return invalid("singular fitting system");
    }
    let x = (&v[0] * &b[1] - &v[1] * &b[0]) / &det;
    let y = (&a[0] * &v[1] - &a[1] * &v[0]) / &det;
    Ok((x, y))
}

fn certify(form: &mut FittedForm, counts: &[(u32, BigInt)]) -> Result<()> {
    // the top two points are fitted exactly; walk down while the law holds
    let mut from = counts[counts.len() - 2].0;
    for (r, v) in counts.iter().rev().skip(2) {
        if form.predict(*r) == ExactRational::from_integer(v.clone()) {
            from = *r;
        } else {
            break;
        }
    }
    form.valid_from = from;
    if counts.len() > 2 && from == counts[counts.len() - 2].0 {
        return Err(Error::CertificationFailed { r: from - 1 });
    }
    Ok(())
}

/// Fits `V_n(p^r) = B p^{(n-2)r} + C p^{(n/2)r}` for even `n ≥ 6` from the
/// top of the window, then certifies downward.
pub fn fit_segers(n: u32, p: u64, counts: &[(u32, BigInt)]) -> Result<FittedForm> {
    if n % 2 == 1 || n < 6 {
        return invalid(format!(
            "the two-pole law needs even n ≥ 6, got {n}; use fit_segers_n4 for n = 4"
        ));
    }
    let window = check_window(counts)?;
    let top = &counts[counts.len() - 2..];
    let big = |e: u32| ExactRational::from_integer(pow_big(p, e));
    let (r0, r1) = (top[0].0, top[1].0);
    let (b, c) = solve2(
        [big((n - 2) * r0), big((n - 2) * r1)],
        [big(n / 2 * r0), big(n / 2 * r1)],
        [
            ExactRational::from_integer(top[0].1.clone()),
            ExactRational::from_integer(top[1].1.clone()),
        ],
    )?;
    let mut form = FittedForm {
        shape: Shape::Abc,
        n,
        p,
        b,
        c,
        pole_bases: vec![rational_pow(p, -1), rational_pow(p, 1 - (n / 2) as i64)],
        valid_from: r0,
        window,
    };
    certify(&mut form, counts)?;
    Ok(form)
}

/// Fits `V_4(p^r) = ((r+1)C + B) p^{2r}`.
pub fn fit_segers_n4(p: u64, counts: &[(u32, BigInt)]) -> Result<FittedForm> {
    let window = check_window(counts)?;
    let top = &counts[counts.len() - 2..];
    let (r0, r1) = (top[0].0, top[1].0);
    let y = |r: u32, v: &BigInt| ExactRational::new(v.clone(), pow_big(p, 2 * r));
    // V / p^{2r} = C·(r+1) + B
    let (c, b) = solve2(
        [rational_int(r0 + 1), rational_int(r1 + 1)],
        [rational_int(1), rational_int(1)],
        [y(r0, &top[0].1), y(r1, &top[1].1)],
    )?;
    let mut form = FittedForm {
        shape: Shape::Abc2,
        n: 4,
        p,
        b,
        c,
        pole_bases: vec![rational_pow(p, -1)],
        valid_from: r0,
        window,
    };
    certify(&mut form, counts)?;
    Ok(form)
}

/// The constant of the double pole for `n = 4`: `3(p-1)²/p²` for odd `p`,
/// and `3/2` for `p = 2`.
pub fn n4_double_pole_constant(p: u64) -> ExactRational {
    if p == 2 {
        return rational(3, 2);
    }
    let pm = BigInt::from(p - 1);
    ExactRational::new(3 * &pm * &pm, pow_big(p, 2))
}

/// Both sides of the good-reduction formula for `p^{n-1} Z(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HFormulaCheck {
    pub counted: TruncatedSeries,
    pub predicted: TruncatedSeries,
    pub matches: bool,
}

/// Right side of the good-reduction formula, expanded to order `R`.
pub fn h_formula_series(n: u32, p: u64, order: u32, big_n: &BigInt) -> Result<TruncatedSeries> {
    let len = order as usize + 1;
    let half = (n / 2) as i64;
    let binom = ExactRational::from_integer(binomial(n as i64 - 1, half - 1));
    let q = ExactRational::from_integer(igusa_constants(n, p)?.q);
    let pm = rational_int(p - 1);
    let nn = ExactRational::from_integer(big_n.clone());
    let inv_p = rational_pow(p, -1);
    let g1 = series::geometric(&inv_p, 1, len);
    let g2 = series::geometric(&rational_pow(p, 2 - n as i64), 2, len);

    let mut s = series::poly(&[ExactRational::from_integer(pow_big(p - 1, n - 1)) - &nn], len);
    let c1 = (&nn - &binom * &pm) * &pm * &inv_p;
    series::add(&mut s, &series::scale(&series::shift(&g1, 1), &c1));
    let c2 = &binom * (ExactRational::from_integer(pow_big(p, n - 2) - 1) - &q) * &pm * rational_pow(p, 2 - n as i64);
    series::add(&mut s, &series::scale(&series::shift(&g2, 2), &c2));
    let c3 = &binom * &q * &pm * &pm * rational_pow(p, 1 - n as i64);
    series::add(&mut s, &series::scale(&series::shift(&series::mul(&g1, &g2), 3), &c3));
    Ok(TruncatedSeries {
        p,
        k: n - 1,
        coefficients: s,
    })
}

/// Compares the expansion of the good-reduction formula with the counted
/// `p^{n-1} Z(t)`, coefficients `0..=R`.
pub fn verify_h_formula(n: u32, p: u64, order: u32) -> Result<HFormulaCheck> {
    if n % 2 == 1 || n < 6 {
        return invalid(format!("need even n ≥ 6, got {n}"));
    }
    if p < (n / 2 + 1) as u64 || !crate::arith::is_prime(p) {
        return invalid(format!("need a prime p ≥ n/2 + 1, got {p}"));
    }
    let pser = poincare_series(n, p, order + 1)?;
    let z = p_to_z(&pser)?;
    let scale = ExactRational::from_integer(pow_big(p, n - 1));
    let counted = TruncatedSeries {
        p,
        k: n - 1,
        coefficients: series::scale(&z.coefficients, &scale),
    };
    let big_n = torus_zero_count_mod_p(n, p)?;
    let predicted = h_formula_series(n, p, order, &big_n)?;
    let matches = counted == predicted;
    Ok(HFormulaCheck {
        counted,
        predicted,
        matches,
    })
}

/// The printed `Z(t)` for `n = 4`, expanded to order `R`.
pub fn n4_closed_z(p: u64, order: u32) -> TruncatedSeries {
    let len = order as usize + 1;
    let num = if p == 2 {
        // t³(1 - t + t²) / (2³ (2 - t)²) = t³(1 - t + t²)/32 · 1/(1 - t/2)²
        let c = rational(1, 32);
        vec![
            rational_int(0),
            rational_int(0),
            rational_int(0),
            c.clone(),
            -c.clone(),
            c,
        ]
    } else {
        let pb = BigInt::from(p);
        let f = rational(pb.clone() - 1, pow_big(p, 5));
        vec![
            &f * ExactRational::from_integer(&pb * &pb * (&pb * &pb - 5 * &pb + 7)),
            &f * ExactRational::from_integer(&pb * (&pb * &pb - 2 * &pb - 5)),
            &f * ExactRational::from_integer(&pb * &pb + &pb + 1),
        ]
    };
    double_pole(p, &num, len)
}

/// The printed `P(t)` for `n = 4`, expanded to order `R`.
pub fn n4_closed_p(p: u64, order: u32) -> TruncatedSeries {
    let len = order as usize + 1;
    let num = if p == 2 {
        // (4 + t² + t³ + t⁵) / (2³ (2 - t)²)
        let c = rational(1, 32);
        vec![
            &c * rational_int(4),
            rational_int(0),
            c.clone(),
            c.clone(),
            rational_int(0),
            c,
        ]
    } else {
        let pb = BigInt::from(p);
        let f = rational(pb.clone() - 1, pow_big(p, 5));
        vec![
            &f * ExactRational::from_integer(&pb * &pb * (&pb * &pb - 2 * &pb + 1)),
            &f * ExactRational::from_integer(&pb * (&pb * &pb - 2 * &pb - 2)),
            &f * ExactRational::from_integer(&pb * &pb + &pb + 1),
        ]
    };
    double_pole(p, &num, len)
}

fn double_pole(p: u64, num: &[ExactRational], len: usize) -> TruncatedSeries {
    let g = series::geometric(&rational_pow(p, -1), 1, len);
    let s = series::mul(&series::mul(&series::poly(num, len), &g), &g);
    TruncatedSeries {
        p,
        k: 3,
        coefficients: s,
    }
}

/// `S_n(p^r) = q²/φ(q) · (V_n(q) - p^{n-2} V_n(q/p))` for `r ≥ 2`.
pub fn sformula_from_counts(n: u32, p: u64, r: u32) -> Result<BigInt> {
    if r < 2 {
        return invalid("r must be at least 2");
    }
    let counter = Counter::global();
    let q = Modulus::prime_power(p, r)?;
    let hi = counter.count_v(n, &q)?;
    let lo = counter.count_v(n, &Modulus::prime_power(p, r - 1)?)?;
    let diff = hi - pow_big(p, n - 2) * lo;
    let s = ExactRational::new(diff * pow_big(p, 2 * r), BigInt::from(q.euler_phi()));
    if !s.is_integer() {
        return Err(Error::InvalidArgument(format!("non-integral S_{n}({}^{r})", p)));
    }
    Ok(s.to_integer())
}
