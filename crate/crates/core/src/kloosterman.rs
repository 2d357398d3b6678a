//! Direct evaluation of Kloosterman sums `K(u, v; q)`.
//!
//! All frequencies are multiples of `2π/q`, so one table of `cos(2πj/q)`
//! and `sin(2πj/q)` rounded to a `2^-bits` grid serves every sum over the
//! same modulus. Each entry is within one grid unit of the true value and
//! additions on the grid are exact, which gives the error bound
//! `φ(q) · 2^-bits` for a single sum.

use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{FromPrimitive, One, Zero};
use serde::Serialize;

use crate::arith::{mod_inverse, reduce, Modulus};
use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::hp::{self, RM};

pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Working precision for sums that feed an `n`-th power moment over `q`:
/// enough that the final integer rounding has residual well below 1/4.
pub fn moment_precision(n: u32, q: u64) -> u32 {
    let lq = (q as f64).log2();
    let need = n as f64 * (1.0 + 0.5 * lq) + lq;
    (need.ceil() as u32 + 64).max(DEFAULT_PRECISION_BITS)
}

/// `cos(2πj/q)` and `sin(2πj/q)` for `j` in `[0, q)`, on a `2^-bits` grid.
#[derive(Clone, Debug)]
pub struct CosTable {
    q: u64,
    bits: u32,
    cos: Vec<BigInt>,
    sin: Vec<BigInt>,
}

impl CosTable {
    pub fn new(q: u64, bits: u32) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidModulus(q));
        }
        let w = bits as usize + 64;
        let mut cc = hp::consts()?;
        let two_pi = cc.pi(w, RM).mul(&BigFloat::from_u64(2, w), w, RM);
        let step = hp::check(two_pi.div(&BigFloat::from_u64(q, w), w, RM))?;
        let n = q as usize;
        let mut cos = vec![BigInt::zero(); n];
        let mut sin = vec![BigInt::zero(); n];
        for j in 0..=n / 2 {
            let angle = step.mul(&BigFloat::from_u64(j as u64, w), w, RM);
            let c = hp::check(angle.cos(w, RM, &mut cc))?;
            let s = hp::check(angle.sin(w, RM, &mut cc))?;
            cos[j] = hp::to_fixed(&c, bits)?;
            sin[j] = hp::to_fixed(&s, bits)?;
            if j != 0 && n - j != j {
                cos[n - j] = cos[j].clone();
                sin[n - j] = -&sin[j];
            }
        }
        Ok(CosTable { q, bits, cos, sin })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn cos_raw(&self, j: u64) -> &BigInt {
        &self.cos[j as usize]
    }

    pub fn sin_raw(&self, j: u64) -> &BigInt {
        &self.sin[j as usize]
    }
}

/// One evaluated sum with its guaranteed enclosure.
#[derive(Clone, Debug)]
pub struct KloostermanValue {
    pub u: i64,
    pub v: i64,
    pub q: u64,
    /// Real part; its radius is the error bound.
    pub value: Ball,
    /// Imaginary part of the same complex sum, for the realness check.
    pub imag: Ball,
}

impl KloostermanValue {
    pub fn error_bound(&self) -> f64 {
        self.value.radius()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.midpoint()
    }

    /// The imaginary part is indistinguishable from zero.
    pub fn is_real(&self) -> bool {
        self.imag.contains_integer(&BigInt::zero())
    }
}

/// Reusable evaluator for a fixed modulus and precision.
#[derive(Clone, Debug)]
pub struct Evaluator {
    table: CosTable,
    units: Vec<(u64, u64)>,
}

impl Evaluator {
    pub fn new(q: &Modulus, precision_bits: u32) -> Result<Self> {
        if precision_bits < 64 {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least 64 bits, got {precision_bits}"
            )));
        }
        let m = q.value();
        let units = (1..=m)
            .filter_map(|x| mod_inverse(x as i64, m).ok().map(|y| (x % m, y)))
            .collect();
        Ok(Evaluator {
            table: CosTable::new(m, precision_bits)?,
            units,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.table.q
    }

    pub fn bits(&self) -> u32 {
        self.table.bits
    }

    pub fn units(&self) -> &[(u64, u64)] {
        &self.units
    }

    pub fn eval(&self, u: i64, v: i64) -> KloostermanValue {
        let q = self.table.q;
        let (ur, vr) = (reduce(u, q) as u128, reduce(v, q) as u128);
        let mut re = BigInt::zero();
        let mut im = BigInt::zero();
        for &(x, xi) in &self.units {
            let j = ((ur * x as u128 + vr * xi as u128) % q as u128) as u64;
            re += self.table.cos_raw(j);
            im += self.table.sin_raw(j);
        }
        let rad = BigUint::from(self.units.len());
        KloostermanValue {
            u,
            v,
            q,
            value: Ball::new(re, rad.clone(), self.table.bits),
            imag: Ball::new(im, rad, self.table.bits),
        }
    }
}

pub fn kloosterman(u: i64, v: i64, q: &Modulus, precision_bits: u32) -> Result<KloostermanValue> {
    Ok(Evaluator::new(q, precision_bits)?.eval(u, v))
}

/// Outcome of the symmetry `K(u,v) = K(v,u)` and, when `gcd(u, q) = 1`,
/// the scaling `K(u,v) = K(1,uv)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// `None` when the scaling property does not apply.
    pub scaling: Option<bool>,
    pub real: bool,
}

impl SymmetryCheck {
    pub fn passed(&self) -> bool {
        self.symmetric && self.real && self.scaling.unwrap_or(true)
    }
}

pub fn check_symmetry_and_scaling(u: i64, v: i64, q: &Modulus) -> Result<SymmetryCheck> {
    let ev = Evaluator::new(q, DEFAULT_PRECISION_BITS)?;
    let kuv = ev.eval(u, v);
    let kvu = ev.eval(v, u);
    let symmetric = kuv.value.overlaps(&kvu.value);
    let scaling = if mod_inverse(u, q.value()).is_ok() {
        let uv = (reduce(u, q.value()) as u128 * reduce(v, q.value()) as u128 % q.value() as u128) as i64;
        Some(kuv.value.overlaps(&ev.eval(1, uv).value))
    } else {
        None
    };
    Ok(SymmetryCheck {
        symmetric,
        scaling,
        real: kuv.is_real() && kvu.is_real(),
    })
}

/// `K(u, v; q)` against the product of its prime-power factors.
#[derive(Clone, Debug)]
pub struct CrtFactorization {
    /// `(p_i^{m_i}, v_i)`.
    pub factors: Vec<(u64, u64)>,
    pub direct: Ball,
    pub product: Ball,
}

impl CrtFactorization {
    pub fn residual(&self) -> f64 {
        (self.direct.midpoint() - self.product.midpoint()).abs()
    }

    pub fn error_budget(&self) -> f64 {
        self.direct.radius() + self.product.radius()
    }

    pub fn holds(&self) -> bool {
        self.direct.overlaps(&self.product)
    }
}

/// `v_i = v * (q/q_i)^{-2} mod q_i` for each prime-power component `q_i`.
pub fn crt_parameters(v: i64, q: &Modulus) -> Vec<(u64, u64)> {
    let m = q.value();
    q.components()
        .into_iter()
        .map(|qi| {
            let rest = m / qi;
            let vi = if qi == 1 {
                0
            } else {
                let inv = mod_inverse((rest % qi) as i64, qi).expect("coprime components") as u128;
                (reduce(v, qi) as u128 * inv % qi as u128 * inv % qi as u128) as u64
            };
            (qi, vi)
        })
        .collect()
}

pub fn kloosterman_crt(u: i64, v: i64, q: &Modulus) -> Result<CrtFactorization> {
    let bits = DEFAULT_PRECISION_BITS;
    let direct = kloosterman(u, v, q, bits)?.value;
    let factors = crt_parameters(v, q);
    let mut product = Ball::exact(&BigInt::one(), bits);
    for &(qi, vi) in &factors {
        let k = kloosterman(u, vi as i64, &Modulus::new(qi)?, bits)?;
        product = product.mul(&k.value);
    }
    Ok(CrtFactorization {
        factors,
        direct,
        product,
    })
}

/// Frobenius angles `θ_p(a) = arccos(-K(a) / (2√p))`, `a = 1..p-1`, where
/// `K(a) = K(1, a; p)`.
#[derive(Clone, Debug)]
pub struct AngleTable {
    pub p: u64,
    pub bits: u32,
    /// `angles[a - 1]`, each in `[0, π]`.
    pub angles: Vec<BigFloat>,
    /// The sums the angles were derived from.
    pub sums: Vec<Ball>,
}

impl AngleTable {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angle(&self, a: u64) -> &BigFloat {
        &self.angles[(a - 1) as usize]
    }

    /// `-2√p cos θ` at working precision, for comparison with `K(a)`.
    pub fn reconstruct(&self, a: u64) -> Result<BigFloat> {
        let w = self.bits as usize + 64;
        let mut cc = hp::consts()?;
        let c = hp::check(self.angle(a).cos(w, RM, &mut cc))?;
        let root = BigFloat::from_u64(self.p, w).sqrt(w, RM);
        hp::check(c.mul(&root, w, RM).mul(&BigFloat::from_i64(-2, w), w, RM))
    }
}

pub fn frobenius_angles(p: u64, precision_bits: u32) -> Result<AngleTable> {
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    let ev = Evaluator::new(&Modulus::new(p)?, precision_bits)?;
    let w = precision_bits as usize + 64;
    let mut cc = hp::consts()?;
    let two_root = BigFloat::from_u64(p, w)
        .sqrt(w, RM)
        .mul(&BigFloat::from_u64(2, w), w, RM);
    let four_p = Ball::exact(&BigInt::from(4 * p), precision_bits);
    let one = BigFloat::from_u64(1, w);
    let mut angles = Vec::with_capacity(p as usize - 1);
    let mut sums = Vec::with_capacity(p as usize - 1);
    for a in 1..p {
        let k = ev.eval(1, a as i64).value;
        let sq = k.mul(&k);
        let lower = sq.mid_raw() - BigInt::from_biguint(Sign::Plus, sq.rad_raw().clone());
        if lower > *four_p.mid_raw() {
            return Err(Error::WeilViolation { p, a });
        }
        let kf = hp::from_fixed(k.mid_raw(), precision_bits);
        let mut x = kf.neg().div(&two_root, w, RM);
        // rounding can push |x| a hair past 1
        x = x.clamp(&one.neg(), &one);
        angles.push(hp::check(x.acos(w, RM, &mut cc))?);
        sums.push(k);
    }
    Ok(AngleTable {
        p,
        bits: precision_bits,
        angles,
        sums,
    })
}

/// Monic Chebyshev polynomial of the second kind: `U_0 = 1`, `U_1 = x`,
/// `U_n = x U_{n-1} - U_{n-2}`.
pub fn chebyshev_u(n: u32, x: &BigFloat, w: usize) -> BigFloat {
    let mut prev = BigFloat::from_u64(1, w);
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..n {
        let next = x.mul(&cur, w, RM).sub(&prev, w, RM);
        prev = cur;
        cur = next;
    }
    cur
}

/// `g^n + g^{n-1}h + ... + h^n` for `g, h = √p e^{±iθ}`, evaluated as
/// `p^{n/2} Σ_j cos((2j - n)θ)`.
pub fn eigenvalue_power_sum(n: u32, theta: &BigFloat, p: u64, w: usize) -> Result<BigFloat> {
    let mut cc = hp::consts()?;
    let mut acc = BigFloat::from_u64(0, w);
    for j in 0..=n {
        let k = 2 * j as i64 - n as i64;
        let arg = theta.mul(&BigFloat::from_i64(k, w), w, RM);
        acc = acc.add(&hp::check(arg.cos(w, RM, &mut cc))?, w, RM);
    }
    let scale = BigFloat::from_u64(p, w).sqrt(w, RM).powi(n as usize, w, RM);
    hp::check(acc.mul(&scale, w, RM))
}

/// `T_n = Σ_a p^{n/2} U_n(2 cos θ_p(a))` from the angle table, as a ball.
pub fn t_moment_float(n: u32, angles: &AngleTable) -> Result<Ball> {
    let p = angles.p;
    let bits = angles.bits;
    let w = bits as usize + 64;
    let mut cc = hp::consts()?;
    let two = BigFloat::from_u64(2, w);
    let scale = BigFloat::from_u64(p, w).sqrt(w, RM).powi(n as usize, w, RM);
    let mut acc = BigFloat::from_u64(0, w);
    for theta in &angles.angles {
        let x = hp::check(theta.cos(w, RM, &mut cc))?.mul(&two, w, RM);
        acc = acc.add(&chebyshev_u(n, &x, w), w, RM);
    }
    let value = hp::check(acc.mul(&scale, w, RM))?;
    // x = 2cos θ = -K/√p inherits the error of K; U_n is Lipschitz on
    // [-2, 2] with constant n(n+1)(n+2)/6.
    let k_err = (p as f64) * 2f64.powi(-(bits as i32)) / (p as f64).sqrt() * 2.0;
    let float_err = 2f64.powi(-(w as i32) + 16);
    let nn = n as f64 + 1.0;
    let lipschitz = nn * nn * nn;
    let per_term = (p as f64).powf(n as f64 / 2.0) * (lipschitz * (k_err + float_err));
    let err = per_term * (p - 1) as f64;
    let rad = BigUint::from_f64((err * 2f64.powi(bits as i32)).ceil()).unwrap_or_default() + 1u32;
    Ok(Ball::new(hp::to_fixed(&value, bits)?, rad, bits))
}

/// Unordered pairs `λ1 < λ2` (residues mod `q`) whose sums `K(1, λ; q)`
/// cancel within their combined error bound, re-checked at twice the
/// precision.
pub fn negation_pairs(q: &Modulus, precision_bits: u32) -> Result<Vec<(u64, u64)>> {
    let m = q.value();
    let ev = Evaluator::new(q, precision_bits)?;
    let fine = Evaluator::new(q, precision_bits * 2)?;
    let vals: Vec<Ball> = (0..m).map(|l| ev.eval(1, l as i64).value).collect();
    let fine_vals: Vec<Ball> = (0..m).map(|l| fine.eval(1, l as i64).value).collect();
    let zero = BigInt::zero();
    let mut out = Vec::new();
    for a in 0..m as usize {
        for b in a + 1..m as usize {
            if vals[a].add(&vals[b]).contains_integer(&zero) && fine_vals[a].add(&fine_vals[b]).contains_integer(&zero)
            {
                out.push((a as u64, b as u64));
            }
        }
    }
    Ok(out)
}
