//! Exact counts `W_n(p^k)` and `V_n(p^k)`.
//!
//! `F_k(s, t)` counts unit `k`-tuples with `Σx ≡ s` and `Σx⁻¹ ≡ t`, and
//! `W_n = F_{n-1}(-1, -1)`. Since `F_k(cs, c⁻¹t) = F_k(s, t)` for every
//! unit `c`, the DP only stores one value per orbit of that action:
//!
//! * `s` a unit: the orbit of `(1, st)`, indexed by `st`;
//! * `t` a unit, `s` not: the orbit of `(st, 1)`, indexed by `st / p`;
//! * both divisible by `p`, `s = p^α s'`, `t = p^β t'`: the orbit of
//!   `(p^α, p^β u)` with `u ≡ s't' mod p^(r - max(α, β))`.
//!
//! The dense `(ℤ/q)²` DP and plain enumeration are kept as oracles.

use std::collections::HashMap;
use std::ops::AddAssign;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::arith::{mod_inverse, Modulus};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_Q: u64 = 16384;
pub const DEFAULT_BRUTE_FORCE_LIMIT: u128 = 100_000_000;
pub const MAX_Q_ENV: &str = "KLOO_MAX_Q";

/// Guards on problem size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest prime-power modulus the DP accepts.
    pub max_q: u64,
    /// Largest number of tuples an enumeration oracle may visit.
    pub brute_force: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_q: DEFAULT_MAX_Q,
            brute_force: DEFAULT_BRUTE_FORCE_LIMIT,
        }
    }
}

impl Limits {
    /// Defaults, with `max_q` taken from `KLOO_MAX_Q` when set.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(v) = std::env::var(MAX_Q_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            l.max_q = v;
        }
        l
    }
}

pub(crate) trait Count: Clone + Zero + for<'a> AddAssign<&'a Self> + Send + Sync {
    fn to_biguint(&self) -> BigUint;
}

impl Count for u128 {
    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Count for BigUint {
    fn to_biguint(&self) -> BigUint {
        self.clone()
    }
}

/// Orbit index space for a prime power `q = p^r`.
#[derive(Clone, Debug)]
pub struct OrbitSpace {
    p: u64,
    r: u32,
    q: u64,
    val: Vec<u32>,
    unit: Vec<u64>,
    pw: Vec<u64>,
    offset: Vec<usize>,
    reps: Vec<(u64, u64)>,
    valid: Vec<bool>,
    units: Vec<(u64, u64)>,
    groups: Vec<RowGroup>,
}

/// Consecutive orbit slots `start + u` with representatives
/// `(s0 + u·ds, t0 + u·dt)`.
#[derive(Clone, Debug)]
struct RowGroup {
    start: usize,
    len: usize,
    s0: u64,
    t0: u64,
    ds: u64,
    dt: u64,
}

impl OrbitSpace {
    pub fn new(p: u64, r: u32) -> Result<Self> {
        let m = Modulus::prime_power(p, r)?;
        let q = m.value();
        if q >= 1 << 32 {
            return Err(Error::GuardExceeded {
                q,
                limit: u32::MAX as u64,
            });
        }
        let pw: Vec<u64> = (0..=r).map(|i| p.pow(i)).collect();
        let mut val = vec![r; q as usize];
        let mut unit = vec![1u64; q as usize];
        for s in 1..q {
            let (mut v, mut u) = (0, s);
            while u % p == 0 {
                u /= p;
                v += 1;
            }
            val[s as usize] = v;
            unit[s as usize] = u;
        }
        let rr = r as usize + 1;
        let mut offset = vec![0usize; rr * rr];
        let mut reps: Vec<(u64, u64)> = (0..q).map(|w| (1 % q, w)).collect();
        reps.extend((0..q / p).map(|j| (p * j, 1 % q)));
        let mut valid = vec![true; reps.len()];
        let mut groups = vec![RowGroup {
            start: q as usize,
            len: (q / p) as usize,
            s0: 0,
            t0: 1 % q,
            ds: p % q,
            dt: 0,
        }];
        for a in 1..=r {
            for b in 1..=r {
                offset[a as usize * rr + b as usize] = reps.len();
                let e = r - a.max(b);
                let s0 = pw[a as usize] % q;
                let tb = pw[b as usize] % q;
                groups.push(if e == 0 {
                    RowGroup {
                        start: reps.len(),
                        len: 1,
                        s0,
                        t0: tb,
                        ds: 0,
                        dt: 0,
                    }
                } else {
                    RowGroup {
                        start: reps.len(),
                        len: pw[e as usize] as usize,
                        s0,
                        t0: 0,
                        ds: 0,
                        dt: tb,
                    }
                });
                for u in 0..pw[e as usize] {
                    let s = pw[a as usize] % q;
                    let t = (pw[b as usize] as u128 * u.max(1) as u128 % q as u128) as u64;
                    reps.push((s, t));
                    valid.push(e == 0 || u % p != 0);
                }
            }
        }
        let units = (1..q)
            .filter(|x| x % p != 0)
            .map(|x| (x, mod_inverse(x as i64, q).unwrap()))
            .collect();
        Ok(OrbitSpace {
            p,
            r,
            q,
            val,
            unit,
            pw,
            offset,
            reps,
            valid,
            units,
            groups,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn phi(&self) -> u64 {
        self.units.len() as u64
    }

    /// Index of the orbit containing `(s, t)` (both reduced mod `q`).
    #[inline]
    pub fn canon(&self, s: u64, t: u64) -> usize {
        let q = self.q;
        let vs = self.val[s as usize];
        if vs == 0 {
            return (s * t % q) as usize;
        }
        let vt = self.val[t as usize];
        if vt == 0 {
            return (q + s * t % q / self.p) as usize;
        }
        let e = self.r - vs.max(vt);
        let rr = self.r as usize + 1;
        let m = self.pw[e as usize];
        let u = (self.unit[s as usize] % m) * (self.unit[t as usize] % m) % m;
        self.offset[vs as usize * rr + vt as usize] + u as usize
    }

    /// A representative pair of orbit `o`, or `None` for unused slots.
    pub fn representative(&self, o: usize) -> Option<(u64, u64)> {
        self.valid[o].then(|| self.reps[o])
    }

    /// Number of pairs `(s, t)` in orbit `o` (0 for unused slots).
    pub fn orbit_size(&self, o: usize) -> u128 {
        if !self.valid[o] {
            return 0;
        }
        let q = self.q;
        if o < (q + q / self.p) as usize {
            return self.phi() as u128;
        }
        let (s, t) = self.reps[o];
        let phi_pow = |k: u32| -> u128 {
            if k == 0 {
                1
            } else {
                (self.p - 1) as u128 * self.p.pow(k - 1) as u128
            }
        };
        let (a, b) = (self.val[s as usize], self.val[t as usize]);
        let e = self.r - a.max(b);
        phi_pow(self.r - a) * phi_pow(self.r - b) / phi_pow(e)
    }

    fn initial<C: Count>(&self, one: C) -> Vec<C> {
        let mut f = vec![C::zero(); self.len()];
        f[(1 % self.q) as usize] = one;
        f
    }

    /// `F_{k+1}` from `F_k`.
    fn step<C: Count>(&self, f: &[C]) -> Vec<C> {
        let q = self.q;
        let n_a = q as usize;
        let mut g = vec![C::zero(); self.len()];
        for &(x, xi) in &self.units {
            let a = (1 + q - x) % q;
            if self.val[a as usize] == 0 {
                // (a, w - x⁻¹) lands on a·w + 1 - x⁻¹, linear in w
                let mut idx = ((1 + q - xi) % q) as usize;
                let step = a as usize;
                for gw in g[..n_a].iter_mut() {
                    *gw += &f[idx];
                    idx += step;
                    if idx >= n_a {
                        idx -= n_a;
                    }
                }
            } else {
                // a = 1 - x is divisible by p: while w - x⁻¹ stays a unit the
                // target is block B at q + (a/p)(w - x⁻¹) mod q/p
                let qp = q / self.p;
                let ap = (a / self.p) % qp.max(1);
                let mut j = if qp > 1 { ap * ((q - xi) % qp) % qp } else { 0 };
                let (target, mut wm) = (xi % self.p, 0);
                for (w, gw) in g[..n_a].iter_mut().enumerate() {
                    if wm == target {
                        *gw += &f[self.canon(a, (w as u64 + q - xi) % q)];
                    } else {
                        *gw += &f[n_a + j as usize];
                    }
                    j += ap;
                    if j >= qp {
                        j -= qp;
                    }
                    wm += 1;
                    if wm == self.p {
                        wm = 0;
                    }
                }
            }
        }
        // Every other row has s divisible by p, so s - x is a unit and the
        // target lies in block A. Within a group the rows are (s0 + u·ds,
        // t0 + u·dt) with ds·dt = 0, so the target index is linear in u.
        for grp in &self.groups {
            let rows = &mut g[grp.start..grp.start + grp.len];
            for &(x, xi) in &self.units {
                let a = (grp.s0 + q - x) % q;
                let b = (grp.t0 + q - xi) % q;
                let mut idx = (a * b % q) as usize;
                let stride = ((grp.ds * b + grp.dt * a) % q) as usize;
                for gw in rows.iter_mut() {
                    *gw += &f[idx];
                    idx += stride;
                    if idx >= n_a {
                        idx -= n_a;
                    }
                }
            }
        }
        for (o, v) in g.iter_mut().enumerate() {
            if !self.valid[o] {
                *v = C::zero();
            }
        }
        g
    }

    /// `F_{k+1}(s, t)` from `F_k`, one value only.
    fn single<C: Count>(&self, f: &[C], s: u64, t: u64) -> C {
        let q = self.q;
        let mut acc = C::zero();
        for &(x, xi) in &self.units {
            acc += &f[self.canon((s + q - x) % q, (t + q - xi) % q)];
        }
        acc
    }

    fn run_w<C: Count>(&self, nmax: u32, one: C) -> Vec<BigUint> {
        let q = self.q;
        let m1 = q - 1;
        let mut layer = self.initial(one);
        let mut out = vec![layer[self.canon(m1, m1)].to_biguint()];
        for n in 3..=nmax {
            out.push(self.single(&layer, m1, m1).to_biguint());
            if n < nmax {
                layer = self.step(&layer);
            }
        }
        out
    }

    fn fits_u128(&self, k: u32) -> bool {
        (self.phi() as f64).log2() * k as f64 <= 126.0
    }

    /// `[W_2, ..., W_nmax]`.
    pub fn w_values(&self, nmax: u32) -> Vec<BigUint> {
        if nmax < 2 {
            return Vec::new();
        }
        if self.fits_u128(nmax - 1) {
            self.run_w(nmax, 1u128)
        } else {
            self.run_w(nmax, BigUint::one())
        }
    }

    /// The full layer `F_k`, one entry per orbit.
    pub fn layer(&self, k: u32) -> Vec<BigUint> {
        fn go<C: Count>(sp: &OrbitSpace, k: u32, one: C) -> Vec<BigUint> {
            let mut f = sp.initial(one);
            for _ in 1..k {
                f = sp.step(&f);
            }
            f.iter().map(Count::to_biguint).collect()
        }
        assert!(k >= 1);
        if self.fits_u128(k) {
            go(self, k, 1u128)
        } else {
            go(self, k, BigUint::one())
        }
    }
}

/// The distribution of `(x mod q, x⁻¹ mod q)` over units `x`.
#[derive(Clone, Debug)]
pub struct PairDistribution {
    q: u64,
    units: Vec<(u64, u64)>,
}

impl PairDistribution {
    pub fn new(q: &Modulus) -> Self {
        let m = q.value();
        let units = (1..=m)
            .filter_map(|x| mod_inverse(x as i64, m).ok().map(|y| (x % m, y)))
            .collect();
        PairDistribution { q: m, units }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn count(&self, a: u64, b: u64) -> BigInt {
        let hit = mod_inverse(a as i64, self.q)
            .map(|inv| inv == b % self.q)
            .unwrap_or(false);
        BigInt::from(hit as u8)
    }

    pub fn total(&self) -> BigInt {
        BigInt::from(self.units.len())
    }

    pub fn support(&self) -> &[(u64, u64)] {
        &self.units
    }

    /// `F_k` on the full `q × q` grid, row-major in `s`.
    pub fn convolve(&self, k: u32) -> Vec<BigUint> {
        let q = self.q as usize;
        let mut f = vec![BigUint::zero(); q * q];
        f[0] = BigUint::one();
        for _ in 0..k {
            let mut g = vec![BigUint::zero(); q * q];
            for s in 0..q {
                for t in 0..q {
                    let v = &f[s * q + t];
                    if v.is_zero() {
                        continue;
                    }
                    for &(x, xi) in &self.units {
                        let idx = ((s + x as usize) % q) * q + (t + xi as usize) % q;
                        g[idx] += v;
                    }
                }
            }
            f = g;
        }
        f
    }
}

/// `W_n(q)` by the dense `(ℤ/q)²` DP.
pub fn count_w_dense(n: u32, q: &Modulus) -> Result<BigInt> {
    check_n(n)?;
    let m = q.value() as usize;
    let f = PairDistribution::new(q).convolve(n - 1);
    Ok(BigInt::from(f[(m - 1) * m + (m - 1)].clone()))
}

fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

fn enumeration_work(phi: u64, k: u32) -> u128 {
    (phi as u128).checked_pow(k).unwrap_or(u128::MAX)
}

/// Visits every unit `k`-tuple mod `q` and counts the ones accepted by
/// `leaf(Σx, Σx⁻¹)`.
fn enumerate_tuples(q: u64, k: u32, limit: u128, leaf: impl Fn(u64, u64) -> bool) -> Result<BigInt> {
    let units: Vec<(u64, u64)> = (1..=q)
        .filter_map(|x| mod_inverse(x as i64, q).ok().map(|y| (x % q, y)))
        .collect();
    let work = enumeration_work(units.len() as u64, k);
    if work > limit {
        return Err(Error::BruteForceGuard { work, limit });
    }
    fn rec(units: &[(u64, u64)], q: u64, depth: u32, s: u64, t: u64, leaf: &dyn Fn(u64, u64) -> bool) -> u64 {
        if depth == 0 {
            return leaf(s, t) as u64;
        }
        units
            .iter()
            .map(|&(x, xi)| rec(units, q, depth - 1, (s + x) % q, (t + xi) % q, leaf))
            .sum()
    }
    Ok(BigInt::from(rec(&units, q, k, 0, 0, &leaf)))
}

/// `W_n(q)` by enumerating all unit `(n-1)`-tuples.
pub fn count_w_bruteforce(n: u32, q: &Modulus) -> Result<BigInt> {
    count_w_bruteforce_with(n, q, DEFAULT_BRUTE_FORCE_LIMIT)
}

pub fn count_w_bruteforce_with(n: u32, q: &Modulus, limit: u128) -> Result<BigInt> {
    check_n(n)?;
    let m = q.value();
    enumerate_tuples(m, n - 1, limit, |s, t| s == m - 1 && t == m - 1)
}

/// `V_n(q)` by counting zeros of `(Σx)(Σx⁻¹) - 1` directly.
pub fn count_v_bruteforce(n: u32, q: &Modulus) -> Result<BigInt> {
    check_n(n)?;
    let m = q.value();
    enumerate_tuples(m, n - 1, DEFAULT_BRUTE_FORCE_LIMIT, |s, t| {
        (s as u128 * t as u128 % m as u128) as u64 == 1 % m
    })
}

/// Counts with guards and a per-modulus cache of `W_2..W_nmax`.
#[derive(Debug)]
pub struct Counter {
    limits: Limits,
    cache: Mutex<HashMap<u64, Arc<Vec<BigUint>>>>,
}

impl Counter {
    pub fn new(limits: Limits) -> Self {
        Counter {
            limits,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Shared instance configured from the environment.
    pub fn global() -> &'static Counter {
        static GLOBAL: OnceLock<Counter> = OnceLock::new();
        GLOBAL.get_or_init(|| Counter::new(Limits::from_env()))
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    fn guard(&self, q: u64) -> Result<()> {
        if q > self.limits.max_q {
            return Err(Error::GuardExceeded {
                q,
                limit: self.limits.max_q,
            });
        }
        Ok(())
    }

    /// `[W_2(q), ..., W_nmax(q)]` for a prime power `q`.
    pub fn w_values(&self, q: &Modulus, nmax: u32) -> Result<Arc<Vec<BigUint>>> {
        let (p, r) = q.expect_prime_power()?;
        check_n(nmax)?;
        self.guard(q.value())?;
        if let Some(v) = self.cache.lock().unwrap().get(&q.value()) {
            if v.len() + 1 >= nmax as usize {
                return Ok(v.clone());
            }
        }
        let vals = Arc::new(OrbitSpace::new(p, r)?.w_values(nmax));
        let mut cache = self.cache.lock().unwrap();
        let entry = cache.entry(q.value()).or_insert_with(|| vals.clone());
        if entry.len() < vals.len() {
            *entry = vals.clone();
        }
        Ok(vals)
    }

    /// `W_n(q)`. For `n = 4` past the DP guard the count falls back to
    /// [`count_v4_by_valuations`].
    pub fn count_w(&self, n: u32, q: &Modulus) -> Result<BigInt> {
        if n == 4 && q.value() > self.limits.max_q {
            let (p, r) = q.expect_prime_power()?;
            return Ok(count_v4_by_valuations(p, r)? / BigInt::from(q.euler_phi()));
        }
        let v = self.w_values(q, n)?;
        Ok(BigInt::from(v[n as usize - 2].clone()))
    }

    pub fn count_v(&self, n: u32, q: &Modulus) -> Result<BigInt> {
        Ok(self.count_w(n, q)? * BigInt::from(q.euler_phi()))
    }

    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }
}

pub fn count_w(n: u32, q: &Modulus) -> Result<BigInt> {
    Counter::global().count_w(n, q)
}

pub fn count_v(n: u32, q: &Modulus) -> Result<BigInt> {
    Counter::global().count_v(n, q)
}

/// `#{x ∈ (𝔽_p*)^{n-1} : (Σx)(Σx⁻¹) = 1}`, summed over the DP states with
/// `st ≡ 1`.
pub fn torus_zero_count_mod_p(n: u32, p: u64) -> Result<BigInt> {
    check_n(n)?;
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    Counter::global().guard(p)?;
    let sp = OrbitSpace::new(p, 1)?;
    let layer = sp.layer(n - 1);
    let mut total = BigUint::zero();
    for (o, v) in layer.iter().enumerate() {
        if let Some((s, t)) = sp.representative(o) {
            if s * t % p == 1 {
                total += v * BigUint::from(sp.orbit_size(o));
            }
        }
    }
    Ok(BigInt::from(total))
}

/// `N(n, p) = (p-1) Σ C(n-2, i)` over `0 ≤ i ≤ n-2` with `2i ≡ n-2` or
/// `2i ≡ n-4 (mod p)`.
pub fn singular_census(n: u32, p: u64) -> Result<BigInt> {
    check_n(n)?;
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    Ok(BigInt::from(p - 1) * census_index_sum(n, p, false))
}

/// `Σ C(n-2, i)` over the singular index set; with `starred` the two
/// integer solutions `i = n/2 - 1` and `i = n/2 - 2` are left out.
pub fn census_index_sum(n: u32, p: u64, starred: bool) -> BigInt {
    let p = p as i64;
    let n = n as i64;
    (0..=n - 2)
        .filter(|&i| (2 * i - (n - 2)).rem_euclid(p) == 0 || (2 * i - (n - 4)).rem_euclid(p) == 0)
        .filter(|&i| !(starred && (2 * i == n - 2 || 2 * i == n - 4)))
        .map(|i| crate::arith::binomial(n - 2, i))
        .sum()
}

/// Singular zeros of `g` on `(𝔽_p*)^{n-1}` by enumeration: `g = 0` and
/// every `∂g/∂x_i = Σx⁻¹ - Σx / x_i² = 0`.
pub fn singular_census_bruteforce(n: u32, p: u64) -> Result<BigInt> {
    check_n(n)?;
    let k = n - 1;
    let work = enumeration_work(p - 1, k);
    if work > DEFAULT_BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceGuard {
            work,
            limit: DEFAULT_BRUTE_FORCE_LIMIT,
        });
    }
    let inv: Vec<u64> = (0..p).map(|x| mod_inverse(x as i64, p).unwrap_or(0)).collect();
    let mut x = vec![1u64; k as usize];
    let mut count = 0u64;
    loop {
        let s = x.iter().sum::<u64>() % p;
        let t = x.iter().map(|&xi| inv[xi as usize]).sum::<u64>() % p;
        if s * t % p == 1 && x.iter().all(|&xi| (t * xi % p * xi) % p == s) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == x.len() {
                return Ok(BigInt::from(count));
            }
            x[i] += 1;
            if x[i] < p {
                break;
            }
            x[i] = 1;
            i += 1;
        }
    }
}

/// Whether `V_n(p^r) = p^{n-2} V_n(p^{r-1})`.
pub fn hensel_ratio_check(n: u32, p: u64, r: u32) -> Result<bool> {
    if r < 2 {
        return Err(Error::InvalidArgument("r must be at least 2".into()));
    }
    let hi = count_v(n, &Modulus::prime_power(p, r)?)?;
    let lo = count_v(n, &Modulus::prime_power(p, r - 1)?)?;
    Ok(hi == lo * BigInt::from(p).pow(n - 2))
}

/// `V_4(p^r)` from the factorization
/// `(x1+x2+x3)(1/x1+1/x2+1/x3) - 1 = (x1+x2)(x1+x3)(x2+x3) / (x1 x2 x3)`.
///
/// With `x1 = a·x3`, `x2 = b·x3` this is `φ(q)` times the number of unit
/// pairs with `v(a+1) + v(b+1) + v(a+b) ≥ r`. For fixed `a` the pairs
/// `(v(b+1), v(b+a))` are governed by `d = v(a-1)` through the ultrametric
/// inequality, so only the valuation classes of `a` need enumerating.
pub fn count_v4_by_valuations(p: u64, r: u32) -> Result<BigInt> {
    let q = Modulus::prime_power(p, r)?.value();
    let val = |x: u64| -> u32 {
        if x % q == 0 {
            return r;
        }
        let (mut v, mut y) = (0, x % q);
        while y % p == 0 {
            y /= p;
            v += 1;
        }
        v
    };
    // c[j] = #{b unit : v(b + 1) = j}
    let c: Vec<u128> = (0..=r)
        .map(|j| {
            let (p, pr) = (p as u128, |e: u32| (p as u128).pow(e));
            match j {
                0 => pr(r - 1) * (p - 2),
                j if j == r => 1,
                j => pr(r - j - 1) * (p - 1),
            }
        })
        .collect();
    let mut classes: HashMap<(u32, u32), u128> = HashMap::new();
    for a in (1..q).filter(|a| a % p != 0) {
        *classes.entry((val(a + 1), val(a + q - 1))).or_default() += 1;
    }
    let mut pairs = 0u128;
    for (&(i, d), &mult) in &classes {
        let need = r.saturating_sub(i);
        let mut hits = 0u128;
        for j1 in 0..=r {
            if j1 < d {
                if 2 * j1 >= need {
                    hits += c[j1 as usize];
                }
            } else if j1 > d {
                if j1 + d >= need {
                    hits += c[j1 as usize];
                }
            } else {
                let above: u128 = ((d + 1)..=r).map(|j| c[j as usize]).sum();
                for j2 in (d + 1)..=r {
                    if d + j2 >= need {
                        hits += c[j2 as usize];
                    }
                }
                if 2 * d >= need {
                    hits += c[d as usize] - above;
                }
            }
        }
        pairs += mult * hits;
    }
    Ok(BigInt::from(pairs) * BigInt::from((p - 1) as u128 * (p as u128).pow(r - 1)))
}

/// Sum of `orbit_size · F_k` over all orbits; equals `φ(q)^k`.
pub fn layer_mass(space: &OrbitSpace, layer: &[BigUint]) -> BigUint {
    layer
        .iter()
        .enumerate()
        .map(|(o, v)| v * BigUint::from(space.orbit_size(o)))
        .sum()
}
