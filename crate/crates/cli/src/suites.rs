//! The `verify` suites: sweeps over grid points, each row comparing a
//! computed quantity with the value it is expected to take.

use clap::{Args, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use kloo_core::arith::{is_prime, jacobi_p_over_3, pow_big, primes_in, rational, rational_to_string, Modulus};
use kloo_core::closed::{
    a_p, a_p_in_range, b_p, b_p_in_range, convert_s_to_t, estimate_pair, igusa_constants, prime_power_moment_closed,
    s5_closed, s6_closed, salie_moments, t_bound_check, Validity,
};
use kloo_core::counter::Counter;
use kloo_core::kloosterman::{kloosterman_crt, DEFAULT_PRECISION_BITS};
use kloo_core::moments::{moment_direct_range, moment_exact, Method};
use kloo_core::poincare::{
    fit_segers, fit_segers_n4, n4_closed_p, n4_closed_z, n4_double_pole_constant, p_to_z, poincare_series, v_counts,
    verify_h_formula,
};
use kloo_core::{Error, Result};

use crate::report::{sort_rows, timed, ReportRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Salie,
    S5,
    S6,
    Estimate,
    Primepower,
    Congruence,
    Tbound,
    Multiplicativity,
    Segers,
    Hformula,
    N4closed,
}

/// Grid flags shared by all suites; unset flags fall back to per-suite defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct Grid {
    #[arg(long)]
    pub pmax: Option<u64>,
    #[arg(long)]
    pub nmax: Option<u32>,
    #[arg(long)]
    pub rmax: Option<u32>,
    #[arg(long)]
    pub qmax: Option<u64>,
    /// Restrict to a single n.
    #[arg(long)]
    pub n: Option<u32>,
    /// Restrict to a single prime p.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
}

impl Grid {
    fn primes(&self, lo: u64, default_max: u64) -> Vec<u64> {
        match self.p {
            Some(p) => vec![p],
            None => primes_in(lo, self.pmax.unwrap_or(default_max)),
        }
    }

    fn ns(&self, lo: u32, default_max: u32) -> Vec<u32> {
        match self.n {
            Some(n) => vec![n],
            None => (lo..=self.nmax.unwrap_or(default_max)).collect(),
        }
    }

    fn qmax(&self) -> u64 {
        self.qmax.unwrap_or_else(|| Counter::global().limits().max_q)
    }
}

fn exact(n: u32, q: u64) -> Result<BigInt> {
    Ok(moment_exact(n, &Modulus::new(q)?)?.value)
}

const EXACT: &str = Method::ExactCount.as_str();

/// Evaluates `f` on every grid point in the pool, then sorts the rows.
fn sweep<T: Sync>(points: Vec<T>, f: impl Fn(&T) -> Result<Vec<ReportRow>> + Sync) -> Result<Vec<ReportRow>> {
    let chunks: Vec<Result<Vec<ReportRow>>> = points
        .par_iter()
        .map(|pt| {
            let (rows, ms) = timed(|| f(pt));
            rows.map(|rs| rs.into_iter().map(|r| r.elapsed(ms)).collect())
        })
        .collect();
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn run_suite(suite: Suite, grid: &Grid) -> Result<Vec<ReportRow>> {
    match suite {
        Suite::Salie => salie(grid),
        Suite::S5 => s5(grid),
        Suite::S6 => s6(grid),
        Suite::Estimate => estimate(grid),
        Suite::Primepower => primepower(grid),
        Suite::Congruence => congruence(grid),
        Suite::Tbound => tbound(grid),
        Suite::Multiplicativity => multiplicativity(grid),
        Suite::Segers => segers(grid),
        Suite::Hformula => hformula(grid),
        Suite::N4closed => n4closed(grid),
    }
}

fn salie(grid: &Grid) -> Result<Vec<ReportRow>> {
    sweep(grid.primes(5, 200), |&p| {
        let (s2, s3, s4) = salie_moments(p)?;
        [s2, s3, s4]
            .into_iter()
            .zip(2..)
            .map(|(closed, n)| Ok(ReportRow::new(n, EXACT, exact(n, p)?).q(p).p(p).r(1).closed(closed)))
            .collect()
    })
}

fn s5(grid: &Grid) -> Result<Vec<ReportRow>> {
    sweep(grid.primes(7, 200), |&p| {
        let a = a_p(p)?;
        Ok(vec![
            ReportRow::new(5, EXACT, exact(5, p)?)
                .q(p)
                .p(p)
                .r(1)
                .closed(s5_closed(p)?),
            ReportRow::new(5, "a_p-bound", &a).p(p).check(a_p_in_range(p, &a)),
        ])
    })
}

fn s6(grid: &Grid) -> Result<Vec<ReportRow>> {
    sweep(grid.primes(7, 200), |&p| {
        let b = b_p(p)?;
        let a = a_p(p)?;
        Ok(vec![
            ReportRow::new(6, EXACT, exact(6, p)?)
                .q(p)
                .p(p)
                .r(1)
                .closed(s6_closed(p)?),
            ReportRow::new(6, "b_p-bound", &b).p(p).check(b_p_in_range(p, &b)),
            ReportRow::new(5, "a_p-bound", &a).p(p).check(a_p_in_range(p, &a)),
        ])
    })
}

fn estimate(grid: &Grid) -> Result<Vec<ReportRow>> {
    let points: Vec<(u32, u64)> = grid
        .primes(3, 500)
        .into_iter()
        .flat_map(|p| grid.ns(4, 12).into_iter().map(move |n| (n, p)))
        .collect();
    sweep(points, |&(n, p)| {
        let s = exact(n, p)?;
        let ok = estimate_pair(n, p)?.holds_for(&s);
        Ok(vec![ReportRow::new(n, "estimate", s).q(p).p(p).r(1).check(ok)])
    })
}

fn primepower(grid: &Grid) -> Result<Vec<ReportRow>> {
    let qmax = grid.qmax();
    let rmax = grid.rmax.unwrap_or(8);
    let mut points = Vec::new();
    for p in grid.primes(2, 7) {
        for n in grid.ns(2, 9) {
            for r in 2..=rmax {
                let q = pow_big(p, r);
                if q > BigInt::from(qmax) {
                    break;
                }
                if let Validity::Closed(c) = prime_power_moment_closed(n, p, r)? {
                    points.push((n, p, r, c));
                }
            }
        }
    }
    sweep(points, |(n, p, r, c)| {
        let q = p.pow(*r);
        Ok(vec![ReportRow::new(*n, EXACT, exact(*n, q)?)
            .q(q)
            .p(*p)
            .r(*r)
            .closed(c)])
    })
}

fn moments_1_to(nmax: u32, p: u64) -> Result<Vec<BigInt>> {
    (1..=nmax).map(|n| exact(n, p)).collect()
}

fn congruence(grid: &Grid) -> Result<Vec<ReportRow>> {
    let nmax = grid.nmax.unwrap_or(12);
    sweep(grid.primes(2, 100), |&p| {
        let p2 = BigInt::from(p * p);
        let s = moments_1_to(nmax, p)?;
        let t = convert_s_to_t(p, &s)?;
        let mut rows = Vec::new();
        for n in 1..=nmax {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let want = BigInt::from(sign * p as i64 * (n as i64 - 1)).mod_floor(&p2);
            let got = s[n as usize - 1].mod_floor(&p2);
            rows.push(ReportRow::new(n, "s-congruence", got).q(p).p(p).closed(want));
            let tn = t[n as usize].mod_floor(&p2);
            rows.push(ReportRow::new(n, "t-congruence", tn).q(p).p(p).closed(&p2 - 1));
        }
        Ok(rows)
    })
}

fn tbound(grid: &Grid) -> Result<Vec<ReportRow>> {
    let nmax = grid.nmax.unwrap_or(12).max(4);
    // the default range starts at 3; an explicit --p 2 is honoured
    let primes = grid.primes(3, 100);
    sweep(primes, |&p| {
        let pb = BigInt::from(p);
        let s = moments_1_to(nmax, p)?;
        let t = convert_s_to_t(p, &s)?;
        let chi = BigInt::from(jacobi_p_over_3(p).unwrap_or(0));
        let expected = [pb.clone(), BigInt::zero(), BigInt::zero(), -chi * &pb * &pb, -&pb * &pb];
        let mut rows: Vec<ReportRow> = expected
            .into_iter()
            .enumerate()
            .map(|(n, e)| ReportRow::new(n as u32, "t-identity", &t[n] + 1).p(p).closed(e))
            .collect();
        for n in 1..=nmax {
            let ok = t_bound_check(n, p, &t[n as usize]);
            rows.push(ReportRow::new(n, "t-bound", &t[n as usize] + 1).p(p).check(ok));
        }
        Ok(rows)
    })
}

fn multiplicativity(grid: &Grid) -> Result<Vec<ReportRow>> {
    let nmax = grid.nmax.unwrap_or(6);
    let qs: Vec<u64> = match grid.qmax {
        Some(qmax) => (6..=qmax)
            .filter(|&q| kloo_core::arith::factorize(q).len() > 1)
            .collect(),
        None => vec![15, 21, 35, 45, 63, 77],
    };
    let bits = grid.precision_bits;
    sweep(qs, |&q| {
        let m = Modulus::new(q)?;
        let direct = moment_direct_range(nmax, &m, bits)?;
        let mut rows = Vec::new();
        for rec in direct {
            let mut product = BigInt::one();
            for c in m.components() {
                product *= exact(rec.n, c)?;
            }
            rows.push(
                ReportRow::new(rec.n, Method::DirectFloat.as_str(), rec.value)
                    .q(q)
                    .closed(product),
            );
        }
        for u in 0..q {
            let f = kloosterman_crt(u as i64, 1, &m)?;
            let value = format!("u={u};residual={:.3e}", f.residual());
            rows.push(ReportRow::new(1, "crt", value).q(q).check(f.holds()));
        }
        Ok(rows)
    })
}

/// Largest `r` with `p^r ≤ cap`.
fn max_exponent(p: u64, cap: u64) -> u32 {
    let mut r = 0;
    let mut q = 1u64;
    while q.saturating_mul(p) <= cap {
        q *= p;
        r += 1;
    }
    r
}

fn segers(grid: &Grid) -> Result<Vec<ReportRow>> {
    let default: &[(u32, u64)] = &[
        (4, 2),
        (4, 3),
        (4, 5),
        (6, 2),
        (6, 3),
        (6, 5),
        (6, 7),
        (8, 2),
        (8, 3),
        (8, 5),
    ];
    let points: Vec<(u32, u64)> = match (grid.n, grid.p) {
        (None, None) => default.to_vec(),
        (n, p) => {
            let ns = n.map_or_else(|| vec![4, 6, 8], |n| vec![n]);
            let ps = p.map_or_else(|| vec![2, 3, 5, 7], |p| vec![p]);
            ns.iter().flat_map(|&n| ps.iter().map(move |&p| (n, p))).collect()
        }
    };
    let cap = grid.qmax.unwrap_or(4096).min(grid.qmax());
    sweep(points, |&(n, p)| {
        let rmax = grid.rmax.unwrap_or_else(|| max_exponent(p, cap));
        let counts: Vec<(u32, BigInt)> = v_counts(Counter::global(), n, p, rmax)?
            .into_iter()
            .zip(1..)
            .map(|(v, r)| (r, v))
            .collect();
        let (fit, expected) = if n == 4 {
            (fit_segers_n4(p, &counts), n4_double_pole_constant(p))
        } else {
            (fit_segers(n, p, &counts), igusa_constants(n, p)?.c)
        };
        let fit = match fit {
            Ok(f) => f,
            Err(Error::CertificationFailed { r }) => {
                return Ok(vec![ReportRow::new(n, "fit-c", "uncertified")
                    .p(p)
                    .r(r + 1)
                    .check(false)])
            }
            Err(e) => return Err(e),
        };
        Ok(vec![
            ReportRow::new(n, "fit-c", rational_to_string(&fit.c))
                .p(p)
                .r(fit.valid_from)
                .closed(rational_to_string(&expected)),
            ReportRow::new(n, "fit-b", rational_to_string(&fit.b))
                .p(p)
                .r(fit.valid_from),
        ])
    })
}

fn hformula(grid: &Grid) -> Result<Vec<ReportRow>> {
    let points: Vec<(u32, u64, u32)> = match (grid.n, grid.p) {
        (None, None) => vec![(6, 5, 4), (6, 7, 3), (8, 5, 3)],
        (n, p) => vec![(n.unwrap_or(6), p.unwrap_or(5), grid.rmax.unwrap_or(3))],
    };
    sweep(points, |&(n, p, order)| {
        let check = verify_h_formula(n, p, order)?;
        Ok(check
            .counted
            .coefficients
            .iter()
            .zip(&check.predicted.coefficients)
            .zip(0..)
            .map(|((c, e), j)| {
                ReportRow::new(n, "h-formula", rational_to_string(c))
                    .p(p)
                    .r(j)
                    .closed(rational_to_string(e))
            })
            .collect())
    })
}

fn n4closed(grid: &Grid) -> Result<Vec<ReportRow>> {
    let order = grid.rmax.unwrap_or(8);
    let ps = match grid.p {
        Some(p) => vec![p],
        None => vec![2, 3, 5, 7],
    };
    sweep(ps, |&p| {
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        let pser = poincare_series(4, p, order + 1)?;
        let z = p_to_z(&pser)?;
        let mut rows = Vec::new();
        let pairs = [
            ("poincare-p", pser.truncate(order as usize), n4_closed_p(p, order)),
            ("poincare-z", z, n4_closed_z(p, order)),
        ];
        for (label, got, want) in pairs {
            for (j, (g, w)) in got.coefficients.iter().zip(&want.coefficients).enumerate() {
                rows.push(
                    ReportRow::new(4, label, rational_to_string(g))
                        .p(p)
                        .r(j as u32)
                        .closed(rational_to_string(w)),
                );
            }
        }
        if p == 2 {
            for r in 4..=order + 2 {
                let v = Counter::global().count_v(4, &Modulus::prime_power(2, r)?)?;
                let want = rational(3 * (r as i64 - 3), 2) * kloo_core::arith::rational_pow(2, 2 * r as i64);
                rows.push(
                    ReportRow::new(4, "v4-law", v)
                        .q(1 << r)
                        .p(2)
                        .r(r)
                        .closed(rational_to_string(&want)),
                );
            }
        }
        Ok(rows)
    })
}
