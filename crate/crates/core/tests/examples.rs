use num_bigint::BigInt;
use num_traits::Zero;

use kloo_core::arith::{binomial, crt_split_v, euler_phi, jacobi_p_over_3, mod_inverse, rational, Modulus};
use kloo_core::closed::{
    a_p, b_p, convert_s_to_t, estimate_pair, even_n_p2_correction, igusa_constants, moment_closed, odd_n_p2_closed,
    prime_power_closed, s5_closed, s6_closed, salie_moments, t_bound_check, Validity,
};
use kloo_core::counter::{
    count_v, count_v_bruteforce, count_w, count_w_bruteforce, hensel_ratio_check, singular_census,
    singular_census_bruteforce, torus_zero_count_mod_p,
};
use kloo_core::kloosterman::{
    check_symmetry_and_scaling, crt_parameters, frobenius_angles, kloosterman, kloosterman_crt, t_moment_float,
};
use kloo_core::moments::{moment_direct, moment_exact};
use kloo_core::poincare::{fit_segers, sformula_from_counts, v_counts};
use kloo_core::Error;

fn m(q: u64) -> Modulus {
    Modulus::new(q).unwrap()
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn exact(n: u32, q: u64) -> BigInt {
    moment_exact(n, &m(q)).unwrap().value
}

#[test]
fn arithmetic_helpers() {
    assert_eq!(mod_inverse(1, 7).unwrap(), 1);
    assert_eq!(mod_inverse(3, 7).unwrap(), 5);
    assert!(matches!(mod_inverse(2, 4), Err(Error::NonUnit { .. })));
    assert_eq!(euler_phi(&m(27)), big(18));
    assert_eq!(euler_phi(&m(12)), big(4));
    assert_eq!(jacobi_p_over_3(7).unwrap(), 1);
    assert_eq!(jacobi_p_over_3(5).unwrap(), -1);
    assert_eq!(binomial(6, 3), big(20));
    assert_eq!(binomial(6, -1), big(0));
    let (v1, v2) = crt_split_v(1, 3, 5).unwrap();
    assert_eq!((v1 * 25 + v2 * 9) % 15, 1);
    assert_eq!(crt_split_v(0, 3, 5).unwrap(), (0, 0));
    let f = m(360);
    assert_eq!(f.factors(), &[(2, 3), (3, 2), (5, 1)]);
}

#[test]
fn kloosterman_values() {
    assert_eq!(
        kloosterman(0, 0, &m(35), 128).unwrap().value.certify_integer(),
        Some(big(24))
    );
    assert_eq!(
        kloosterman(1, 1, &m(2), 128).unwrap().value.certify_integer(),
        Some(big(1))
    );
    let direct: f64 = (1..5)
        .map(|x: u64| {
            let xi = mod_inverse(x as i64, 5).unwrap();
            (2.0 * std::f64::consts::PI * ((x + xi) % 5) as f64 / 5.0).cos()
        })
        .sum();
    let k = kloosterman(1, 1, &m(5), 128).unwrap();
    assert!((k.to_f64() - direct).abs() < 1e-12);
    assert!(k.is_real());
    assert!(check_symmetry_and_scaling(2, 3, &m(7)).unwrap().passed());
    assert!(check_symmetry_and_scaling(3, 4, &m(9)).unwrap().passed());
    let zero_u = check_symmetry_and_scaling(0, 4, &m(9)).unwrap();
    assert!(zero_u.symmetric && zero_u.scaling.is_none());
    assert_eq!(crt_parameters(4, &m(49)), vec![(49, 4)]);
    for q in [15u64, 12] {
        let f = kloosterman_crt(1, 1, &m(q)).unwrap();
        assert_eq!(f.factors.len(), 2);
        assert!(f.holds());
    }
}

#[test]
fn angles_and_t_values() {
    let table = frobenius_angles(7, 128).unwrap();
    assert_eq!(table.len(), 6);
    for a in 1..7 {
        let k = kloosterman(a as i64, 1, &m(7), 128).unwrap().to_f64();
        let rebuilt = kloo_core::hp::to_f64(&table.reconstruct(a).unwrap());
        assert!((rebuilt - k).abs() < 1e-9, "a={a}");
    }
    let t0 = t_moment_float(0, &table).unwrap();
    assert!(t0.contains_integer(&big(6)));
    for n in [1, 2] {
        assert!(t_moment_float(n, &table).unwrap().contains_integer(&big(-1)));
    }
    assert!(t_moment_float(3, &table).unwrap().contains_integer(&big(-50)));
}

#[test]
fn counting() {
    for q in [2u64, 9, 25, 32, 49] {
        assert_eq!(count_w(2, &m(q)).unwrap(), big(1));
        assert_eq!(count_v(2, &m(q)).unwrap(), euler_phi(&m(q)));
    }
    assert_eq!(count_w(3, &m(7)).unwrap(), big(2));
    assert_eq!(count_w(3, &m(8)).unwrap(), big(0));
    assert_eq!(count_w(4, &m(9)).unwrap(), count_w_bruteforce(4, &m(9)).unwrap());
    assert_eq!(count_w(4, &m(8)).unwrap(), count_w_bruteforce(4, &m(8)).unwrap());
    assert_eq!(count_v(3, &m(25)).unwrap(), big(0));
    assert_eq!(count_v_bruteforce(3, &m(25)).unwrap(), big(0));
    assert_eq!(count_v(4, &m(8)).unwrap(), 4 * count_w(4, &m(8)).unwrap());
}

#[test]
fn singular_points_and_lifting() {
    assert_eq!(singular_census(5, 3).unwrap(), big(10));
    assert_eq!(
        singular_census(5, 3).unwrap(),
        singular_census_bruteforce(5, 3).unwrap()
    );
    assert_eq!(singular_census(7, 11).unwrap(), big(0));
    assert_eq!(
        singular_census(4, 5).unwrap(),
        singular_census_bruteforce(4, 5).unwrap()
    );
    assert!(hensel_ratio_check(5, 7, 2).unwrap());
    assert!(hensel_ratio_check(5, 2, 3).unwrap());
    assert!(!hensel_ratio_check(4, 3, 2).unwrap());
    assert_eq!(torus_zero_count_mod_p(2, 11).unwrap(), big(10));
    assert_eq!(
        torus_zero_count_mod_p(3, 5).unwrap(),
        count_v_bruteforce(3, &m(5)).unwrap()
    );
    assert_eq!(
        torus_zero_count_mod_p(4, 7).unwrap(),
        count_v_bruteforce(4, &m(7)).unwrap()
    );
}

#[test]
fn moments() {
    for q in [2u64, 12, 360, 1001] {
        assert!(exact(1, q).is_zero());
    }
    for (p, r) in [(3u64, 3u32), (5, 2), (2, 6)] {
        let q = p.pow(r);
        assert_eq!(exact(2, q), big((q * q - q * q / p) as i64));
    }
    assert_eq!(moment_direct(2, &m(11), 128).unwrap().value, big(110));
    assert_eq!(moment_direct(4, &m(7), 128).unwrap().value, big(518));
    assert_eq!(moment_direct(5, &m(9), 128).unwrap().value, exact(5, 9));
}

#[test]
fn closed_forms() {
    assert_eq!(salie_moments(5).unwrap(), (big(20), big(-15), big(160)));
    assert_eq!(salie_moments(7).unwrap(), (big(42), big(63), big(518)));
    assert_eq!(a_p(19).unwrap(), big(-22));
    assert_eq!(a_p(7).unwrap(), big(0));
    assert_eq!(s5_closed(7).unwrap(), big(1645));
    for p in [11u64, 19] {
        assert_eq!(s5_closed(p).unwrap(), exact(5, p));
    }
    let b7 = b_p(7).unwrap();
    assert!(&b7 * &b7 < big(4 * 343));
    for p in [7u64, 11, 13] {
        assert_eq!(s6_closed(p).unwrap(), exact(6, p));
    }
    let e6 = estimate_pair(6, 13).unwrap();
    assert_eq!(e6.bound_constant, rational(2, 1));
    assert_eq!(estimate_pair(5, 13).unwrap().bound_constant, rational(2, 1));
    for p in [5u64, 7, 97] {
        let e4 = estimate_pair(4, p).unwrap();
        assert!(e4.bound_constant.is_zero());
        assert_eq!(e4.main_term, rational(salie_moments(p).unwrap().2, 1));
    }
}

#[test]
fn t_values_from_moments() {
    for p in [5u64, 7, 11, 13] {
        let s: Vec<BigInt> = (1..=6).map(|n| exact(n, p)).collect();
        let t = convert_s_to_t(p, &s).unwrap();
        let pb = big(p as i64);
        assert_eq!(&t[0] + 1, pb);
        assert_eq!(&t[1] + 1, big(0));
        assert_eq!(&t[2] + 1, big(0));
        assert_eq!(&t[3] + 1, -big(jacobi_p_over_3(p).unwrap() as i64) * &pb * &pb);
        assert_eq!(&t[4] + 1, -&pb * &pb);
        assert!(t_bound_check(6, p, &t[6]));
    }
    let s: Vec<BigInt> = (1..=9).map(|n| exact(n, 11)).collect();
    let t = convert_s_to_t(11, &s).unwrap();
    assert!(t_bound_check(9, 11, &t[9]));
    assert!(t_bound_check(1, 11, &big(-1)));
    assert!(!t_bound_check(1, 11, &big(0)));
}

#[test]
fn prime_power_formulas() {
    assert_eq!(prime_power_closed(4, 5, 2).unwrap(), Validity::Closed(big(37500)));
    assert_eq!(prime_power_closed(4, 2, 5).unwrap(), Validity::Closed(big(98304)));
    assert_eq!(prime_power_closed(5, 7, 2).unwrap(), Validity::Closed(big(0)));
    assert_eq!(prime_power_closed(4, 2, 3).unwrap(), Validity::OutsideValidity);
    assert_eq!(odd_n_p2_closed(5, 3).unwrap(), big(-3645));
    assert_eq!(odd_n_p2_closed(7, 3).unwrap(), exact(7, 9));
    assert_eq!(odd_n_p2_closed(7, 11).unwrap(), big(0));
    for n in [8u32, 10] {
        assert_eq!(even_n_p2_correction(n, 3).unwrap(), exact(n, 9));
    }
    assert_eq!(
        even_n_p2_correction(6, 5).unwrap(),
        prime_power_closed(6, 5, 2).unwrap().value().unwrap().clone()
    );
    assert_eq!(moment_closed(4, &m(25)).unwrap(), Validity::Closed(big(37500)));
    let c = prime_power_closed(6, 2, 6).unwrap();
    assert_eq!(c, Validity::Closed(binomial(5, 2) * 2 * BigInt::from(2).pow(24)));
}

#[test]
fn igusa_and_fits() {
    let ig = igusa_constants(6, 3).unwrap();
    assert_eq!(ig.q, big(32));
    assert_eq!(ig.c, rational(-20, 9));
    assert_eq!(igusa_constants(6, 2).unwrap().c, rational(-10, 1));
    let counts: Vec<_> = v_counts(kloo_core::counter::Counter::global(), 6, 5, 3)
        .unwrap()
        .into_iter()
        .zip(1..)
        .map(|(v, r)| (r, v))
        .collect();
    assert_eq!(fit_segers(6, 5, &counts).unwrap().c, rational(-8, 5));
    assert_eq!(sformula_from_counts(4, 3, 2).unwrap(), exact(4, 9));
    assert_eq!(sformula_from_counts(6, 2, 6).unwrap(), exact(6, 64));
}
