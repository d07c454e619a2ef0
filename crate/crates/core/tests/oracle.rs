use hl_irred_core::criterion::Pipeline;
use hl_irred_core::poly::{
    build_g, certify_degree_set, check_instance, select_primes, CoefficientProfile, IntPolynomial,
    Verdict, DEFAULT_PRIME_BUDGET,
};
use hl_irred_core::primes::build_table;
use hl_irred_core::smooth::SmallCaseTable;
use hl_irred_core::APSpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(alpha)_n F(x/d)` evaluated directly from the definition of `F`.
fn g_from_definition(alpha: i64, d: i64, a: &[i64], x: &BigRational) -> BigRational {
    let n = a.len() - 1;
    let rising =
        |j: usize| -> BigInt { (0..j).map(|i| BigInt::from(alpha + i as i64 * d)).product() };
    let y = x / BigRational::from_integer(BigInt::from(d));
    let mut f = BigRational::zero();
    let mut y_pow = BigRational::one();
    let mut d_pow = BigInt::one();
    for (j, &aj) in a.iter().enumerate() {
        let term = BigRational::new(BigInt::from(aj) * &d_pow, rising(j)) * &y_pow;
        f += term;
        y_pow *= &y;
        d_pow *= d;
    }
    f * BigRational::from_integer(rising(n))
}

#[test]
fn g_matches_its_defining_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for alpha in [1i64, 3] {
        let spec = APSpec::new(alpha as u64, 4).unwrap();
        for n in 1..=12 {
            for profile in [
                CoefficientProfile::ones(n),
                CoefficientProfile::random(n, &mut rng),
            ] {
                let g = build_g(&spec, n, &profile).unwrap();
                for x in [0i64, 1, -1, 2, -2, 4, 8] {
                    let xr = BigRational::from_integer(BigInt::from(x));
                    let lhs = BigRational::from_integer(g.eval(&BigInt::from(x)));
                    assert_eq!(
                        lhs,
                        g_from_definition(alpha, 4, profile.coefficients(), &xr)
                    );
                }
            }
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> IntPolynomial {
    loop {
        let c: Vec<i64> = (0..=deg).map(|_| rng.random_range(-6..=6)).collect();
        if c[deg] != 0 {
            return IntPolynomial::from_i64(&c);
        }
    }
}

#[test]
fn certified_sets_never_exclude_a_true_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..500 {
        let dg = rng.random_range(1..=12);
        let dh = rng.random_range(1..=12);
        let g = random_poly(&mut rng, dg);
        let h = random_poly(&mut rng, dh);
        let f = g.mul(&h);
        let primes = select_primes(&f, DEFAULT_PRIME_BUDGET, 1);
        for check_roots in [false, true] {
            let cert = certify_degree_set(&f, &primes, check_roots).unwrap();
            assert!(
                cert.set.contains(dg) && cert.set.contains(dh),
                "f={f} g={g} h={h}"
            );
            assert!(cert.set.is_complement_closed());
        }
    }
}

#[test]
fn oracle_agrees_with_certificates() {
    let table = build_table(1000).unwrap();
    let small = SmallCaseTable::scan(10_000).unwrap();
    let pipe = Pipeline::new(&table, &small, 25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut total, mut inconclusive) = (0, 0);
    for alpha in [1, 3] {
        let spec = APSpec::new(alpha, 4).unwrap();
        for n in 1..=25usize {
            assert!(pipe.verify_theorem(&spec, n as u64).unwrap().is_success());
            for _ in 0..20 {
                let profile = CoefficientProfile::random(n, &mut rng);
                let out = check_instance(&spec, n, &profile, DEFAULT_PRIME_BUDGET).unwrap();
                assert!(out.certificate.set.is_complement_closed());
                total += 1;
                match out.verdict {
                    Verdict::Fail { .. } => panic!("alpha={alpha} n={n} {profile:?}"),
                    Verdict::Inconclusive { .. } => inconclusive += 1,
                    Verdict::Pass => {}
                }
            }
        }
    }
    assert!(
        inconclusive * 5 < total,
        "{inconclusive}/{total} inconclusive"
    );
}
