use hl_irred_core::criterion::{
    find_criterion_prime, phi_check, verify_certificate, Exclusion, ExclusionRule, Pipeline,
};
use hl_irred_core::primes::build_table;
use hl_irred_core::smooth::SmallCaseTable;
use hl_irred_core::APSpec;

/// `ord_p(Δ_j) k < j` for all `j <= n`, by walking every term.
fn naive_phi(alpha: u64, d: u64, n: u64, k: u64, p: u64) -> bool {
    let mut ord = 0;
    for j in 1..=n {
        let mut t = alpha + (j - 1) * d;
        while t.is_multiple_of(p) {
            t /= p;
            ord += 1;
        }
        if ord * k >= j {
            return false;
        }
    }
    true
}

#[test]
fn criterion_primes_pass_the_slope_test() {
    let table = build_table(1000).unwrap();
    for alpha in [1, 3] {
        let spec = APSpec::new(alpha, 4).unwrap();
        for n in 2..=200 {
            for k in 1..=n / 2 {
                let Some((p, trace)) = find_criterion_prime(&spec, n, k, &table).unwrap() else {
                    continue;
                };
                let (ok, again) = phi_check(&spec, n, k, p).unwrap();
                assert!(ok, "alpha={alpha} n={n} k={k} p={p}");
                assert_eq!(trace, again);
                assert!(naive_phi(alpha, 4, n, k, p));
                assert!(p * 3 > 4 * k);
            }
        }
    }
}

#[test]
fn general_modulus_criterion() {
    let table = build_table(1000).unwrap();
    for (alpha, d) in [(1, 3), (2, 3), (1, 5), (3, 7)] {
        let spec = APSpec::new(alpha, d).unwrap();
        for n in 2..=120 {
            for k in 1..=n / 2 {
                if let Some((p, _)) = find_criterion_prime(&spec, n, k, &table).unwrap() {
                    assert!(p > d && p >= (2 * k).min(d * (d - 1)));
                    assert!(
                        phi_check(&spec, n, k, p).unwrap().0,
                        "{alpha}/{d} n={n} k={k}"
                    );
                    assert!(naive_phi(alpha, d, n, k, p));
                }
            }
        }
    }
}

#[test]
fn pipeline_covers_small_degrees_and_certificates_reverify() {
    let table = build_table(10_000).unwrap();
    let small = SmallCaseTable::scan(100_000).unwrap();
    let pipe = Pipeline::new(&table, &small, 400).unwrap();
    let fresh = build_table(5_000).unwrap();
    for alpha in [1, 3] {
        let spec = APSpec::new(alpha, 4).unwrap();
        for n in 1..=400 {
            let report = pipe.verify_theorem(&spec, n).unwrap();
            assert!(
                report.is_success(),
                "alpha={alpha} n={n}: {:?}",
                report.undecided
            );
            assert_eq!(report.certificates.len() as u64, (n / 2).max(1));
            for cert in &report.certificates {
                verify_certificate(cert, &fresh).unwrap();
                match &cert.rule {
                    ExclusionRule::LinearFactorAllowed => assert_eq!(cert.k, 1),
                    ExclusionRule::CriterionPrime { .. } => assert!(cert.verified_by_phi_oracle),
                    other => panic!("unexpected rule {other:?}"),
                }
            }
        }
    }
}

#[test]
fn smooth_hits_are_resolved_by_the_pipeline() {
    let table = build_table(1000).unwrap();
    let small = SmallCaseTable::scan(1000).unwrap();
    let pipe = Pipeline::new(&table, &small, 20).unwrap();
    let spec = APSpec::new(1, 4).unwrap();
    for (n, m) in [(7, 21), (13, 45)] {
        assert!(
            pipe.small_case_rule(&spec, n, 2).unwrap().is_some(),
            "m={m}"
        );
        match pipe.exclude(&spec, n, 2).unwrap() {
            Exclusion::Certified(c) => assert_eq!(c.rule.prime(), Some(7)),
            Exclusion::Undecided { .. } => panic!("m={m} undecided"),
        }
    }
    // Any other odd m inside the scanned range has a large prime factor.
    match pipe.small_case_rule(&spec, 10, 2).unwrap() {
        Some(ExclusionRule::SmallCaseEmpty { scan_limit }) => assert_eq!(scan_limit, 1000),
        other => panic!("{other:?}"),
    }
}
