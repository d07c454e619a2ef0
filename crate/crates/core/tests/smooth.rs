use hl_irred_core::primes::{build_table, SpfSieve};
use hl_irred_core::smooth::{
    resolve_exception, scan_smooth_pairs_with, small_k_exceptions, SmallCaseTable, PAIR_BOUND,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOUND: u64 = 200_000;

#[test]
fn pair_scan_is_closed_under_its_definition() {
    let sieve = SpfSieve::new(BOUND + 4).unwrap();
    let hits = scan_smooth_pairs_with(&sieve, BOUND, PAIR_BOUND).unwrap();
    assert!(hits.windows(2).all(|w| w[0] < w[1]));
    for &m in &hits {
        assert!(sieve.largest_prime_factor(m) <= PAIR_BOUND);
        assert!(sieve.largest_prime_factor(m + 4) <= PAIR_BOUND);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sampled = 0;
    while sampled < 10_000 {
        let m = 2 * rng.random_range(0..BOUND / 2) + 1;
        if hits.binary_search(&m).is_ok() {
            continue;
        }
        sampled += 1;
        let p = sieve
            .largest_prime_factor(m)
            .max(sieve.largest_prime_factor(m + 4));
        assert!(p > PAIR_BOUND, "m={m}");
    }
}

#[test]
fn window_hits_are_pair_hits() {
    let sieve = SpfSieve::new(BOUND + 24).unwrap();
    for k in 2..=6u64 {
        let pairs = scan_smooth_pairs_with(&sieve, BOUND, 4 * k + 3).unwrap();
        for hit in small_k_exceptions(k, BOUND, &sieve).unwrap() {
            assert!(pairs.binary_search(&hit.m).is_ok(), "k={k} m={}", hit.m);
            assert!(hit.max_prime <= 4 * k && hit.m > 4 * k && hit.m % 2 == 1);
        }
    }
}

#[test]
fn hits_resolve_to_verifying_certificates() {
    let table = build_table(1000).unwrap();
    let small = SmallCaseTable::scan(BOUND).unwrap();
    let hits: Vec<(u64, u64)> = small.all_hits().map(|h| (h.k, h.m)).collect();
    assert_eq!(hits, vec![(2, 21), (2, 45)]);
    for h in small.all_hits() {
        let cert = resolve_exception(h.m, h.k, &table).unwrap();
        assert!(cert.verified_by_phi_oracle);
        assert_eq!(cert.rule.prime(), Some(7));
    }
}
