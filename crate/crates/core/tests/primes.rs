use hl_irred_core::interval::HpInterval;
use hl_irred_core::primes::{
    build_table, check_rr_envelope, gap_report, max_gap_in_class, theta_all, theta_exact, ClassGap,
    Mod4Class, LEMMA_GAP_THRESHOLDS,
};
use hl_irred_core::Error;

// Computed by an independent numpy sieve.
const GAPS: [(Mod4Class, u64, u64, (u64, u64)); 8] = [
    (Mod4Class::One, 120, 24, (113, 137)),
    (Mod4Class::One, 250, 32, (197, 229)),
    (Mod4Class::One, 2400, 60, (1801, 1861)),
    (Mod4Class::One, 1_000_000, 200, (183089, 183289)),
    (Mod4Class::Three, 120, 20, (83, 103)),
    (Mod4Class::Three, 250, 20, (83, 103)),
    (Mod4Class::Three, 2400, 40, (1327, 1367)),
    (Mod4Class::Three, 1_000_000, 200, (666203, 666403)),
];

#[test]
fn class_gaps_with_witnesses() {
    let table = build_table(1_001_000).unwrap();
    for (class, ceiling, gap, pair) in GAPS {
        let g = max_gap_in_class(&table, class, ceiling).unwrap();
        assert_eq!(
            g,
            ClassGap {
                max_gap: gap,
                witness: Some(pair)
            },
            "{class:?} {ceiling}"
        );
    }
    for class in Mod4Class::BOTH {
        let report = gap_report(&table, class);
        assert!(report.all_hold());
        assert_eq!(report.rows.len(), LEMMA_GAP_THRESHOLDS.len());
    }
}

#[test]
fn theta_is_consistent_and_monotone() {
    let table = build_table(200_000).unwrap();
    let prec = HpInterval::DEFAULT_PREC;
    let ln2 = HpInterval::ln2(prec);
    let mut prev = [HpInterval::from_int(0, prec), HpInterval::from_int(0, prec)];
    for nu in [10, 100, 1000, 5000, 10_000, 65_537, 100_000, 200_000] {
        let t1 = theta_exact(&table, nu, Mod4Class::One, prec).unwrap();
        let t3 = theta_exact(&table, nu, Mod4Class::Three, prec).unwrap();
        let all = theta_all(&table, nu, prec).unwrap();
        let sum = &(&t1 + &t3) + &ln2;
        let (slo, shi) = sum.scaled_endpoints();
        let (alo, ahi) = all.scaled_endpoints();
        assert!(slo <= ahi && alo <= shi, "nu={nu}");
        assert!(!t1.certainly_lt(&prev[0]) && !t3.certainly_lt(&prev[1]));
        prev = [t1, t3];
    }
    assert!(matches!(
        theta_exact(&table, 300_000, Mod4Class::One, prec),
        Err(Error::CeilingExceedsTable { .. })
    ));
}

#[test]
fn class_counts_stay_close() {
    let table = build_table(10_000_000).unwrap();
    let (mut c1, mut c3) = (0i64, 0i64);
    let (mut worst, mut at, mut most_negative) = (0i64, 0u64, 0i64);
    for &p in table.primes() {
        match p % 4 {
            1 => c1 += 1,
            3 => c3 += 1,
            _ => {}
        }
        if (c3 - c1).abs() > worst {
            (worst, at) = ((c3 - c1).abs(), p);
        }
        most_negative = most_negative.min(c3 - c1);
    }
    assert_eq!(c1 as usize, table.pi_class(10_000_000, Mod4Class::One));
    assert_eq!(c3 as usize, table.pi_class(10_000_000, Mod4Class::Three));
    // Observed bias below 10^7, matching an independent numpy sieve.
    assert_eq!((worst, at, most_negative), (376, 9_061_939, -8));
}

#[test]
fn envelope_holds_at_desk_scale() {
    let table = build_table(1_000_000).unwrap();
    for nu in [10_000, 100_000, 1_000_000] {
        let r = check_rr_envelope(&table, nu, &[nu]).unwrap();
        assert!(r.all_hold(), "nu={nu}");
    }
    assert!(matches!(
        check_rr_envelope(&table, 10_000, &[9_999]),
        Err(Error::SampleOutOfRange { .. })
    ));
}
