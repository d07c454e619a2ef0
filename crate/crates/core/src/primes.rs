//! Prime tables, primes in the residue classes 1 and 3 mod 4, Chebyshev
//! sums over those classes, and the gap and envelope checks built on them.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{ln_biguint, HpInterval};

/// Largest sieve limit accepted by [`build_table`].
pub const DEFAULT_LIMIT_CEILING: u64 = 1_000_000_000;

/// Odd numbers per sieve segment.
const SEGMENT_ODDS: u64 = 1 << 16;

/// `(ceiling on the lower prime, claimed maximal gap)` for primes in one class mod 4.
pub const LEMMA_GAP_THRESHOLDS: [(u64, u64); 4] =
    [(120, 24), (250, 32), (2400, 60), (1_000_000, 200)];

/// Regimes `(k_min, k_end, m_ceiling)`: for `k_min <= k < k_end` and `m <= m_ceiling`
/// the class-gap table forces a prime into the window.
pub const SMALL_M_REGIMES: [(u64, u64, u64); 4] = [
    (6, 8, 120),
    (8, 15, 250),
    (15, 50, 2400),
    (50, u64::MAX, 1_000_000),
];

/// `2 * 1.798158`, the constant in the class-4 Chebyshev envelope, as `num / den`.
pub const RR_CONSTANT: (u64, u64) = (3_596_316, 1_000_000);

/// Envelope constants above are only claimed for `nu < 10^10`.
pub const RR_RANGE_END: u64 = 10_000_000_000;

/// A residue class of odd primes modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mod4Class {
    One,
    Three,
}

impl Mod4Class {
    pub const BOTH: [Mod4Class; 2] = [Mod4Class::One, Mod4Class::Three];

    pub fn residue(self) -> u64 {
        match self {
            Mod4Class::One => 1,
            Mod4Class::Three => 3,
        }
    }

    pub fn of(n: u64) -> Option<Self> {
        match n % 4 {
            1 => Some(Mod4Class::One),
            3 => Some(Mod4Class::Three),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    class1: Vec<u64>,
    class3: Vec<u64>,
}

impl PrimeTable {
    fn from_sorted(limit: u64, primes: Vec<u64>) -> Self {
        let class1 = primes.iter().copied().filter(|p| p % 4 == 1).collect();
        let class3 = primes.iter().copied().filter(|p| p % 4 == 3).collect();
        Self {
            limit,
            primes,
            class1,
            class3,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn class(&self, class: Mod4Class) -> &[u64] {
        match class {
            Mod4Class::One => &self.class1,
            Mod4Class::Three => &self.class3,
        }
    }

    /// Membership test; `n` must not exceed the limit.
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit);
        self.primes.binary_search(&n).is_ok()
    }

    pub fn pi(&self, nu: u64) -> usize {
        self.primes.partition_point(|&p| p <= nu)
    }

    pub fn pi_class(&self, nu: u64, class: Mod4Class) -> usize {
        self.class(class).partition_point(|&p| p <= nu)
    }

    /// Primes up to `nu`, for trial division.
    pub fn primes_up_to(&self, nu: u64) -> &[u64] {
        &self.primes[..self.pi(nu)]
    }

    /// Errors unless every prime up to `required` is present.
    pub fn ensure_covers(&self, required: u64) -> Result<()> {
        if required > self.limit {
            return Err(Error::TableTooSmall {
                required,
                limit: self.limit,
            });
        }
        Ok(())
    }
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Segmented sieve of Eratosthenes over the odd numbers.
pub fn build_table(limit: u64) -> Result<PrimeTable> {
    build_table_with_ceiling(limit, DEFAULT_LIMIT_CEILING)
}

pub fn build_table_with_ceiling(limit: u64, ceiling: u64) -> Result<PrimeTable> {
    if limit > ceiling {
        return Err(Error::LimitTooLarge { limit, ceiling });
    }
    if limit < 2 {
        return Err(Error::DomainError(format!(
            "prime table limit must be >= 2, got {limit}"
        )));
    }
    let base: Vec<u64> = simple_sieve(limit.isqrt())
        .into_iter()
        .filter(|&p| p > 2)
        .collect();
    let mut primes = vec![2u64];
    // Odd index i stands for the number 2i + 1.
    let last_index = (limit - 1) / 2;
    let mut seg_lo = 1u64;
    let mut marks = vec![true; SEGMENT_ODDS as usize];
    while seg_lo <= last_index {
        let seg_hi = (seg_lo + SEGMENT_ODDS - 1).min(last_index);
        let len = (seg_hi - seg_lo + 1) as usize;
        marks[..len].fill(true);
        let lo_num = 2 * seg_lo + 1;
        let hi_num = 2 * seg_hi + 1;
        for &p in &base {
            if p * p > hi_num {
                break;
            }
            let mut start = (p * p).max(lo_num.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut idx = ((start - 1) / 2 - seg_lo) as usize;
            while idx < len {
                marks[idx] = false;
                idx += p as usize;
            }
        }
        primes.extend(
            marks[..len]
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| 2 * (seg_lo + i as u64) + 1),
        );
        seg_lo = seg_hi + 1;
    }
    Ok(PrimeTable::from_sorted(limit, primes))
}

/// Smallest-prime-factor table for linear-time factoring of every `n <= limit`.
#[derive(Clone, Debug)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u64) -> Result<Self> {
        if limit >= u32::MAX as u64 {
            return Err(Error::LimitTooLarge {
                limit,
                ceiling: u32::MAX as u64 - 1,
            });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                if let Some(sq) = i.checked_mul(i) {
                    let mut j = sq;
                    while j <= n {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += i;
                    }
                }
            }
        }
        Ok(Self { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn smallest_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.smallest_factor(n);
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// `P(n)` with `P(1) = 1`.
    pub fn largest_prime_factor(&self, mut n: u64) -> u64 {
        let mut largest = 1;
        while n > 1 {
            let p = self.smallest_factor(n);
            largest = p;
            n /= p;
        }
        largest
    }

    /// True iff every prime factor of `n` is at most `bound`.
    pub fn is_smooth(&self, mut n: u64, bound: u64) -> bool {
        while n > 1 {
            let p = self.smallest_factor(n);
            if p > bound {
                return false;
            }
            n /= p;
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGap {
    pub max_gap: u64,
    /// Consecutive class primes `(p_i, p_{i+1})` attaining `max_gap`, earliest first.
    pub witness: Option<(u64, u64)>,
}

/// Largest gap `p_{i+1} - p_i` between consecutive primes of `class` with `p_i <= ceiling`.
pub fn max_gap_in_class(table: &PrimeTable, class: Mod4Class, ceiling: u64) -> Result<ClassGap> {
    let err = Error::CeilingExceedsTable {
        ceiling,
        limit: table.limit,
    };
    if ceiling > table.limit {
        return Err(err);
    }
    let primes = table.class(class);
    let count = primes.partition_point(|&p| p <= ceiling);
    if count == 0 {
        return Ok(ClassGap {
            max_gap: 0,
            witness: None,
        });
    }
    if count == primes.len() {
        // The successor of the last prime below the ceiling lies beyond the table.
        return Err(err);
    }
    let mut best = ClassGap {
        max_gap: 0,
        witness: None,
    };
    for w in primes[..=count].windows(2) {
        let gap = w[1] - w[0];
        if gap > best.max_gap {
            best = ClassGap {
                max_gap: gap,
                witness: Some((w[0], w[1])),
            };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub ceiling: u64,
    pub claimed_bound: u64,
    pub max_gap: u64,
    pub witness: Option<(u64, u64)>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub class_l: u64,
    pub rows: Vec<GapRow>,
    /// Ceilings that the table could not reach.
    pub skipped: Vec<u64>,
}

impl GapReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Evaluates [`LEMMA_GAP_THRESHOLDS`] for one class, skipping ceilings the table cannot reach.
pub fn gap_report(table: &PrimeTable, class: Mod4Class) -> GapReport {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (ceiling, claimed_bound) in LEMMA_GAP_THRESHOLDS {
        match max_gap_in_class(table, class, ceiling) {
            Ok(g) => rows.push(GapRow {
                ceiling,
                claimed_bound,
                max_gap: g.max_gap,
                witness: g.witness,
                holds: g.max_gap <= claimed_bound,
            }),
            Err(_) => skipped.push(ceiling),
        }
    }
    GapReport {
        class_l: class.residue(),
        rows,
        skipped,
    }
}

pub fn product_tree(xs: &[u64]) -> BigUint {
    match xs.len() {
        0 => BigUint::one(),
        n if n <= 16 => xs.iter().fold(BigUint::one(), |acc, &x| acc * x),
        n => {
            let (a, b) = xs.split_at(n / 2);
            product_tree(a) * product_tree(b)
        }
    }
}

/// `θ(nu, 4, l) = Σ_{p <= nu, p ≡ l (4)} log p`, enclosed at `prec` bits.
///
/// The primes are multiplied exactly and a single certified logarithm is taken,
/// so the only rounding is the final one.
pub fn theta_exact(table: &PrimeTable, nu: u64, class: Mod4Class, prec: u32) -> Result<HpInterval> {
    if nu > table.limit {
        return Err(Error::CeilingExceedsTable {
            ceiling: nu,
            limit: table.limit,
        });
    }
    let primes = table.class(class);
    let n = primes.partition_point(|&p| p <= nu);
    Ok(ln_biguint(&product_tree(&primes[..n]), prec))
}

/// `θ(nu)` over all primes.
pub fn theta_all(table: &PrimeTable, nu: u64, prec: u32) -> Result<HpInterval> {
    if nu > table.limit {
        return Err(Error::CeilingExceedsTable {
            ceiling: nu,
            limit: table.limit,
        });
    }
    Ok(ln_biguint(&product_tree(table.primes_up_to(nu)), prec))
}

#[derive(Clone, Debug, Serialize)]
pub struct RrRow {
    pub nu: u64,
    pub class_l: u64,
    pub theta_lower: f64,
    pub theta_upper: f64,
    pub envelope_lower: f64,
    pub envelope_upper: f64,
    /// `theta / (nu/2) - 1`, for reading off how much room is left.
    pub relative_deviation: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RrReport {
    pub nu0: u64,
    pub rows: Vec<RrRow>,
}

impl RrReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Checks `(nu/2)(1 - c/sqrt(nu0)) <= θ(nu,4,l) <= (nu/2)(1 + c/sqrt(nu0))`
/// with `c = 2 * 1.798158` for every sample point and both classes.
pub fn check_rr_envelope(table: &PrimeTable, nu0: u64, sample: &[u64]) -> Result<RrReport> {
    const PREC: u32 = 128;
    for &nu in sample {
        if nu < nu0 || nu > table.limit || nu >= RR_RANGE_END {
            return Err(Error::SampleOutOfRange { nu, nu0 });
        }
    }
    let c = HpInterval::from_u64_ratio(RR_CONSTANT.0, RR_CONSTANT.1, PREC);
    let slack = c.div(&HpInterval::from_int(nu0, PREC).sqrt());
    let one = HpInterval::from_int(1, PREC);
    let (f_lo, f_hi) = (&one - &slack, &one + &slack);
    let mut rows = Vec::new();
    for &nu in sample {
        let half = HpInterval::from_u64_ratio(nu, 2, PREC);
        let env_lo = &half * &f_lo;
        let env_hi = &half * &f_hi;
        for class in Mod4Class::BOTH {
            let theta = theta_exact(table, nu, class, PREC)?;
            let holds = env_lo.certainly_le(&theta) && theta.certainly_le(&env_hi);
            rows.push(RrRow {
                nu,
                class_l: class.residue(),
                theta_lower: theta.lower_f64(),
                theta_upper: theta.upper_f64(),
                envelope_lower: env_lo.upper_f64(),
                envelope_upper: env_hi.lower_f64(),
                relative_deviation: theta.midpoint_f64() / (nu as f64 / 2.0) - 1.0,
                holds,
            });
        }
    }
    Ok(RrReport { nu0, rows })
}

/// Precomputed class gaps for the four small-`m` regimes.
#[derive(Clone, Debug)]
pub struct SmallMCertifier {
    /// `gaps[r][c]`: max gap for regime `r`, class `c` (None if the table is too small).
    gaps: [[Option<u64>; 2]; 4],
}

impl SmallMCertifier {
    pub fn new(table: &PrimeTable) -> Self {
        let mut gaps = [[None; 2]; 4];
        for (r, &(_, _, ceiling)) in SMALL_M_REGIMES.iter().enumerate() {
            for (c, class) in Mod4Class::BOTH.into_iter().enumerate() {
                gaps[r][c] = max_gap_in_class(table, class, ceiling)
                    .ok()
                    .map(|g| g.max_gap);
            }
        }
        Self { gaps }
    }

    /// True iff `(k, m)` lies in a regime whose class gaps are at most `4k`,
    /// which forces a prime `≡ m (mod 4)` into `m, m+4, ..., m+4(k-1)`.
    pub fn covers(&self, k: u64, m: u64) -> bool {
        let Some(class) = Mod4Class::of(m) else {
            return false;
        };
        let c = match class {
            Mod4Class::One => 0,
            Mod4Class::Three => 1,
        };
        SMALL_M_REGIMES
            .iter()
            .enumerate()
            .any(|(r, &(k_min, k_end, ceiling))| {
                (k_min..k_end).contains(&k)
                    && m <= ceiling
                    && self.gaps[r][c].is_some_and(|g| g <= 4 * k)
            })
    }
}

pub fn corollary_small_m(table: &PrimeTable, k: u64, m: u64) -> bool {
    SmallMCertifier::new(table).covers(k, m)
}

/// True iff `10^6 < m <= 138 * 4k`, the range handled by the Chebyshev envelope.
pub fn corollary_mid_m(k: u64, m: u64) -> bool {
    m > 1_000_000 && (m as u128) <= 138 * 4 * k as u128
}

// ---------------------------------------------------------------------------
// on-disk cache
// ---------------------------------------------------------------------------

pub const CACHE_MAGIC: &[u8; 4] = b"HLPT";
pub const CACHE_VERSION: u32 = 1;

/// Writes `magic | version u32 | limit u64 | primes u64...`, all little-endian.
pub fn write_table_cache(path: &Path, table: &PrimeTable) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&table.limit.to_le_bytes())?;
    for p in &table.primes {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table_cache(path: &Path) -> Result<PrimeTable> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_table_cache(&bytes)
}

pub fn decode_table_cache(bytes: &[u8]) -> Result<PrimeTable> {
    if bytes.len() < 16 {
        return Err(Error::Cache("truncated header".into()));
    }
    if &bytes[..4] != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let limit = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let body = &bytes[16..];
    if !body.len().is_multiple_of(8) {
        return Err(Error::Cache(
            "body is not a whole number of u64 records".into(),
        ));
    }
    let primes: Vec<u64> = body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Cache("primes are not strictly increasing".into()));
    }
    if primes.last().is_some_and(|&p| p > limit) {
        return Err(Error::Cache("prime above the declared limit".into()));
    }
    if limit >= 2 && primes.first() != Some(&2) {
        return Err(Error::Cache("table does not start at 2".into()));
    }
    Ok(PrimeTable::from_sorted(limit, primes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        let t = build_table(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        assert_eq!(t.class(Mod4Class::One), &[5]);
        assert_eq!(t.class(Mod4Class::Three), &[3, 7]);
        let t = build_table(30).unwrap();
        assert_eq!(t.class(Mod4Class::One), &[5, 13, 17, 29]);
        assert_eq!(t.class(Mod4Class::Three), &[3, 7, 11, 19, 23]);
        assert_eq!(build_table(2).unwrap().primes(), &[2]);
        assert_eq!(build_table(3).unwrap().primes(), &[2, 3]);
    }

    #[test]
    fn segmented_matches_simple_sieve() {
        for limit in [2, 3, 4, 97, 1000, 131_071, 131_072, 131_073, 400_000] {
            assert_eq!(
                build_table(limit).unwrap().primes(),
                simple_sieve(limit).as_slice()
            );
        }
        assert_eq!(build_table(1_000_000).unwrap().primes().len(), 78_498);
    }

    #[test]
    fn limit_budget() {
        assert!(matches!(
            build_table(DEFAULT_LIMIT_CEILING + 1),
            Err(Error::LimitTooLarge { .. })
        ));
        assert!(build_table(1).is_err());
    }

    #[test]
    fn spf_sieve() {
        let s = SpfSieve::new(3000).unwrap();
        assert_eq!(s.factor(525), vec![(3, 1), (5, 2), (7, 1)]);
        assert_eq!(s.largest_prime_factor(1), 1);
        assert_eq!(s.largest_prime_factor(2205), 7);
        assert!(s.is_smooth(2205, 7));
        assert!(!s.is_smooth(2205, 6));
        assert!(s.is_smooth(1, 2));
    }

    #[test]
    fn class_gaps_at_small_ceiling() {
        let t = build_table(2000).unwrap();
        let g1 = max_gap_in_class(&t, Mod4Class::One, 120).unwrap();
        assert_eq!(
            g1,
            ClassGap {
                max_gap: 24,
                witness: Some((113, 137))
            }
        );
        let g3 = max_gap_in_class(&t, Mod4Class::Three, 120).unwrap();
        assert_eq!(
            g3,
            ClassGap {
                max_gap: 20,
                witness: Some((83, 103))
            }
        );
        assert!(matches!(
            max_gap_in_class(&t, Mod4Class::One, 2001),
            Err(Error::CeilingExceedsTable { .. })
        ));
        // 1997 is the last class-1 prime up to 2000 and its successor is missing.
        assert!(max_gap_in_class(&t, Mod4Class::One, 1999).is_err());
    }

    #[test]
    fn theta_small_values() {
        let t = build_table(100).unwrap();
        let th = theta_exact(&t, 5, Mod4Class::One, 96).unwrap();
        assert!(th.lower_f64() <= 5f64.ln() && 5f64.ln() <= th.upper_f64());
        let th = theta_exact(&t, 10, Mod4Class::Three, 96).unwrap();
        let expect = 3f64.ln() + 7f64.ln();
        assert!((th.midpoint_f64() - expect).abs() < 1e-12);
        assert!((expect - 3.0445).abs() < 1e-4);
    }

    #[test]
    fn envelope_range_checks() {
        let t = build_table(20_000).unwrap();
        assert!(matches!(
            check_rr_envelope(&t, 10_000, &[9_999]),
            Err(Error::SampleOutOfRange { .. })
        ));
        let r = check_rr_envelope(&t, 10_000, &[10_000]).unwrap();
        assert!(r.all_hold());
        let three = r.rows.iter().find(|r| r.class_l == 3).unwrap();
        assert!((three.envelope_lower - 4820.2).abs() < 0.1);
        assert!(three.theta_lower > three.envelope_lower);
    }

    #[test]
    fn mid_m_regime() {
        assert!(corollary_mid_m(2000, 1_000_001));
        assert!(!corollary_mid_m(2000, 1_104_001));
        assert!(!corollary_mid_m(400, 1_000_000));
    }

    #[test]
    fn small_m_regime_boundaries() {
        let t = build_table(1_001_000).unwrap();
        let c = SmallMCertifier::new(&t);
        assert!(c.covers(6, 119));
        assert!(c.covers(50, 999_999));
        assert!(!c.covers(6, 121));
        assert!(!c.covers(5, 21));
    }

    #[test]
    fn cache_rejects_corruption() {
        let t = build_table(1000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.hlpt");
        write_table_cache(&path, &t).unwrap();
        assert_eq!(read_table_cache(&path).unwrap(), t);

        let mut bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"HLPT");
        assert_eq!(bytes.len(), 16 + 8 * t.primes().len());
        bytes.swap(16, 24); // 2 and 3 swapped: no longer increasing
        assert!(matches!(decode_table_cache(&bytes), Err(Error::Cache(_))));
        bytes[0] = b'X';
        assert!(matches!(decode_table_cache(&bytes), Err(Error::Cache(_))));
        assert!(decode_table_cache(&bytes[..10]).is_err());
    }
}
