//! Odd `m > 4k` with `P(Δ(m, 4, k)) <= 4k` for `2 <= k <= 6`, found by an
//! exhaustive scan over a smallest-prime-factor sieve.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::ap::{factor_window, APSpec, ProductWindow};
use crate::criterion::{find_criterion_prime, phi_check, verify_certificate};
use crate::criterion::{ExclusionCertificate, ExclusionRule};
use crate::error::{Error, Result};
use crate::primes::{PrimeTable, SpfSieve};

/// Smoothness bound for the consecutive-pair reduction (`4k <= 24`, no prime in `(23, 24]`).
pub const PAIR_BOUND: u64 = 23;
pub const SMALL_K: std::ops::RangeInclusive<u64> = 2..=6;
pub const DEFAULT_SCAN_BOUND: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmoothHit {
    pub m: u64,
    pub k: u64,
    pub max_prime: u64,
    /// Prime factorization of `Δ(m, 4, k)`.
    pub factorization: Vec<(u64, u32)>,
}

/// Odd `m <= bound` with `P(m (m + 4)) <= b`, ascending.
pub fn scan_smooth_pairs(bound: u64, b: u64) -> Result<Vec<u64>> {
    let sieve = SpfSieve::new(bound + 4)?;
    scan_smooth_pairs_with(&sieve, bound, b)
}

pub fn scan_smooth_pairs_with(sieve: &SpfSieve, bound: u64, b: u64) -> Result<Vec<u64>> {
    if sieve.limit() < bound + 4 {
        return Err(Error::TableTooSmall {
            required: bound + 4,
            limit: sieve.limit(),
        });
    }
    Ok((1..=bound)
        .step_by(2)
        .filter(|&m| sieve.is_smooth(m, b) && sieve.is_smooth(m + 4, b))
        .collect())
}

fn merge_factors(sieve: &SpfSieve, terms: impl Iterator<Item = u64>) -> Vec<(u64, u32)> {
    let mut acc = BTreeMap::new();
    for t in terms {
        for (p, e) in sieve.factor(t) {
            *acc.entry(p).or_insert(0) += e;
        }
    }
    acc.into_iter().collect()
}

/// All odd `m` in `(4k, bound]` with `P(Δ(m, 4, k)) <= 4k`.
pub fn small_k_exceptions(k: u64, bound: u64, sieve: &SpfSieve) -> Result<Vec<SmoothHit>> {
    if !SMALL_K.contains(&k) {
        return Err(Error::PrecondViolated(format!(
            "small-k scan needs 2 <= k <= 6, got {k}"
        )));
    }
    let top = bound + 4 * (k - 1);
    if sieve.limit() < top {
        return Err(Error::TableTooSmall {
            required: top,
            limit: sieve.limit(),
        });
    }
    let b = 4 * k;
    let mut hits = Vec::new();
    let mut m = 4 * k + 1;
    while m <= bound {
        // The last term is tested first: it is the one most often rough.
        if (0..k).rev().all(|i| sieve.is_smooth(m + 4 * i, b)) {
            let factorization = merge_factors(sieve, (0..k).map(|i| m + 4 * i));
            let max_prime = factorization.last().map_or(1, |&(p, _)| p);
            hits.push(SmoothHit {
                m,
                k,
                max_prime,
                factorization,
            });
        }
        m += 2;
    }
    Ok(hits)
}

/// The smooth hits for every `k` in `2..=6` up to a fixed horizon.
#[derive(Clone, Debug, Serialize)]
pub struct SmallCaseTable {
    scan_limit: u64,
    hits: BTreeMap<u64, Vec<SmoothHit>>,
}

impl SmallCaseTable {
    pub fn scan(bound: u64) -> Result<Self> {
        let sieve = SpfSieve::new(bound + 4 * (SMALL_K.end() - 1))?;
        Self::from_sieve(&sieve, bound)
    }

    pub fn from_sieve(sieve: &SpfSieve, bound: u64) -> Result<Self> {
        let hits = SMALL_K
            .map(|k| small_k_exceptions(k, bound, sieve).map(|h| (k, h)))
            .collect::<Result<_>>()?;
        Ok(Self {
            scan_limit: bound,
            hits,
        })
    }

    pub fn scan_limit(&self) -> u64 {
        self.scan_limit
    }

    pub fn hits(&self, k: u64) -> &[SmoothHit] {
        self.hits.get(&k).map_or(&[], Vec::as_slice)
    }

    pub fn all_hits(&self) -> impl Iterator<Item = &SmoothHit> {
        self.hits.values().flatten()
    }

    pub fn lookup(&self, k: u64, m: u64) -> Option<&SmoothHit> {
        let hits = self.hits.get(&k)?;
        hits.binary_search_by_key(&m, |h| h.m)
            .ok()
            .map(|i| &hits[i])
    }
}

/// Theorem instance `(alpha, n)` whose window start is `m`.
pub fn instance_of(m: u64, k: u64) -> Result<(APSpec, u64)> {
    let alpha = m % 4;
    if alpha.is_multiple_of(2) {
        return Err(Error::PrecondViolated(format!("m={m} is even")));
    }
    Ok((APSpec::new(alpha, 4)?, k + (m - alpha) / 4))
}

/// Certificate for a smooth hit, from the largest qualifying criterion prime.
pub fn resolve_exception(m: u64, k: u64, table: &PrimeTable) -> Result<ExclusionCertificate> {
    if !SMALL_K.contains(&k) || m.is_multiple_of(2) || m <= 4 * k {
        return Err(Error::NotAHit { m, k });
    }
    let fp = factor_window(&ProductWindow::new(m, 4, k)?, table)?;
    if fp.max_prime > 4 * k {
        return Err(Error::NotAHit { m, k });
    }
    let (spec, n) = instance_of(m, k)?;
    let (p, trace) = find_criterion_prime(&spec, n, k, table)?.ok_or(Error::NoWitness { m, k })?;
    let verified_by_phi_oracle = phi_check(&spec, n, k, p)?.0;
    let cert = ExclusionCertificate {
        n,
        k,
        spec,
        rule: ExclusionRule::CriterionPrime { p, trace },
        verified_by_phi_oracle,
    };
    verify_certificate(&cert, table)?;
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionRow {
    pub m: u64,
    pub k: u64,
    pub alpha: u64,
    pub n: u64,
    pub max_prime: u64,
    pub certificate_prime: u64,
}

pub fn exception_rows(small: &SmallCaseTable, table: &PrimeTable) -> Result<Vec<ExceptionRow>> {
    small
        .all_hits()
        .map(|h| {
            let cert = resolve_exception(h.m, h.k, table)?;
            Ok(ExceptionRow {
                m: h.m,
                k: h.k,
                alpha: cert.spec.alpha(),
                n: cert.n,
                max_prime: h.max_prime,
                certificate_prime: cert.rule.prime().unwrap_or(0),
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[ExceptionRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
