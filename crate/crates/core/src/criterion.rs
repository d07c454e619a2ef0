//! Factor-degree exclusion: the prime criterion, its slope oracle, and the
//! per-`(n, k)` pipeline for `d = 4`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::ap::{factor_u64, factor_window, first_index_divisible, APSpec, ProductWindow};
use crate::arith::{is_prime_u64, valuation};
use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::smooth::SmallCaseTable;

/// Where the slope `φ_j = ord_p(Δ_j) / j` peaks for a given prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaTrace {
    pub p: u64,
    /// Smallest `j` with `p | alpha + (j-1) d`.
    pub j0: u64,
    /// `(alpha + (j0-1) d) / p`.
    pub l0: u64,
    pub worst_j: u64,
    pub worst_phi_num: u64,
    pub worst_phi_den: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ExclusionRule {
    CriterionPrime {
        p: u64,
        trace: LemmaTrace,
    },
    OmegaGap {
        p: u64,
        trace: LemmaTrace,
        omega: usize,
        omega_1: usize,
    },
    SmallCaseEmpty {
        scan_limit: u64,
    },
    LinearFactorAllowed,
}

impl ExclusionRule {
    pub fn prime(&self) -> Option<u64> {
        match self {
            Self::CriterionPrime { p, .. } | Self::OmegaGap { p, .. } => Some(*p),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::CriterionPrime { .. } => "CriterionPrime",
            Self::OmegaGap { .. } => "OmegaGap",
            Self::SmallCaseEmpty { .. } => "SmallCaseEmpty",
            Self::LinearFactorAllowed => "LinearFactorAllowed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExclusionCertificate {
    pub n: u64,
    pub k: u64,
    pub spec: APSpec,
    pub rule: ExclusionRule,
    pub verified_by_phi_oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status")]
pub enum Exclusion {
    Certified(ExclusionCertificate),
    Undecided { n: u64, k: u64 },
}

/// `min(2k, d(d-1))`, the lower bound the witness prime must reach.
pub fn criterion_threshold(k: u64, d: u64) -> u64 {
    (2 * k).min(d * (d - 1))
}

/// True if `p` divides none of `alpha, alpha + d, ..., alpha + (k-1) d`.
fn misses_head(spec: &APSpec, k: u64, p: u64) -> bool {
    first_index_divisible(spec.alpha(), spec.d(), p) >= k
}

/// Largest prime meeting the criterion hypotheses for a degree-`k` factor of
/// the degree-`n` polynomial, with its slope trace.
pub fn find_criterion_prime(
    spec: &APSpec,
    n: u64,
    k: u64,
    table: &PrimeTable,
) -> Result<Option<(u64, LemmaTrace)>> {
    if k == 0 || 2 * k > n {
        return Err(Error::PrecondViolated(format!(
            "need 1 <= k <= n/2 (n={n}, k={k})"
        )));
    }
    let d = spec.d();
    let threshold = criterion_threshold(k, d);
    let mut best = 0u64;
    for i in (n - k..n).rev() {
        let term = spec.term(i);
        if term <= best {
            break;
        }
        for &(p, _) in factor_u64(term, table)?.iter().rev() {
            if p <= best {
                break;
            }
            if p > d && p >= threshold && misses_head(spec, k, p) {
                best = p;
                break;
            }
        }
    }
    if best == 0 {
        return Ok(None);
    }
    let (_, trace) = phi_check(spec, n, k, best)?;
    Ok(Some((best, trace)))
}

/// Checks `ord_p(Δ_j) k < j` for every `1 <= j <= n`, where `Δ_j = (alpha)_j`.
///
/// `ord_p(Δ_j)` only changes at `j = j0 + p s`, so only those `j` are visited.
pub fn phi_check(spec: &APSpec, n: u64, k: u64, p: u64) -> Result<(bool, LemmaTrace)> {
    let (alpha, d) = (spec.alpha(), spec.d());
    if p < 2 || d % p == 0 {
        return Err(Error::PrecondViolated(format!("p={p} divides d={d}")));
    }
    let i0 = first_index_divisible(alpha, d, p);
    if i0 < k {
        return Err(Error::PrecondViolated(format!(
            "p={p} divides the head term alpha + {i0} d for k={k}"
        )));
    }
    let j0 = i0 + 1;
    let mut trace = LemmaTrace {
        p,
        j0,
        l0: spec.term(i0) / p,
        worst_j: 1,
        worst_phi_num: 0,
        worst_phi_den: 1,
    };
    let mut ok = true;
    let mut ord = 0u64;
    let mut i = i0;
    while i < n {
        ord += valuation(spec.term(i), p) as u64;
        let j = i + 1;
        if ord * k >= j {
            ok = false;
        }
        if ord * trace.worst_phi_den > trace.worst_phi_num * j {
            trace.worst_j = j;
            trace.worst_phi_num = ord;
            trace.worst_phi_den = j;
        }
        i += p;
    }
    Ok((ok, trace))
}

/// `max(ω(Δ(1, 4, k)), ω(Δ(3, 4, k)))`.
pub fn omega_1(k: u64, table: &PrimeTable) -> Result<usize> {
    let mut best = 0;
    for alpha in [1, 3] {
        let w = ProductWindow::new(alpha, 4, k)?;
        best = best.max(factor_window(&w, table)?.omega);
    }
    Ok(best)
}

/// `ω_1(k)` for `k = 0..=kmax`, built incrementally; entry 0 is 0.
pub fn omega_1_table(kmax: u64, table: &PrimeTable) -> Result<Vec<usize>> {
    let mut sets = [BTreeSet::new(), BTreeSet::new()];
    let mut out = vec![0];
    for k in 1..=kmax {
        for (set, alpha) in sets.iter_mut().zip([1u64, 3]) {
            for (p, _) in factor_u64(alpha + 4 * (k - 1), table)? {
                set.insert(p);
            }
        }
        out.push(sets[0].len().max(sets[1].len()));
    }
    Ok(out)
}

/// Everything the `d = 4` pipeline needs besides `(spec, n, k)`.
pub struct Pipeline<'a> {
    table: &'a PrimeTable,
    small: &'a SmallCaseTable,
    omega1: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub spec: APSpec,
    pub n: u64,
    pub certificates: Vec<ExclusionCertificate>,
    pub undecided: Vec<u64>,
}

impl TheoremReport {
    pub fn is_success(&self) -> bool {
        self.undecided.is_empty()
    }
}

impl<'a> Pipeline<'a> {
    /// Prepares `ω_1` for every `k <= n_max / 2`.
    pub fn new(table: &'a PrimeTable, small: &'a SmallCaseTable, n_max: u64) -> Result<Self> {
        table.ensure_covers((4 * n_max.max(2)).isqrt())?;
        let omega1 = omega_1_table((n_max / 2).max(1), table)?;
        Ok(Self {
            table,
            small,
            omega1,
        })
    }

    pub fn table(&self) -> &PrimeTable {
        self.table
    }

    pub fn small_cases(&self) -> &SmallCaseTable {
        self.small
    }

    pub fn omega_1(&self, k: u64) -> Result<usize> {
        match self.omega1.get(k as usize) {
            Some(&w) => Ok(w),
            None => omega_1(k, self.table),
        }
    }

    /// Tries each rule in turn for a degree-`k` factor of `G` of degree `n`.
    pub fn exclude(&self, spec: &APSpec, n: u64, k: u64) -> Result<Exclusion> {
        if k == 1 {
            return Ok(Exclusion::Certified(ExclusionCertificate {
                n,
                k,
                spec: *spec,
                rule: ExclusionRule::LinearFactorAllowed,
                verified_by_phi_oracle: false,
            }));
        }
        if k < 2 || 2 * k > n {
            return Err(Error::PrecondViolated(format!(
                "need 2 <= k <= n/2 (n={n}, k={k})"
            )));
        }
        let rule = match find_criterion_prime(spec, n, k, self.table)? {
            Some((p, trace)) => Some(ExclusionRule::CriterionPrime { p, trace }),
            None if spec.d() == 4 && k >= 7 => self.omega_gap_rule(spec, n, k)?,
            None if spec.d() == 4 => self.small_case_rule(spec, n, k)?,
            None => None,
        };
        let Some(rule) = rule else {
            return Ok(Exclusion::Undecided { n, k });
        };
        let verified_by_phi_oracle = match rule.prime() {
            Some(p) => phi_check(spec, n, k, p)?.0,
            None => false,
        };
        let cert = ExclusionCertificate {
            n,
            k,
            spec: *spec,
            rule,
            verified_by_phi_oracle,
        };
        verify_certificate(&cert, self.table)?;
        Ok(Exclusion::Certified(cert))
    }

    /// Rule for `k >= 7`: if `Δ(m, 4, k)` has more prime factors than
    /// `ω_1(k)`, one of them misses `Δ(alpha, 4, k)` and exceeds `k`.
    pub fn omega_gap_rule(&self, spec: &APSpec, n: u64, k: u64) -> Result<Option<ExclusionRule>> {
        let omega_1 = self.omega_1(k)?;
        let m = spec.term(n - k);
        let fp = factor_window(&ProductWindow::new(m, 4, k)?, self.table)?;
        if fp.omega <= omega_1 {
            return Ok(None);
        }
        let threshold = criterion_threshold(k, 4);
        let witness = fp
            .factors
            .keys()
            .rev()
            .copied()
            .find(|&p| p > k && p > 4 && p >= threshold && misses_head(spec, k, p));
        let Some(p) = witness else {
            return Ok(None);
        };
        let (_, trace) = phi_check(spec, n, k, p)?;
        Ok(Some(ExclusionRule::OmegaGap {
            p,
            trace,
            omega: fp.omega,
            omega_1,
        }))
    }

    /// Rule for `k <= 6`: a smooth hit resolves through its own witness; any
    /// other `m` inside the scanned range has `P(Δ(m, 4, k)) > 4k`.
    pub fn small_case_rule(&self, spec: &APSpec, n: u64, k: u64) -> Result<Option<ExclusionRule>> {
        let m = spec.term(n - k);
        if self.small.lookup(k, m).is_some() {
            let cert = crate::smooth::resolve_exception(m, k, self.table)?;
            return Ok(Some(cert.rule));
        }
        if m <= self.small.scan_limit() {
            return Ok(Some(ExclusionRule::SmallCaseEmpty {
                scan_limit: self.small.scan_limit(),
            }));
        }
        Ok(None)
    }

    /// One certificate per `k` in `1..=max(1, n/2)`.
    pub fn verify_theorem(&self, spec: &APSpec, n: u64) -> Result<TheoremReport> {
        if spec.d() != 4 || !matches!(spec.alpha(), 1 | 3) {
            return Err(Error::PrecondViolated(format!(
                "the theorem pipeline needs d = 4 and alpha in {{1, 3}}, got {spec:?}"
            )));
        }
        if n == 0 {
            return Err(Error::PrecondViolated("n must be positive".into()));
        }
        let mut certificates = Vec::new();
        let mut undecided = Vec::new();
        for k in 1..=(n / 2).max(1) {
            match self.exclude(spec, n, k)? {
                Exclusion::Certified(c) => certificates.push(c),
                Exclusion::Undecided { k, .. } => undecided.push(k),
            }
        }
        Ok(TheoremReport {
            spec: *spec,
            n,
            certificates,
            undecided,
        })
    }
}

fn invalid(msg: String) -> Error {
    Error::CertificateInvalid(msg)
}

/// Re-derives every claim in a certificate from scratch.
pub fn verify_certificate(cert: &ExclusionCertificate, table: &PrimeTable) -> Result<()> {
    let (n, k, spec) = (cert.n, cert.k, &cert.spec);
    let (alpha, d) = (spec.alpha(), spec.d());
    match &cert.rule {
        ExclusionRule::LinearFactorAllowed => {
            if k != 1 {
                return Err(invalid(format!("linear rule with k={k}")));
            }
            Ok(())
        }
        ExclusionRule::CriterionPrime { p, trace } => check_prime_witness(cert, *p, trace),
        ExclusionRule::OmegaGap {
            p,
            trace,
            omega,
            omega_1: w1,
        } => {
            check_prime_witness(cert, *p, trace)?;
            if d != 4 || k < 7 || *p <= k || *p < criterion_threshold(k, 4) {
                return Err(invalid(format!(
                    "omega-gap witness p={p} unusable for k={k}"
                )));
            }
            let m = alpha + d * (n - k);
            let actual = factor_window(&ProductWindow::new(m, d, k)?, table)?.omega;
            let expected = omega_1(k, table)?;
            if actual != *omega || expected != *w1 || actual <= expected {
                return Err(invalid(format!(
                    "omega-gap counts: omega={actual} (claimed {omega}), omega_1={expected} (claimed {w1})"
                )));
            }
            Ok(())
        }
        ExclusionRule::SmallCaseEmpty { scan_limit } => {
            if d != 4 || !(2..=6).contains(&k) || 2 * k > n {
                return Err(invalid(format!(
                    "small-case rule outside 2 <= k <= 6 (n={n}, k={k})"
                )));
            }
            let m = alpha + d * (n - k);
            if m > *scan_limit {
                return Err(invalid(format!("m={m} beyond the scan limit {scan_limit}")));
            }
            let big_p = factor_window(&ProductWindow::new(m, d, k)?, table)?.max_prime;
            if big_p <= 4 * k {
                return Err(invalid(format!("m={m} is {}-smooth", 4 * k)));
            }
            Ok(())
        }
    }
}

fn check_prime_witness(cert: &ExclusionCertificate, p: u64, trace: &LemmaTrace) -> Result<()> {
    let (n, k, spec) = (cert.n, cert.k, &cert.spec);
    let (alpha, d) = (spec.alpha(), spec.d());
    if k < 1 || 2 * k > n {
        return Err(invalid(format!("k={k} outside [1, n/2] for n={n}")));
    }
    if !is_prime_u64(p) {
        return Err(invalid(format!("p={p} is not prime")));
    }
    if p <= d || p < criterion_threshold(k, d) {
        return Err(invalid(format!(
            "p={p} below min(2k, d(d-1)) or not above d"
        )));
    }
    if !(1..=k).any(|j| (alpha + (n - j) * d) % p == 0) {
        return Err(invalid(format!("p={p} divides no tail term")));
    }
    if (1..=k).any(|j| (alpha + (j - 1) * d) % p == 0) {
        return Err(invalid(format!("p={p} divides a head term")));
    }
    // Any such prime exceeds kd/(d-1).
    if (p as u128) * (d as u128 - 1) <= k as u128 * d as u128 {
        return Err(invalid(format!("p={p} <= kd/(d-1)")));
    }
    if trace.p != p {
        return Err(invalid(format!(
            "trace is for p={}, certificate for p={p}",
            trace.p
        )));
    }
    let first = (1..=n)
        .find(|&j| (alpha + (j - 1) * d) % p == 0)
        .unwrap_or(0);
    if first != 0 && (trace.j0 != first || trace.l0 * p != alpha + (first - 1) * d) {
        return Err(invalid(format!(
            "trace j0={} l0={} inconsistent",
            trace.j0, trace.l0
        )));
    }
    let (_, fresh) = phi_check(spec, n, k, p)?;
    if fresh != *trace {
        return Err(invalid("slope trace does not reproduce".into()));
    }
    Ok(())
}
