use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use clap::Args;
use hl_irred_core::bounds::{
    contradiction_grid, corollary_threshold_check, l_bound, large_k_contradiction,
    large_k_contradiction_hp, rhs_is_nonincreasing, GridOutcome, LBoundInput, LARGE_K_START,
    PRIME_CUT_INDEX, V0,
};
use hl_irred_core::criterion::{omega_1_table, verify_certificate, ExclusionCertificate, Pipeline};
use hl_irred_core::poly::{check_instance, CoefficientProfile, Verdict, DEFAULT_PRIME_BUDGET};
use hl_irred_core::primes::{
    build_table_with_ceiling, gap_report, GapReport, Mod4Class, DEFAULT_LIMIT_CEILING,
    SMALL_M_REGIMES,
};
use hl_irred_core::smooth::{
    exception_rows, resolve_exception, write_csv, SmallCaseTable, DEFAULT_SCAN_BOUND,
};
use hl_irred_core::{APSpec, TheoremReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{load_table, CliError, CliResult, GlobalArgs, Outcome, SCHEMA};
use crate::{EXIT_HORIZON, EXIT_MISMATCH, EXIT_OK};

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn alphas(alpha: Option<u64>) -> CliResult<Vec<u64>> {
    match alpha {
        None => Ok(vec![1, 3]),
        Some(a @ (1 | 3)) => Ok(vec![a]),
        Some(a) => Err(config(format!("--alpha must be 1 or 3, got {a}"))),
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    pub n_from: u64,
    #[arg(long)]
    pub n_to: u64,
    /// 1 or 3; both when omitted.
    #[arg(long)]
    pub alpha: Option<u64>,
    /// Emit counts only, without per-instance certificates.
    #[arg(long)]
    pub summary: bool,
    /// Re-validate every certificate against a freshly built prime table.
    #[arg(long)]
    pub recheck: bool,
    /// Horizon of the smooth-window scan backing the k <= 6 cases.
    #[arg(long, default_value_t = DEFAULT_SCAN_BOUND)]
    pub scan_bound: u64,
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    instances: u64,
    certificates: u64,
    by_rule: BTreeMap<&'static str, u64>,
    phi_oracle_confirmed: u64,
    undecided: Vec<(u64, u64, u64)>,
    rechecked: Option<u64>,
    recheck_failures: Vec<String>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    schema: &'static str,
    command: &'static str,
    alphas: Vec<u64>,
    n_from: u64,
    n_to: u64,
    scan_bound: u64,
    summary: VerifySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    instances: Option<Vec<TheoremReport>>,
}

pub fn cmd_verify(args: &VerifyArgs, g: &GlobalArgs) -> CliResult<Outcome> {
    if args.n_from == 0 || args.n_from > args.n_to {
        return Err(config(format!(
            "need 1 <= n_from <= n_to (got {}..{})",
            args.n_from, args.n_to
        )));
    }
    if args.scan_bound < 45 {
        return Err(config("--scan-bound must be at least 45"));
    }
    let alphas = alphas(args.alpha)?;
    let limit = (4 * args.n_to).isqrt().max(1000) + 1;
    let table = load_table(limit, g.table_cache.as_deref())?;
    let small = SmallCaseTable::scan(args.scan_bound)?;
    let pipe = Pipeline::new(&table, &small, args.n_to)?;

    let jobs: Vec<(u64, u64)> = alphas
        .iter()
        .flat_map(|&a| (args.n_from..=args.n_to).map(move |n| (a, n)))
        .collect();
    let reports: Vec<TheoremReport> = jobs
        .par_iter()
        .map(|&(a, n)| pipe.verify_theorem(&APSpec::new(a, 4)?, n))
        .collect::<hl_irred_core::Result<_>>()?;

    let mut summary = VerifySummary {
        instances: reports.len() as u64,
        certificates: 0,
        by_rule: BTreeMap::new(),
        phi_oracle_confirmed: 0,
        undecided: Vec::new(),
        rechecked: None,
        recheck_failures: Vec::new(),
    };
    for r in &reports {
        for c in &r.certificates {
            summary.certificates += 1;
            *summary.by_rule.entry(c.rule.name()).or_default() += 1;
            summary.phi_oracle_confirmed += c.verified_by_phi_oracle as u64;
        }
        summary
            .undecided
            .extend(r.undecided.iter().map(|&k| (r.spec.alpha(), r.n, k)));
    }
    if args.recheck {
        let fresh = hl_irred_core::primes::build_table(limit)?;
        let all: Vec<&ExclusionCertificate> =
            reports.iter().flat_map(|r| &r.certificates).collect();
        let failures: Vec<String> = all
            .par_iter()
            .filter_map(|c| {
                verify_certificate(c, &fresh)
                    .err()
                    .map(|e| format!("alpha={} n={} k={}: {e}", c.spec.alpha(), c.n, c.k))
            })
            .collect();
        summary.rechecked = Some(all.len() as u64);
        summary.recheck_failures = failures;
    }
    let exit = if summary.undecided.is_empty() && summary.recheck_failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    let report = VerifyReport {
        schema: SCHEMA,
        command: "verify",
        alphas,
        n_from: args.n_from,
        n_to: args.n_to,
        scan_bound: args.scan_bound,
        summary,
        instances: (!args.summary).then_some(reports),
    };
    Outcome::new(exit, &report)
}

// ---------------------------------------------------------------------------
// lemma-gaps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    /// Sieve limit; must exceed the largest ceiling plus the gap after it.
    #[arg(long, default_value_t = 1_001_000)]
    pub limit: u64,
}

#[derive(Debug, Serialize)]
struct GapsReport {
    schema: &'static str,
    command: &'static str,
    limit: u64,
    classes: Vec<GapReport>,
    all_hold: bool,
}

pub fn cmd_lemma_gaps(args: &GapArgs, _g: &GlobalArgs) -> CliResult<Outcome> {
    let table = build_table_with_ceiling(args.limit, DEFAULT_LIMIT_CEILING)?;
    let classes: Vec<GapReport> = Mod4Class::BOTH
        .iter()
        .map(|&c| gap_report(&table, c))
        .collect();
    for r in &classes {
        for c in &r.skipped {
            eprintln!(
                "warning: ceiling {c} skipped for class {} (limit {})",
                r.class_l, args.limit
            );
        }
    }
    let all_hold = classes.iter().all(GapReport::all_hold);
    let report = GapsReport {
        schema: SCHEMA,
        command: "lemma-gaps",
        limit: args.limit,
        classes,
        all_hold,
    };
    Outcome::new(if all_hold { EXIT_OK } else { EXIT_MISMATCH }, &report)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

/// `(largest k, claimed bound on m)` for the window-bound maxima.
pub const L_CLAIMS: [(u64, u64); 3] = [(10, 104), (20, 245), (400, 2353)];
pub const L_K_MIN: u64 = 7;

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = LARGE_K_START)]
    pub kmax: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LMaxRow {
    pub k_max: u64,
    pub claimed: u64,
    /// Upper bound for the largest `L(k, 4)`, rounded up.
    pub max_value: f64,
    pub argmax_k: u64,
    pub max_floor: u64,
    pub holds: bool,
    /// Every `k` whose `floor(L(k, 4))` exceeds the claim (m is an integer).
    pub offending_k: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeRow {
    pub k: u64,
    pub l_floor: u64,
    pub regime_ceiling: u64,
    pub covered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeK {
    pub v0: u64,
    pub k401_interval: bool,
    pub k401_fixed_point: bool,
    pub rhs_nonincreasing: bool,
    pub grid: GridOutcome,
    pub threshold_check: bool,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
struct BoundsReport {
    schema: &'static str,
    command: &'static str,
    kmax: u64,
    prime_count_bound: &'static str,
    prime_cut: Vec<u64>,
    l_maxima: Vec<LMaxRow>,
    regime_coverage: Vec<RegimeRow>,
    regimes_cover_all: bool,
    large_k: Option<LargeK>,
    all_hold: bool,
}

/// The per-`k` window bounds with `t = ω_1(k)` for `7 <= k <= kmax`.
pub fn l_rows(kmax: u64) -> CliResult<Vec<hl_irred_core::bounds::LBoundResult>> {
    let table = hl_irred_core::primes::build_table((4 * kmax).isqrt() + 100)?;
    let omega1 = omega_1_table(kmax, &table)?;
    (L_K_MIN..=kmax)
        .into_par_iter()
        .map(|k| {
            let t = omega1[k as usize] as u64;
            Ok(l_bound(LBoundInput {
                k,
                t,
                prime_cut_index: PRIME_CUT_INDEX,
                d: 4,
            })?)
        })
        .collect()
}

pub fn l_maxima(results: &[hl_irred_core::bounds::LBoundResult], kmax: u64) -> Vec<LMaxRow> {
    L_CLAIMS
        .iter()
        .filter(|&&(k_cap, _)| k_cap <= kmax)
        .map(|&(k_cap, claimed)| {
            let within: Vec<_> = results.iter().filter(|r| r.input.k <= k_cap).collect();
            let best = within
                .iter()
                .max_by(|a, b| a.value.total_cmp(&b.value))
                .expect("k range is nonempty");
            let offending_k: Vec<u64> = within
                .iter()
                .filter(|r| r.floor > claimed)
                .map(|r| r.input.k)
                .collect();
            LMaxRow {
                k_max: k_cap,
                claimed,
                max_value: best.value,
                argmax_k: best.input.k,
                max_floor: within.iter().map(|r| r.floor).max().unwrap(),
                holds: offending_k.is_empty(),
                offending_k,
            }
        })
        .collect()
}

pub fn regime_ceiling(k: u64) -> Option<u64> {
    SMALL_M_REGIMES
        .iter()
        .find(|&&(lo, end, _)| (lo..end).contains(&k))
        .map(|&(_, _, c)| c)
}

pub fn large_k_checks(kmax: u64) -> CliResult<LargeK> {
    let k401_interval = large_k_contradiction(LARGE_K_START, V0)?;
    let k401_fixed_point = large_k_contradiction_hp(LARGE_K_START, V0, 128)?;
    let grid = contradiction_grid(LARGE_K_START, kmax.max(LARGE_K_START), V0)?;
    let rhs_nonincreasing = rhs_is_nonincreasing(V0);
    let threshold_check = corollary_threshold_check(V0);
    let holds = k401_interval
        && k401_fixed_point
        && grid.first_failure.is_none()
        && rhs_nonincreasing
        && threshold_check;
    Ok(LargeK {
        v0: V0,
        k401_interval,
        k401_fixed_point,
        rhs_nonincreasing,
        grid,
        threshold_check,
        holds,
    })
}

pub fn cmd_bounds(args: &BoundsArgs, _g: &GlobalArgs) -> CliResult<Outcome> {
    if args.kmax < L_CLAIMS[0].0 {
        return Err(config(format!("--kmax must be at least {}", L_CLAIMS[0].0)));
    }
    let results = l_rows(args.kmax.min(L_CLAIMS[2].0))?;
    let l_maxima = l_maxima(&results, args.kmax);
    let regime_coverage: Vec<RegimeRow> = results
        .iter()
        .map(|r| {
            let ceiling = regime_ceiling(r.input.k).unwrap_or(0);
            RegimeRow {
                k: r.input.k,
                l_floor: r.floor,
                regime_ceiling: ceiling,
                covered: r.floor <= ceiling,
            }
        })
        .collect();
    let regimes_cover_all = regime_coverage.iter().all(|r| r.covered);
    let large_k = (args.kmax >= LARGE_K_START)
        .then(|| large_k_checks(args.kmax))
        .transpose()?;
    for row in l_maxima.iter().filter(|r| !r.holds) {
        eprintln!(
            "mismatch: max floor L(k, 4) over 7 <= k <= {} is {} > {} (offending k: {:?})",
            row.k_max, row.max_floor, row.claimed, row.offending_k
        );
    }
    if let Some(fail) = large_k.as_ref().and_then(|l| l.grid.first_failure) {
        eprintln!("mismatch: large-k inequality not contradicted at k = {fail}");
    }
    let all_hold = l_maxima.iter().all(|r| r.holds)
        && regimes_cover_all
        && large_k.as_ref().is_none_or(|l| l.holds);
    let report = BoundsReport {
        schema: SCHEMA,
        command: "bounds",
        kmax: args.kmax,
        prime_count_bound: "pi(nu) <= (nu / ln nu) (1 + 1.2762 / ln nu)",
        prime_cut: vec![2, 3, 5, 7],
        l_maxima,
        regime_coverage,
        regimes_cover_all,
        large_k,
        all_hold,
    };
    Outcome::new(if all_hold { EXIT_OK } else { EXIT_MISMATCH }, &report)
}

// ---------------------------------------------------------------------------
// smooth
// ---------------------------------------------------------------------------

/// The expected smooth windows `(k, m)`.
pub const EXPECTED_HITS: [(u64, u64); 2] = [(2, 21), (2, 45)];

#[derive(Debug, Clone, Args)]
pub struct SmoothArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub bound: u64,
    /// Also write the hits as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SmoothHitRow {
    k: u64,
    m: u64,
    max_prime: u64,
    factorization: Vec<(u64, u32)>,
    certificate: ExclusionCertificate,
}

#[derive(Debug, Serialize)]
struct SmoothReport {
    schema: &'static str,
    command: &'static str,
    bound: u64,
    hits: Vec<SmoothHitRow>,
    matches_expected: bool,
    horizon_sufficient: bool,
}

pub fn cmd_smooth(args: &SmoothArgs, _g: &GlobalArgs) -> CliResult<Outcome> {
    if args.bound == 0 {
        return Err(config("--bound must be positive"));
    }
    let small = SmallCaseTable::scan(args.bound)?;
    let table = load_table(1000, None)?;
    let hits: Vec<SmoothHitRow> = small
        .all_hits()
        .map(|h| {
            Ok(SmoothHitRow {
                k: h.k,
                m: h.m,
                max_prime: h.max_prime,
                factorization: h.factorization.clone(),
                certificate: resolve_exception(h.m, h.k, &table)?,
            })
        })
        .collect::<hl_irred_core::Result<_>>()?;
    if let Some(path) = &args.csv {
        write_csv(&exception_rows(&small, &table)?, File::create(path)?)?;
    }
    let found: Vec<(u64, u64)> = hits.iter().map(|h| (h.k, h.m)).collect();
    let horizon_sufficient = EXPECTED_HITS.iter().all(|&(_, m)| m <= args.bound);
    let matches_expected = found == EXPECTED_HITS;
    let exit = if !horizon_sufficient {
        EXIT_HORIZON
    } else if matches_expected {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    let report = SmoothReport {
        schema: SCHEMA,
        command: "smooth",
        bound: args.bound,
        hits,
        matches_expected,
        horizon_sufficient,
    };
    Outcome::new(exit, &report)
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 25)]
    pub n_max: usize,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Primes with squarefree reductions to use per instance.
    #[arg(long, default_value_t = DEFAULT_PRIME_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub alpha: u64,
    pub n: usize,
    pub profile: Vec<i64>,
    pub verdict: Verdict,
    pub primes: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleTotals {
    pub instances: usize,
    pub pass: usize,
    pub inconclusive: usize,
    pub fail: usize,
    pub inconclusive_rate: f64,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    schema: &'static str,
    command: &'static str,
    n_max: usize,
    samples: usize,
    seed: u64,
    budget: usize,
    totals: OracleTotals,
    instances: Vec<OracleRow>,
}

/// Runs the oracle; each `(alpha, n)` draws from its own ChaCha stream.
pub fn oracle_rows(args: &OracleArgs) -> CliResult<Vec<OracleRow>> {
    let jobs: Vec<(u64, usize)> = [1u64, 3]
        .iter()
        .flat_map(|&a| (1..=args.n_max).map(move |n| (a, n)))
        .collect();
    let nested: Vec<Vec<OracleRow>> = jobs
        .par_iter()
        .map(|&(alpha, n)| {
            let spec = APSpec::new(alpha, 4)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(alpha << 32 | n as u64);
            (0..args.samples)
                .map(|_| {
                    let profile = CoefficientProfile::random(n, &mut rng);
                    let out = check_instance(&spec, n, &profile, args.budget)?;
                    Ok(OracleRow {
                        alpha,
                        n,
                        profile: profile.coefficients().to_vec(),
                        verdict: out.verdict,
                        primes: out.primes,
                    })
                })
                .collect()
        })
        .collect::<hl_irred_core::Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn oracle_totals(rows: &[OracleRow]) -> OracleTotals {
    let count = |label: &str| rows.iter().filter(|r| r.verdict.label() == label).count();
    let inconclusive = count("INCONCLUSIVE");
    OracleTotals {
        instances: rows.len(),
        pass: count("PASS"),
        inconclusive,
        fail: count("FAIL"),
        inconclusive_rate: if rows.is_empty() {
            0.0
        } else {
            inconclusive as f64 / rows.len() as f64
        },
    }
}

pub fn cmd_oracle(args: &OracleArgs, _g: &GlobalArgs) -> CliResult<Outcome> {
    if args.n_max == 0 {
        return Err(config("--n-max must be positive"));
    }
    if args.budget == 0 {
        return Err(config("--budget must be positive"));
    }
    let instances = oracle_rows(args)?;
    let totals = oracle_totals(&instances);
    let exit = if totals.fail == 0 {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    let report = OracleReport {
        schema: SCHEMA,
        command: "oracle",
        n_max: args.n_max,
        samples: args.samples,
        seed: args.seed,
        budget: args.budget,
        totals,
        instances,
    };
    Outcome::new(exit, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_selection() {
        assert_eq!(alphas(None).unwrap(), [1, 3]);
        assert_eq!(alphas(Some(3)).unwrap(), [3]);
        assert!(matches!(alphas(Some(2)), Err(CliError::Config(_))));
    }

    #[test]
    fn every_small_k_has_a_regime() {
        for k in L_K_MIN..=L_CLAIMS[2].0 {
            assert!(regime_ceiling(k).is_some(), "k={k}");
        }
    }

    #[test]
    fn l_maxima_respects_kmax() {
        let rows = l_maxima(&l_rows(20).unwrap(), 20);
        assert_eq!(rows.iter().map(|r| r.k_max).collect::<Vec<_>>(), [10, 20]);
        assert_eq!((rows[0].argmax_k, rows[0].max_floor), (8, 105));
        assert_eq!((rows[1].argmax_k, rows[1].max_floor), (18, 245));
    }

    #[test]
    fn oracle_totals_count_labels() {
        let args = OracleArgs {
            n_max: 6,
            samples: 3,
            seed: 2,
            budget: 12,
        };
        let rows = oracle_rows(&args).unwrap();
        let t = oracle_totals(&rows);
        assert_eq!(t.instances, 36);
        assert_eq!(t.pass + t.inconclusive + t.fail, 36);
    }
}
