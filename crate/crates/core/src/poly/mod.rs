//! Exact construction of `G` and an independent factor-degree oracle based on
//! reductions modulo small primes.

pub mod modp;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::ap::APSpec;
use crate::arith::{is_prime_u64, mod_inverse};
use crate::error::{Error, Result};

pub const DEFAULT_PRIME_BUDGET: usize = 12;
/// Candidates examined when looking for primes with a squarefree reduction.
const PRIME_SEARCH_LIMIT: u64 = 10_000;

/// Dense polynomial with integer coefficients, ascending; zero is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntPolynomial {
    #[serde(serialize_with = "crate::ser::bigint_vec_decimal")]
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content, making the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        let mut g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        if self.leading().is_some_and(Signed::is_negative) {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `b^n f(a/b)` for `n = deg f`: zero iff `a/b` is a root.
    pub fn eval_homogeneous(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let n = self.coeffs.len();
        let mut acc = BigInt::zero();
        let mut a_pow = BigInt::one();
        let mut b_pows = vec![BigInt::one(); n];
        for i in 1..n {
            b_pows[i] = &b_pows[i - 1] * b;
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c * &a_pow * &b_pows[n - 1 - i];
            a_pow *= a;
        }
        acc
    }

    /// Exact quotient `self / divisor`, if the division leaves no remainder.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let dd = divisor.degree()?;
        let lc = divisor.leading()?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return r.iter().all(Zero::is_zero).then(|| Self::new(Vec::new()));
        }
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let (c, rest) = r[i + dd].div_rem(lc);
            if !rest.is_zero() {
                return None;
            }
            for (j, b) in divisor.coeffs.iter().enumerate() {
                r[i + j] -= &c * b;
            }
            q[i] = c;
        }
        r.iter().all(Zero::is_zero).then(|| Self::new(q))
    }

    pub fn reduce_mod(&self, p: u64) -> modp::Fp {
        let pb = BigInt::from(p);
        modp::trim(
            self.coeffs
                .iter()
                .map(|c| c.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match i {
                0 => write!(f, "{mag}")?,
                _ if mag.is_one() => {}
                _ => write!(f, "{mag}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// The integers `a_0, ..., a_n` with `a_0 a_n != 0` and `|a_0 a_n|` a power of two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientProfile {
    a: Vec<i64>,
}

const EDGE_CHOICES: [i64; 6] = [1, -1, 2, -2, 4, -4];

impl CoefficientProfile {
    pub fn new(a: Vec<i64>) -> Result<Self> {
        let (Some(&a0), Some(&an)) = (a.first(), a.last()) else {
            return Err(Error::ProfileMismatch("empty profile".into()));
        };
        if a.len() < 2 {
            return Err(Error::ProfileMismatch("need at least a_0 and a_1".into()));
        }
        if a0 == 0 || an == 0 {
            return Err(Error::ProfileMismatch("a_0 and a_n must be nonzero".into()));
        }
        let prod = (a0 as i128 * an as i128).unsigned_abs();
        if !prod.is_power_of_two() {
            return Err(Error::ProfileMismatch(format!(
                "|a_0 a_n| = {prod} has an odd prime factor"
            )));
        }
        Ok(Self { a })
    }

    pub fn ones(n: usize) -> Self {
        Self { a: vec![1; n + 1] }
    }

    /// Inner coefficients uniform in `[-5, 5]`, `a_0, a_n` from `{±1, ±2, ±4}`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1);
        let mut a: Vec<i64> = (0..=n).map(|_| rng.random_range(-5..=5)).collect();
        a[0] = EDGE_CHOICES[rng.random_range(0..EDGE_CHOICES.len())];
        a[n] = EDGE_CHOICES[rng.random_range(0..EDGE_CHOICES.len())];
        Self { a }
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.a
    }

    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }
}

/// Degrees a factor over the integers could have.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeSet {
    pub n: usize,
    pub possible: BTreeSet<usize>,
}

impl DegreeSet {
    pub fn full(n: usize) -> Self {
        Self {
            n,
            possible: (0..=n).collect(),
        }
    }

    /// All sub-multiset sums of the given degrees.
    pub fn from_subset_sums(n: usize, degrees: &[usize]) -> Self {
        let mut reach = vec![false; n + 1];
        reach[0] = true;
        for &d in degrees {
            for s in (d..=n).rev() {
                if reach[s - d] {
                    reach[s] = true;
                }
            }
        }
        Self {
            n,
            possible: (0..=n).filter(|&s| reach[s]).collect(),
        }
    }

    pub fn intersect(&mut self, other: &Self) {
        self.possible.retain(|d| other.possible.contains(d));
    }

    pub fn contains(&self, d: usize) -> bool {
        self.possible.contains(&d)
    }

    pub fn remove_pair(&mut self, d: usize) {
        if d <= self.n {
            self.possible.remove(&d);
            self.possible.remove(&(self.n - d));
        }
    }

    pub fn is_complement_closed(&self) -> bool {
        self.possible
            .iter()
            .all(|&d| self.possible.contains(&(self.n - d)))
    }

    /// True iff only `0, 1, n-1, n` remain.
    pub fn within_theorem_shape(&self) -> bool {
        self.possible.iter().all(|&d| d <= 1 || d + 1 >= self.n)
    }

    pub fn is_irreducible(&self) -> bool {
        self.possible.iter().all(|&d| d == 0 || d == self.n)
    }
}

/// `G(x) = sum_j a_j prod_{i=j}^{n-1} (alpha + i d) x^j`.
pub fn build_g(spec: &APSpec, n: usize, profile: &CoefficientProfile) -> Result<IntPolynomial> {
    if profile.a.len() != n + 1 {
        return Err(Error::ProfileMismatch(format!(
            "profile has {} entries, degree {n} needs {}",
            profile.a.len(),
            n + 1
        )));
    }
    let mut coeffs = vec![BigInt::zero(); n + 1];
    let mut tail = BigInt::one();
    for j in (0..=n).rev() {
        if j < n {
            tail *= spec.term(j as u64);
        }
        coeffs[j] = &tail * profile.a[j];
    }
    Ok(IntPolynomial::new(coeffs))
}

pub fn mod_p_degree_multiset(f: &IntPolynomial, p: u64) -> Result<Vec<usize>> {
    let lc = f
        .leading()
        .ok_or_else(|| Error::DomainError("zero polynomial".into()))?;
    if p < 2 || p > u32::MAX as u64 || !is_prime_u64(p) {
        return Err(Error::DomainError(format!("{p} is not a prime below 2^32")));
    }
    if (lc % BigInt::from(p)).is_zero() {
        return Err(Error::LeadingVanishes { p });
    }
    Ok(modp::factor_degrees(&f.reduce_mod(p), p))
}

/// The first `budget` primes not dividing `avoid` or the leading coefficient
/// for which `f` stays squarefree.
pub fn select_primes(f: &IntPolynomial, budget: usize, avoid: u64) -> Vec<u64> {
    let Some(lc) = f.leading() else {
        return Vec::new();
    };
    (2..PRIME_SEARCH_LIMIT)
        .filter(|&p| is_prime_u64(p) && !avoid.is_multiple_of(p))
        .filter(|&p| !(lc % BigInt::from(p)).is_zero())
        .filter(|&p| modp::is_squarefree(&f.reduce_mod(p), p))
        .take(budget)
        .collect()
}

/// How the degree-1 question was settled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LinearEvidence {
    NotChecked,
    /// No prime with a squarefree reduction was available for root lifting.
    SubsetSumOnly,
    NoRationalRoot,
    RationalRoots {
        count: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCertificate {
    pub set: DegreeSet,
    pub per_prime: Vec<(u64, Vec<usize>)>,
    pub linear: LinearEvidence,
    /// Primitive linear factors `b x - a` found by the root search.
    pub linear_factors: Vec<IntPolynomial>,
}

/// Rational roots of a primitive `f` that is squarefree modulo `p`, as
/// primitive linear factors.
fn rational_linear_factors(f: &IntPolynomial, p: u64) -> Vec<IntPolynomial> {
    let lc = f.leading().unwrap().clone();
    let bound = f.coeffs.iter().map(|c| c.abs()).max().unwrap() + lc.abs();
    let target = bound * 2u32;
    let fp = f.reduce_mod(p);
    let dfp = modp::derivative(&fp, p);
    let pb = BigInt::from(p);
    let mut out: Vec<IntPolynomial> = Vec::new();
    for r0 in modp::roots(&fp, p) {
        let u = mod_inverse(modp::eval(&dfp, r0, p), p).expect("simple root");
        let mut root = BigInt::from(r0);
        let mut modulus = pb.clone();
        while modulus < target {
            let next = &modulus * &pb;
            let t = (-(f.eval(&root) / &modulus) * u).mod_floor(&pb);
            root = (root + t * &modulus).mod_floor(&next);
            modulus = next;
        }
        let mut y = (&lc * &root).mod_floor(&modulus);
        if &y * 2u32 > modulus {
            y -= &modulus;
        }
        let g = y.gcd(&lc);
        let (mut a, mut b) = (&y / &g, &lc / &g);
        if b.is_negative() {
            (a, b) = (-a, -b);
        }
        if f.eval_homogeneous(&a, &b).is_zero() {
            let factor = IntPolynomial::new(vec![-a, b]);
            if !out.contains(&factor) {
                out.push(factor);
            }
        }
    }
    out
}

/// Over-approximates the set of degrees of factors of `f` over the integers.
pub fn certify_degree_set(
    f: &IntPolynomial,
    primes: &[u64],
    rational_root_check: bool,
) -> Result<DegreeCertificate> {
    let n = f
        .degree()
        .ok_or_else(|| Error::DomainError("zero polynomial".into()))?;
    let f = f.primitive_part();
    let mut set = DegreeSet::full(n);
    let mut per_prime = Vec::with_capacity(primes.len());
    for &p in primes {
        let degs = mod_p_degree_multiset(&f, p)?;
        set.intersect(&DegreeSet::from_subset_sums(n, &degs));
        per_prime.push((p, degs));
    }
    let mut linear = LinearEvidence::NotChecked;
    let mut linear_factors = Vec::new();
    if rational_root_check && n >= 2 {
        let lift_prime = primes
            .iter()
            .copied()
            .find(|&p| modp::is_squarefree(&f.reduce_mod(p), p))
            .or_else(|| select_primes(&f, 1, 1).first().copied());
        match lift_prime {
            None => linear = LinearEvidence::SubsetSumOnly,
            Some(p) => {
                linear_factors = rational_linear_factors(&f, p);
                match linear_factors.len() {
                    0 => {
                        linear = LinearEvidence::NoRationalRoot;
                        set.remove_pair(1);
                    }
                    count => {
                        linear = LinearEvidence::RationalRoots { count };
                        if count == 1 {
                            let q = f
                                .div_exact(&linear_factors[0])
                                .expect("root gives a factor");
                            let usable: Vec<u64> = primes
                                .iter()
                                .copied()
                                .filter(|&p| !(q.leading().unwrap() % BigInt::from(p)).is_zero())
                                .collect();
                            let mut sq = certify_degree_set(&q, &usable, false)?.set;
                            // f is squarefree with a single rational root, so q has none.
                            sq.remove_pair(1);
                            let shifted: BTreeSet<usize> =
                                sq.possible.iter().flat_map(|&d| [d, d + 1]).collect();
                            set.possible.retain(|d| shifted.contains(d));
                        }
                    }
                }
            }
        }
    }
    Ok(DegreeCertificate {
        set,
        per_prime,
        linear,
        linear_factors,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Pass,
    Inconclusive {
        possible: BTreeSet<usize>,
    },
    /// An exhibited factor over the integers of a degree outside `{0, 1, n-1, n}`.
    Fail {
        degree: usize,
        factor: IntPolynomial,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Inconclusive { .. } => "INCONCLUSIVE",
            Self::Fail { .. } => "FAIL",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleOutcome {
    pub spec: APSpec,
    pub n: usize,
    pub profile: CoefficientProfile,
    pub primes: Vec<u64>,
    pub certificate: DegreeCertificate,
    pub verdict: Verdict,
}

pub fn check_instance(
    spec: &APSpec,
    n: usize,
    profile: &CoefficientProfile,
    budget: usize,
) -> Result<OracleOutcome> {
    let g = build_g(spec, n, profile)?;
    let primes = select_primes(&g, budget, spec.d());
    let certificate = certify_degree_set(&g, &primes, true)?;
    let lf = &certificate.linear_factors;
    let verdict = if lf.len() >= 2 && n >= 4 {
        Verdict::Fail {
            degree: 2,
            factor: lf[0].mul(&lf[1]),
        }
    } else if certificate.set.within_theorem_shape() {
        Verdict::Pass
    } else {
        Verdict::Inconclusive {
            possible: certificate.set.possible.clone(),
        }
    };
    Ok(OracleOutcome {
        spec: *spec,
        n,
        profile: profile.clone(),
        primes,
        certificate,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: u64) -> APSpec {
        APSpec::new(alpha, 4).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = build_g(&spec(1), 1, &CoefficientProfile::ones(1)).unwrap();
        assert_eq!(g, IntPolynomial::from_i64(&[1, 1]));
        let g = build_g(&spec(1), 2, &CoefficientProfile::ones(2)).unwrap();
        assert_eq!(g, IntPolynomial::from_i64(&[5, 5, 1]));
        let g = build_g(&spec(3), 2, &CoefficientProfile::ones(2)).unwrap();
        assert_eq!(g, IntPolynomial::from_i64(&[21, 7, 1]));
        assert_eq!(g.to_string(), "x^2 + 7*x + 21");
        assert!(build_g(&spec(1), 3, &CoefficientProfile::ones(2)).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(CoefficientProfile::new(vec![2, 5, -4]).is_ok());
        assert!(CoefficientProfile::new(vec![3, 5, 1]).is_err());
        assert!(CoefficientProfile::new(vec![0, 5, 1]).is_err());
        assert!(CoefficientProfile::new(vec![1]).is_err());
    }

    #[test]
    fn multiset_examples() {
        let f = IntPolynomial::from_i64(&[5, 5, 1]);
        assert_eq!(mod_p_degree_multiset(&f, 3).unwrap(), vec![2]);
        assert_eq!(
            mod_p_degree_multiset(&IntPolynomial::from_i64(&[-1, 0, 1]), 5).unwrap(),
            vec![1, 1]
        );
        assert_eq!(
            mod_p_degree_multiset(&IntPolynomial::from_i64(&[1, 1]), 7).unwrap(),
            vec![1]
        );
        assert!(matches!(
            mod_p_degree_multiset(&IntPolynomial::from_i64(&[1, 3]), 3),
            Err(Error::LeadingVanishes { p: 3 })
        ));
    }

    #[test]
    fn certify_examples() {
        let f = IntPolynomial::from_i64(&[5, 5, 1]);
        let c = certify_degree_set(&f, &[3], false).unwrap();
        assert_eq!(c.set.possible, BTreeSet::from([0, 2]));

        let g = IntPolynomial::from_i64(&[1, 1]).mul(&f);
        let primes = select_primes(&g, 12, 1);
        let c = certify_degree_set(&g, &primes, true).unwrap();
        assert_eq!(c.set.possible, BTreeSet::from([0, 1, 2, 3]));
        assert_eq!(c.linear_factors, vec![IntPolynomial::from_i64(&[1, 1])]);

        let c = certify_degree_set(&IntPolynomial::from_i64(&[1, 1]), &[3, 5], true).unwrap();
        assert_eq!(c.set.possible, BTreeSet::from([0, 1]));
    }

    #[test]
    fn rational_roots_with_denominators() {
        // (2x - 3)(4x + 1)(x^2 + x + 1)
        let f = IntPolynomial::from_i64(&[-3, 2])
            .mul(&IntPolynomial::from_i64(&[1, 4]))
            .mul(&IntPolynomial::from_i64(&[1, 1, 1]));
        let primes = select_primes(&f, 6, 1);
        let c = certify_degree_set(&f, &primes, true).unwrap();
        assert_eq!(c.linear, LinearEvidence::RationalRoots { count: 2 });
        let mut found = c.linear_factors.clone();
        found.sort_by_key(|p| p.coeffs()[1].clone());
        assert_eq!(
            found,
            vec![
                IntPolynomial::from_i64(&[-3, 2]),
                IntPolynomial::from_i64(&[1, 4])
            ]
        );
    }

    #[test]
    fn instance_examples() {
        let out = check_instance(&spec(1), 2, &CoefficientProfile::ones(2), 12).unwrap();
        assert!(matches!(out.verdict, Verdict::Pass));
        let out = check_instance(&spec(3), 2, &CoefficientProfile::ones(2), 12).unwrap();
        assert!(matches!(out.verdict, Verdict::Pass));
        let p = CoefficientProfile::new(vec![1, 0, 0, 0, 1]).unwrap();
        let out = check_instance(&spec(1), 4, &p, 12).unwrap();
        assert!(!matches!(out.verdict, Verdict::Fail { .. }));
    }

    #[test]
    fn forbidden_factor_is_exhibited() {
        // Two rational roots give a quadratic factor.
        let f = IntPolynomial::from_i64(&[-1, 1])
            .mul(&IntPolynomial::from_i64(&[-2, 1]))
            .mul(&IntPolynomial::from_i64(&[1, 0, 1]));
        let c = certify_degree_set(&f, &select_primes(&f, 12, 1), true).unwrap();
        assert_eq!(c.linear_factors.len(), 2);
        assert!(c.set.contains(2));
    }
}
