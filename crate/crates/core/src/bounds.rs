//! Explicit estimates: the window bound `L(k, l)`, prime-counting and
//! factorial bounds, and the large-`k` inequality.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{factorial, first_primes, legendre};
use crate::error::{Error, Result};
use crate::interval::{ln_biguint, F64Interval, HpInterval};

/// Constant in the prime-counting upper bound.
pub const DUSART_C: f64 = 1.2762;
/// Same constant as an exact fraction.
pub const DUSART_C_RATIO: (u64, u64) = (12_762, 10_000);
/// Multiplier of `4k` in the mid-range threshold.
pub const V0: u64 = 138;
/// First `k` handled by the large-`k` inequality.
pub const LARGE_K_START: u64 = 401;
/// Index `l` of the largest prime (`p_4 = 7`) kept in the product defining `L(k, l)`.
pub const PRIME_CUT_INDEX: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LBoundInput {
    pub k: u64,
    /// Cap on `ω(Δ(m, d, k))`; `t0 = k - t`.
    pub t: u64,
    pub prime_cut_index: usize,
    pub d: u64,
}

impl LBoundInput {
    pub fn t0(&self) -> u64 {
        self.k.saturating_sub(self.t)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LBoundResult {
    pub input: LBoundInput,
    pub t0: u64,
    /// `L(k, l)^{t0}`, an integer.
    #[serde(serialize_with = "crate::ser::biguint_decimal")]
    pub power: BigUint,
    /// Largest integer `m` with `m <= L(k, l)`.
    pub floor: u64,
    /// Upper bound for `L(k, l)`, rounded up.
    pub value: f64,
    pub per_prime_l0: BTreeMap<u64, i64>,
    pub h_p_used: BTreeMap<u64, u64>,
}

impl LBoundResult {
    /// Exact test of `L(k, l) <= b`.
    pub fn certainly_le(&self, b: u64) -> bool {
        self.power <= BigUint::from(b).pow(self.t0 as u32)
    }

    /// Upper bound for `L(k, l)` as an interval endpoint at `prec` bits.
    pub fn upper_at(&self, prec: u32) -> HpInterval {
        let scaled = &self.power << (prec as usize * self.t0 as usize);
        let root = scaled.nth_root(self.t0 as u32);
        let hi = if root.pow(self.t0 as u32) == scaled {
            root.clone()
        } else {
            &root + 1u32
        };
        HpInterval::from_scaled(root.into(), hi.into(), prec)
    }
}

/// Largest `h >= 1` with `t0 < [(k-1)/p^h]`, or 0 if `t0 >= [(k-1)/p]`.
pub fn h_p(p: u64, k: u64, t0: u64) -> u64 {
    let mut h = 0;
    let mut q = p;
    while (k - 1) / q > t0 {
        h += 1;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    h
}

/// Exponent `L0(p) <= 0` of `p` in the bound.
pub fn l0(p: u64, k: u64, t0: u64, d: u64) -> (i64, u64) {
    if d.is_multiple_of(p) {
        return (-(legendre(k - 1, p) as i64), 0);
    }
    let h = h_p(p, k, t0);
    let mut sum = 0u64;
    let mut q = 1u64;
    for _ in 0..h {
        q *= p;
        sum += (k - 1) / q;
    }
    ((h as i64 * t0 as i64 - sum as i64).min(0), h)
}

/// `L(k, l) = ((k-1)! prod_{p <= p_l} p^{L0(p)})^{1/t0}`.
pub fn l_bound(input: LBoundInput) -> Result<LBoundResult> {
    let LBoundInput {
        k,
        t,
        prime_cut_index,
        d,
    } = input;
    if t >= k {
        return Err(Error::InvalidT0 { k, t });
    }
    if prime_cut_index == 0 || k < 2 || d == 0 {
        return Err(Error::PrecondViolated(format!(
            "need k >= 2, l >= 1 and d >= 1 (k={k}, l={prime_cut_index}, d={d})"
        )));
    }
    let t0 = k - t;
    let mut per_prime_l0 = BTreeMap::new();
    let mut h_p_used = BTreeMap::new();
    let mut divisor = BigUint::one();
    for p in first_primes(prime_cut_index) {
        let (e, h) = l0(p, k, t0, d);
        per_prime_l0.insert(p, e);
        h_p_used.insert(p, h);
        divisor *= BigUint::from(p).pow((-e) as u32);
    }
    let power = factorial(k - 1) / divisor;
    let floor_root = power.nth_root(t0 as u32);
    let floor = floor_root.to_u64().expect("L(k, l) fits in u64");
    let mut result = LBoundResult {
        input,
        t0,
        power,
        floor,
        value: 0.0,
        per_prime_l0,
        h_p_used,
    };
    result.value = result.upper_at(64).upper_f64();
    Ok(result)
}

/// `(k-1)!` with every prime factor of `d` removed.
pub fn e0_bound(k: u64, d: u64) -> Result<BigUint> {
    if k < 2 {
        return Err(Error::PrecondViolated(format!(
            "e0 bound needs k >= 2, got {k}"
        )));
    }
    let mut out = factorial(k - 1);
    let mut rest = d;
    let mut p = 2;
    while rest > 1 {
        if rest.is_multiple_of(p) {
            while rest.is_multiple_of(p) {
                rest /= p;
            }
            out /= BigUint::from(p).pow(legendre(k - 1, p) as u32);
        }
        p += 1;
    }
    Ok(out)
}

fn dusart_c() -> F64Interval {
    F64Interval::around(DUSART_C)
}

/// Enclosure of `(nu / ln nu)(1 + 1.2762 / ln nu)`.
pub fn dusart_pi_interval(nu: f64) -> Result<F64Interval> {
    if nu.is_nan() || nu <= 1.0 || !nu.is_finite() {
        return Err(Error::DomainError(format!(
            "prime-count bound needs nu > 1, got {nu}"
        )));
    }
    let x = F64Interval::point(nu);
    let l = x.ln();
    Ok((x / l) * (F64Interval::point(1.0) + dusart_c() / l))
}

/// Upper bound for `π(nu)`, rounded up.
pub fn dusart_pi_upper(nu: f64) -> Result<f64> {
    Ok(dusart_pi_interval(nu)?.hi)
}

/// `(k - p)/(p - 1) - ln(k-1)/ln p`, rounded down.
pub fn ord_factorial_lower(p: u64, k: u64) -> Result<f64> {
    if k < 2 || p < 2 {
        return Err(Error::DomainError(format!(
            "need k >= 2 and p >= 2 (p={p}, k={k})"
        )));
    }
    let lin = F64Interval::point(k as f64 - p as f64) / F64Interval::from_u64(p - 1);
    let logs = if k == 2 {
        F64Interval::point(0.0)
    } else {
        F64Interval::from_u64(k - 1).ln() / F64Interval::from_u64(p).ln()
    };
    Ok((lin - logs).lo)
}

/// Robbins' bounds on `ln k!`, enclosed at a fixed precision.
#[derive(Clone, Debug)]
pub struct StirlingBounds {
    pub k: u64,
    /// Encloses `ln(sqrt(2 pi k) k^k e^{-k} e^{1/(12k+1)})`.
    pub ln_lower: HpInterval,
    /// Encloses `ln(sqrt(2 pi k) k^k e^{-k} e^{1/(12k)})`.
    pub ln_upper: HpInterval,
}

impl StirlingBounds {
    /// Certifies `lower < n < upper` in the log domain.
    pub fn brackets(&self, n: &BigUint) -> bool {
        let prec = self.ln_lower.prec();
        let ln_n = ln_biguint(n, prec);
        self.ln_lower.certainly_lt(&ln_n) && ln_n.certainly_lt(&self.ln_upper)
    }

    /// The two bounds as floats, widened outward; infinite once they overflow.
    pub fn as_f64(&self) -> (f64, f64) {
        (
            self.ln_lower.lower_f64().exp().next_down(),
            self.ln_upper.upper_f64().exp().next_up(),
        )
    }
}

pub fn stirling_bounds(k: u64) -> Result<StirlingBounds> {
    stirling_bounds_at(k, HpInterval::DEFAULT_PREC)
}

pub fn stirling_bounds_at(k: u64, prec: u32) -> Result<StirlingBounds> {
    if k == 0 {
        return Err(Error::DomainError("Stirling bounds need k >= 1".into()));
    }
    let kk = HpInterval::from_int(k, prec);
    let two_pi_k = &(&HpInterval::pi(prec) * &HpInterval::from_int(2, prec)) * &kk;
    let half = HpInterval::from_u64_ratio(1, 2, prec);
    let ln_k = ln_biguint(&BigUint::from(k), prec);
    let core = &(&(&half * &two_pi_k.ln()) + &(&kk * &ln_k)) - &kk;
    let ln_lower = &core + &HpInterval::from_u64_ratio(1, 12 * k + 1, prec);
    let ln_upper = &core + &HpInterval::from_u64_ratio(1, 12 * k, prec);
    Ok(StirlingBounds {
        k,
        ln_lower,
        ln_upper,
    })
}

/// Both sides of `ln(8 e v0) < 4 ln(4 v0 k)/ln(4k) (1 + 1.2762/ln(4k))`.
pub fn large_k_sides(k: u64, v0: u64) -> (F64Interval, F64Interval) {
    let four_k = F64Interval::from_u64(4 * k);
    let x = four_k.ln();
    let lhs = F64Interval::from_u64(8 * v0).ln() + F64Interval::point(1.0);
    let num = F64Interval::from_u64(4 * v0 * k).ln();
    let rhs = F64Interval::point(4.0) * num / x * (F64Interval::point(1.0) + dusart_c() / x);
    (lhs, rhs)
}

/// True iff the inequality is certified to fail at `k`, i.e. `lhs >= rhs`.
pub fn large_k_contradiction(k: u64, v0: u64) -> Result<bool> {
    if k < 2 || v0 == 0 {
        return Err(Error::DomainError(format!(
            "need k >= 2 and v0 >= 1 (k={k}, v0={v0})"
        )));
    }
    let (lhs, rhs) = large_k_sides(k, v0);
    Ok(rhs.certainly_le(lhs))
}

/// The same test with big-integer fixed-point logarithms.
pub fn large_k_contradiction_hp(k: u64, v0: u64, prec: u32) -> Result<bool> {
    if k < 2 || v0 == 0 {
        return Err(Error::DomainError(format!(
            "need k >= 2 and v0 >= 1 (k={k}, v0={v0})"
        )));
    }
    let ln = |n: u64| ln_biguint(&BigUint::from(n), prec);
    let one = HpInterval::from_int(1, prec);
    let lhs = &ln(8 * v0) + &one;
    let x = ln(4 * k);
    let c = HpInterval::from_u64_ratio(DUSART_C_RATIO.0, DUSART_C_RATIO.1, prec);
    let factor = &one + &c.div(&x);
    let rhs = &(&HpInterval::from_int(4, prec) * &ln(4 * v0 * k).div(&x)) * &factor;
    Ok(rhs.certainly_le(&lhs))
}

/// With `x = ln 4k` the right side is `4 (1 + ln v0 / x)(1 + 1.2762 / x)`:
/// both factors are positive and non-increasing in `x` as soon as `v0 >= 1`.
pub fn rhs_is_nonincreasing(v0: u64) -> bool {
    v0 >= 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridOutcome {
    pub k_from: u64,
    pub k_to: u64,
    pub checked: u64,
    pub first_failure: Option<u64>,
}

/// Checks `large_k_contradiction` at every `k` in `[k_from, k_to]`.
pub fn contradiction_grid(k_from: u64, k_to: u64, v0: u64) -> Result<GridOutcome> {
    let mut first_failure = None;
    let mut checked = 0;
    for k in k_from..=k_to {
        checked += 1;
        if !large_k_contradiction(k, v0)? {
            first_failure = Some(k);
            break;
        }
    }
    Ok(GridOutcome {
        k_from,
        k_to,
        checked,
        first_failure,
    })
}

/// Exact test of `v0 < 10^3 / (4 * 1.798158) - 1/2`, i.e.
/// `(2 v0 + 1) * 7192632 < 2 * 10^9`.
pub fn corollary_threshold_check(v0: u64) -> bool {
    (2 * v0 as u128 + 1) * 7_192_632 < 2_000_000_000
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_p_examples() {
        assert_eq!(h_p(2, 21, 3), 2);
        assert_eq!(h_p(2, 3, 2), 0);
        assert_eq!(h_p(7, 50, 5), 1);
    }

    #[test]
    fn l0_is_nonpositive() {
        for k in 2..200 {
            for t0 in 1..k {
                for p in [2, 3, 5, 7, 11] {
                    let (e, _) = l0(p, k, t0, 4);
                    assert!(e <= 0);
                    assert!(-e as u64 <= legendre(k - 1, p));
                }
            }
        }
    }

    #[test]
    fn l_bound_small_cases() {
        let r = l_bound(LBoundInput {
            k: 8,
            t: 7,
            prime_cut_index: 4,
            d: 4,
        })
        .unwrap();
        assert_eq!((r.t0, r.floor), (1, 105));
        assert_eq!(r.power, BigUint::from(105u32));
        assert!(r.certainly_le(105) && !r.certainly_le(104));
        let r = l_bound(LBoundInput {
            k: 7,
            t: 6,
            prime_cut_index: 4,
            d: 4,
        })
        .unwrap();
        assert_eq!(r.floor, 15);
        assert!(matches!(
            l_bound(LBoundInput {
                k: 7,
                t: 7,
                prime_cut_index: 4,
                d: 4
            }),
            Err(Error::InvalidT0 { .. })
        ));
    }

    #[test]
    fn upper_enclosure_tightens_with_precision() {
        let r = l_bound(LBoundInput {
            k: 10,
            t: 8,
            prime_cut_index: 4,
            d: 4,
        })
        .unwrap();
        let coarse = r.upper_at(64);
        let fine = r.upper_at(128).with_prec(64);
        assert!(fine.scaled_endpoints().1 <= coarse.scaled_endpoints().1);
        assert!((r.value - 30.74).abs() < 0.01);
    }

    #[test]
    fn e0_examples() {
        assert_eq!(e0_bound(5, 4).unwrap(), BigUint::from(3u32));
        assert_eq!(e0_bound(2, 4).unwrap(), BigUint::from(1u32));
        assert_eq!(e0_bound(7, 4).unwrap(), BigUint::from(45u32));
        assert_eq!(e0_bound(7, 6).unwrap(), BigUint::from(5u32));
    }

    #[test]
    fn dusart_examples() {
        assert!(dusart_pi_upper(1e6).unwrap() >= 78498.0);
        assert!(dusart_pi_upper(1604.0).unwrap() >= 252.0);
        assert!(dusart_pi_upper(2.0).unwrap() >= 1.0);
        assert!(dusart_pi_upper(1.0).is_err());
    }

    #[test]
    fn ord_factorial_examples() {
        let v = ord_factorial_lower(2, 5).unwrap();
        assert!(v <= 1.0 && v > 0.999);
        let v = ord_factorial_lower(3, 4).unwrap();
        assert!(v <= -0.5 && v > -0.501);
        assert!(ord_factorial_lower(2, 2).unwrap() <= 0.0);
    }

    #[test]
    fn stirling_examples() {
        for k in [1u64, 2, 10, 401] {
            assert!(stirling_bounds(k).unwrap().brackets(&factorial(k)), "k={k}");
        }
        let (lo, hi) = stirling_bounds(10).unwrap().as_f64();
        assert!(lo > 3628800.0 * 0.99 && hi < 3628800.0 * 1.01);
        assert!(!stirling_bounds(10)
            .unwrap()
            .brackets(&BigUint::from(3628799u32 * 2)));
    }

    #[test]
    fn large_k_examples() {
        assert!(large_k_contradiction(401, 138).unwrap());
        assert!(large_k_contradiction_hp(401, 138, 128).unwrap());
        assert!(!large_k_contradiction(2, 138).unwrap());
        assert!(!large_k_contradiction_hp(2, 138, 128).unwrap());
    }

    #[test]
    fn threshold_examples() {
        assert!(corollary_threshold_check(138));
        assert!(!corollary_threshold_check(139));
        assert!(corollary_threshold_check(1));
    }
}
