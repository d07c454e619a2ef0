//! Directed-rounding arithmetic for certified inequality checks.
//!
//! Two flavours are provided:
//!
//! * [`F64Interval`] widens every floating-point result by one ulp in each
//!   direction (two ulps after `ln`, whose platform implementation is assumed
//!   accurate to better than one ulp). It is cheap enough for grids with
//!   millions of points.
//! * [`HpInterval`] stores both endpoints as big integers scaled by `2^prec`.
//!   Every operation rounds the lower endpoint toward `-inf` and the upper
//!   endpoint toward `+inf`; `ln` and `pi` come from series whose truncation
//!   remainders are bounded explicitly. Nothing here trusts a libm.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

// ---------------------------------------------------------------------------
// f64 intervals
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64Interval {
    pub lo: f64,
    pub hi: f64,
}

impl F64Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Encloses a decimal constant that is not exactly representable.
    pub fn around(x: f64) -> Self {
        Self {
            lo: x.next_down(),
            hi: x.next_up(),
        }
    }

    pub fn from_u64(n: u64) -> Self {
        if n < (1u64 << 53) {
            Self::point(n as f64)
        } else {
            Self::around(n as f64)
        }
    }

    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "ln of non-positive interval");
        Self {
            lo: self.lo.ln().next_down().next_down(),
            hi: self.hi.ln().next_up().next_up(),
        }
    }

    pub fn sqrt(self) -> Self {
        assert!(self.lo >= 0.0);
        Self {
            lo: self.lo.sqrt().next_down().max(0.0),
            hi: self.hi.sqrt().next_up(),
        }
    }

    pub fn certainly_lt(self, other: Self) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(self, other: Self) -> bool {
        self.hi <= other.lo
    }
}

impl Add for F64Interval {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }
}

impl Sub for F64Interval {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            lo: (self.lo - o.hi).next_down(),
            hi: (self.hi - o.lo).next_up(),
        }
    }
}

impl Neg for F64Interval {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for F64Interval {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Self {
            lo: c.iter().copied().fold(f64::INFINITY, f64::min).next_down(),
            hi: c
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                .next_up(),
        }
    }
}

impl std::ops::Div for F64Interval {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(
            o.lo > 0.0 || o.hi < 0.0,
            "division by interval containing zero"
        );
        let c = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        Self {
            lo: c.iter().copied().fold(f64::INFINITY, f64::min).next_down(),
            hi: c
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                .next_up(),
        }
    }
}

// ---------------------------------------------------------------------------
// big-integer fixed-point intervals
// ---------------------------------------------------------------------------

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// The closed interval `[lo, hi] / 2^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpInterval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl HpInterval {
    pub const DEFAULT_PREC: u32 = 128;

    pub fn from_int(v: impl Into<BigInt>, prec: u32) -> Self {
        let scaled = v.into() << prec as usize;
        Self {
            lo: scaled.clone(),
            hi: scaled,
            prec,
        }
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero());
        let (n, d) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let scaled = n << prec as usize;
        Self {
            lo: floor_div(&scaled, &d),
            hi: ceil_div(&scaled, &d),
            prec,
        }
    }

    pub fn from_u64_ratio(num: u64, den: u64, prec: u32) -> Self {
        Self::from_ratio(&BigInt::from(num), &BigInt::from(den), prec)
    }

    /// The interval `[lo, hi] / 2^prec` from already-scaled endpoints.
    pub fn from_scaled(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        assert!(lo <= hi, "empty interval");
        Self { lo, hi, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Scaled endpoints `(lo, hi)`; the represented interval is `[lo, hi] / 2^prec`.
    pub fn scaled_endpoints(&self) -> (&BigInt, &BigInt) {
        (&self.lo, &self.hi)
    }

    /// Width in units of `2^-prec`.
    pub fn width_ulps(&self) -> BigInt {
        &self.hi - &self.lo
    }

    fn check_prec(&self, other: &Self) {
        assert_eq!(self.prec, other.prec, "mixed-precision interval arithmetic");
    }

    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.check_prec(other);
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Self) -> bool {
        self.check_prec(other);
        self.hi <= other.lo
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.check_prec(other);
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Largest `f64` not above the lower endpoint.
    pub fn lower_f64(&self) -> f64 {
        scaled_to_f64(&self.lo, self.prec).next_down()
    }

    /// Smallest `f64` not below the upper endpoint.
    pub fn upper_f64(&self) -> f64 {
        scaled_to_f64(&self.hi, self.prec).next_up()
    }

    pub fn midpoint_f64(&self) -> f64 {
        scaled_to_f64(&((&self.lo + &self.hi) >> 1usize), self.prec)
    }

    /// Re-rounds to a coarser precision (outward).
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = (prec - self.prec) as usize;
                Self {
                    lo: &self.lo << s,
                    hi: &self.hi << s,
                    prec,
                }
            }
            Ordering::Less => {
                let d = pow2(self.prec - prec);
                Self {
                    lo: floor_div(&self.lo, &d),
                    hi: ceil_div(&self.hi, &d),
                    prec,
                }
            }
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.check_prec(other);
        assert!(
            other.lo.is_positive() || other.hi.is_negative(),
            "division by interval containing zero"
        );
        let p = self.prec as usize;
        let (a, b) = (&self.lo << p, &self.hi << p);
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for n in [&a, &b] {
            for d in [&other.lo, &other.hi] {
                let f = floor_div(n, d);
                let c = ceil_div(n, d);
                lo = Some(lo.map_or(f.clone(), |x| x.min(f)));
                hi = Some(hi.map_or(c.clone(), |x| x.max(c)));
            }
        }
        Self {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.lo.is_negative(), "sqrt of negative interval");
        let p = self.prec as usize;
        let lo = (self.lo.magnitude() << p).sqrt();
        let hi_arg = self.hi.magnitude() << p;
        let mut hi = hi_arg.sqrt();
        if &hi * &hi != hi_arg {
            hi += 1u32;
        }
        Self {
            lo: lo.into(),
            hi: hi.into(),
            prec: self.prec,
        }
    }

    /// Natural logarithm; the interval must be strictly positive.
    pub fn ln(&self) -> Self {
        assert!(self.lo.is_positive(), "ln of non-positive interval");
        let den = BigUint::one() << self.prec as usize;
        let lo = ln_ratio(self.lo.magnitude(), &den, self.prec).lo;
        let hi = ln_ratio(self.hi.magnitude(), &den, self.prec).hi;
        Self {
            lo,
            hi,
            prec: self.prec,
        }
    }

    pub fn pi(prec: u32) -> Self {
        let w = prec + 16;
        let (a5l, a5h) = atan_inv_bounds(5, w);
        let (a239l, a239h) = atan_inv_bounds(239, w);
        let lo = a5l * 16 - a239h * 4;
        let hi = a5h * 16 - a239l * 4;
        Self { lo, hi, prec: w }.with_prec(prec)
    }

    pub fn ln2(prec: u32) -> Self {
        let w = prec + 16;
        let (l, h) = atanh_bounds(&BigInt::one(), &BigInt::from(3), w);
        Self {
            lo: l << 1usize,
            hi: h << 1usize,
            prec: w,
        }
        .with_prec(prec)
    }
}

impl Add for &HpInterval {
    type Output = HpInterval;
    fn add(self, o: &HpInterval) -> HpInterval {
        self.check_prec(o);
        HpInterval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
            prec: self.prec,
        }
    }
}

impl Sub for &HpInterval {
    type Output = HpInterval;
    fn sub(self, o: &HpInterval) -> HpInterval {
        self.check_prec(o);
        HpInterval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
            prec: self.prec,
        }
    }
}

impl Neg for &HpInterval {
    type Output = HpInterval;
    fn neg(self) -> HpInterval {
        HpInterval {
            lo: -&self.hi,
            hi: -&self.lo,
            prec: self.prec,
        }
    }
}

impl Mul for &HpInterval {
    type Output = HpInterval;
    fn mul(self, o: &HpInterval) -> HpInterval {
        self.check_prec(o);
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let min = c.iter().min().unwrap();
        let max = c.iter().max().unwrap();
        let d = pow2(self.prec);
        HpInterval {
            lo: floor_div(min, &d),
            hi: ceil_div(max, &d),
            prec: self.prec,
        }
    }
}

impl fmt::Display for HpInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lower_f64(), self.upper_f64())
    }
}

fn scaled_to_f64(v: &BigInt, prec: u32) -> f64 {
    // Keep 64 significant bits before the float conversion so huge endpoints
    // do not overflow the intermediate.
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap() * 2f64.powi(-(prec as i32));
    }
    let shift = bits - 64;
    let top = (v >> shift as usize).to_f64().unwrap();
    top * 2f64.powi(shift as i32 - prec as i32)
}

/// Bounds for `atanh(a / b) * 2^w` with `0 <= a/b <= 1/3`.
fn atanh_bounds(a: &BigInt, b: &BigInt, w: u32) -> (BigInt, BigInt) {
    debug_assert!(!a.is_negative() && b.is_positive());
    debug_assert!(a * 3 <= *b);
    let one = pow2(w);
    let num = a << w as usize;
    let zl = floor_div(&num, b);
    let zh = ceil_div(&num, b);
    if zh.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let z2l = floor_div(&(&zl * &zl), &one);
    let z2h = ceil_div(&(&zh * &zh), &one);
    let (mut pl, mut ph) = (zl, zh);
    let (mut sl, mut sh) = (BigInt::zero(), BigInt::zero());
    let mut i: u64 = 0;
    loop {
        let den = BigInt::from(2 * i + 1);
        sl += floor_div(&pl, &den);
        sh += ceil_div(&ph, &den);
        pl = floor_div(&(&pl * &z2l), &one);
        ph = ceil_div(&(&ph * &z2h), &one);
        i += 1;
        if ph <= BigInt::one() {
            break;
        }
    }
    // Tail: sum_{j>=i} z^(2j+1)/(2j+1) <= z^(2i+1) / ((2i+1)(1 - z^2)), and z <= 1/3.
    sh += ceil_div(&(ph * 9), &BigInt::from(8 * (2 * i + 1)));
    (sl, sh)
}

/// Bounds for `atan(1/n) * 2^w`, `n >= 2`.
fn atan_inv_bounds(n: u64, w: u32) -> (BigInt, BigInt) {
    let one = pow2(w);
    let n2 = BigInt::from(n) * n;
    let mut npow = BigInt::from(n);
    let (mut sl, mut sh) = (BigInt::zero(), BigInt::zero());
    let mut i: u64 = 0;
    loop {
        let den = &npow * (2 * i + 1);
        let tl = floor_div(&one, &den);
        let th = ceil_div(&one, &den);
        if th <= BigInt::one() {
            // Alternating series with decreasing terms: |remainder| <= next term.
            sl -= &th;
            sh += &th;
            break;
        }
        if i.is_multiple_of(2) {
            sl += tl;
            sh += th;
        } else {
            sl -= th;
            sh -= tl;
        }
        npow *= &n2;
        i += 1;
    }
    (sl, sh)
}

/// Encloses `ln(num / den)` at precision `prec`. Both arguments must be positive.
pub fn ln_ratio(num: &BigUint, den: &BigUint, prec: u32) -> HpInterval {
    assert!(!num.is_zero() && !den.is_zero());
    let w = prec + 40;
    let mut e = num.bits() as i64 - den.bits() as i64;
    let scaled = |e: i64| -> (BigInt, BigInt) {
        let a = if e < 0 {
            num << (-e) as usize
        } else {
            num.clone()
        };
        let b = if e > 0 {
            den << e as usize
        } else {
            den.clone()
        };
        (
            BigInt::from_biguint(Sign::Plus, a),
            BigInt::from_biguint(Sign::Plus, b),
        )
    };
    let (mut a, mut b) = scaled(e);
    if a < b {
        e -= 1;
        (a, b) = scaled(e);
    }
    // Now 1 <= a/b < 2, so z = (a-b)/(a+b) lies in [0, 1/3).
    let (tl, th) = atanh_bounds(&(&a - &b), &(&a + &b), w);
    let (l2l, l2h) = atanh_bounds(&BigInt::one(), &BigInt::from(3), w);
    let (l2l, l2h) = (l2l << 1usize, l2h << 1usize);
    let eb = BigInt::from(e);
    let (lo_e, hi_e) = if e >= 0 {
        (&eb * &l2l, &eb * &l2h)
    } else {
        (&eb * &l2h, &eb * &l2l)
    };
    let lo = lo_e + (tl << 1usize);
    let hi = hi_e + (th << 1usize);
    HpInterval { lo, hi, prec: w }.with_prec(prec)
}

/// Encloses `ln(n)` for a positive big integer.
pub fn ln_biguint(n: &BigUint, prec: u32) -> HpInterval {
    ln_ratio(n, &BigUint::one(), prec)
}
