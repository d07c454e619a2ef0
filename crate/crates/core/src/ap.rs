//! Products of consecutive terms of an arithmetic progression,
//! `Δ(m, d, k) = m (m + d) ... (m + (k-1) d)`, and their factorizations.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::arith::{mod_inverse, split_valuation};
use crate::error::{Error, Result};
use crate::primes::PrimeTable;

/// Largest admissible single term.
pub const MAX_TERM: u64 = 1 << 63;

/// The progression parameters `(alpha, d)` with `1 <= alpha < d` and `gcd(alpha, d) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct APSpec {
    alpha: u64,
    d: u64,
}

impl APSpec {
    pub fn new(alpha: u64, d: u64) -> Result<Self> {
        if alpha == 0 || alpha >= d || alpha.gcd(&d) != 1 {
            return Err(Error::InvalidSpec { alpha, d });
        }
        Ok(Self { alpha, d })
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// The term `alpha + i d`.
    pub fn term(&self, i: u64) -> u64 {
        self.alpha + i * self.d
    }

    /// `(alpha)_j = alpha (alpha + d) ... (alpha + (j-1) d)` as a window.
    pub fn rising(&self, j: u64) -> Result<ProductWindow> {
        ProductWindow::new(self.alpha, self.d, j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProductWindow {
    m: u64,
    d: u64,
    k: u64,
}

impl ProductWindow {
    pub fn new(m: u64, d: u64, k: u64) -> Result<Self> {
        if m == 0 || d == 0 || k == 0 {
            return Err(Error::InvalidWindow(format!(
                "need m, d, k >= 1 (m={m}, d={d}, k={k})"
            )));
        }
        if m.gcd(&d) != 1 {
            return Err(Error::InvalidWindow(format!("gcd(m={m}, d={d}) != 1")));
        }
        let last = (k - 1)
            .checked_mul(d)
            .and_then(|x| x.checked_add(m))
            .filter(|&x| x <= MAX_TERM);
        if last.is_none() {
            return Err(Error::InvalidWindow(format!(
                "terms exceed 2^63 (m={m}, d={d}, k={k})"
            )));
        }
        Ok(Self { m, d, k })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn term(&self, i: u64) -> u64 {
        self.m + i * self.d
    }

    pub fn last_term(&self) -> u64 {
        self.term(self.k - 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.k).map(move |i| self.term(i))
    }
}

/// Prime factorization of a window's value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactoredProduct {
    pub window: ProductWindow,
    pub factors: BTreeMap<u64, u64>,
    pub omega: usize,
    pub max_prime: u64,
}

impl FactoredProduct {
    pub fn value(&self) -> BigUint {
        self.factors.iter().fold(BigUint::one(), |acc, (&p, &e)| {
            acc * BigUint::from(p).pow(e as u32)
        })
    }
}

/// The terms left after deleting, for each prime, one term of maximal `p`-adic valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeletionSet {
    pub window: ProductWindow,
    pub retained_indices: Vec<u64>,
    pub t0: usize,
    /// Product of the retained terms.
    #[serde(serialize_with = "crate::ser::biguint_decimal")]
    pub frak_p: BigUint,
}

pub fn window_value(w: &ProductWindow) -> BigUint {
    w.terms().fold(BigUint::one(), |acc, t| acc * t)
}

/// Factors one term by trial division. The table must reach `sqrt(x)`.
pub fn factor_u64(x: u64, table: &PrimeTable) -> Result<Vec<(u64, u32)>> {
    table.ensure_covers(x.isqrt())?;
    let mut out = Vec::new();
    let mut rest = x;
    for &p in table.primes() {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let (e, r) = split_valuation(rest, p);
            out.push((p, e));
            rest = r;
        }
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    Ok(out)
}

/// Per-term factorizations, in term order.
pub fn factor_terms(w: &ProductWindow, table: &PrimeTable) -> Result<Vec<Vec<(u64, u32)>>> {
    table.ensure_covers(w.last_term().isqrt())?;
    w.terms().map(|t| factor_u64(t, table)).collect()
}

pub fn factor_window(w: &ProductWindow, table: &PrimeTable) -> Result<FactoredProduct> {
    let mut factors = BTreeMap::new();
    for term in factor_terms(w, table)? {
        for (p, e) in term {
            *factors.entry(p).or_insert(0) += e as u64;
        }
    }
    let omega = factors.len();
    let max_prime = factors.keys().next_back().copied().unwrap_or(1);
    Ok(FactoredProduct {
        window: *w,
        factors,
        omega,
        max_prime,
    })
}

/// Smallest index `i >= 0` with `q | m + i d`, for `gcd(d, q) = 1`.
pub(crate) fn first_index_divisible(m: u64, d: u64, q: u64) -> u64 {
    let inv = mod_inverse(d % q, q).expect("d invertible modulo q");
    let neg_m = (q - m % q) % q;
    ((neg_m as u128 * inv as u128) % q as u128) as u64
}

/// `ord_p(Δ(m, d, k))`, counting for each `e` the terms divisible by `p^e`.
///
/// `p` must be prime; `p | d` yields 0 since every term is then coprime to `p`.
pub fn ord_p_window(w: &ProductWindow, p: u64) -> u64 {
    if w.d.is_multiple_of(p) {
        return 0;
    }
    let last = w.last_term();
    let mut total = 0;
    let mut q = p;
    while q <= last {
        let i0 = first_index_divisible(w.m, w.d, q);
        if i0 < w.k {
            total += (w.k - 1 - i0) / q + 1;
        }
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    total
}

pub fn build_deletion_set(w: &ProductWindow, table: &PrimeTable) -> Result<DeletionSet> {
    let terms = factor_terms(w, table)?;
    let primes: BTreeSet<u64> = terms.iter().flatten().map(|&(p, _)| p).collect();
    let omega = primes.len();
    if omega as u64 >= w.k {
        return Err(Error::EmptyRetained { omega, k: w.k });
    }
    let ord = |i: usize, p: u64| -> u32 {
        terms[i]
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    };
    let mut deleted = vec![false; w.k as usize];
    for &p in &primes {
        let max = (0..terms.len()).map(|i| ord(i, p)).max().unwrap_or(0);
        let candidates: Vec<usize> = (0..terms.len()).filter(|&i| ord(i, p) == max).collect();
        // A maximal term already removed for an earlier prime serves this one too.
        if candidates.iter().any(|&i| deleted[i]) {
            continue;
        }
        deleted[candidates[0]] = true;
    }
    let retained_indices: Vec<u64> = (0..w.k).filter(|&i| !deleted[i as usize]).collect();
    let frak_p = retained_indices
        .iter()
        .fold(BigUint::one(), |acc, &i| acc * w.term(i));
    Ok(DeletionSet {
        window: *w,
        t0: retained_indices.len(),
        retained_indices,
        frak_p,
    })
}
