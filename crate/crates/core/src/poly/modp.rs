//! Dense polynomials over the field with `p` elements, `p < 2^32`.
//!
//! Coefficients are ascending; the zero polynomial is the empty vector.

use crate::arith::{mod_inverse, mul_mod};

pub type Fp = Vec<u64>;

pub fn trim(mut f: Fp) -> Fp {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

/// Degree, with the zero polynomial reported as `None`.
pub fn degree(f: &[u64]) -> Option<usize> {
    f.len().checked_sub(1)
}

fn is_one(f: &[u64]) -> bool {
    f == [1]
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> Fp {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(out)
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Fp, Fp) {
    let db = degree(b).expect("division by zero polynomial");
    let inv = mod_inverse(b[db], p).expect("leading coefficient invertible");
    let mut r = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), trim(r));
    }
    let mut q = vec![0; r.len() - db];
    for i in (0..q.len()).rev() {
        let c = mul_mod(r[i + db], inv, p);
        q[i] = c;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + p - mul_mod(c, bj, p)) % p;
            }
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

pub fn rem(a: &[u64], b: &[u64], p: u64) -> Fp {
    divrem(a, b, p).1
}

pub fn monic(f: &[u64], p: u64) -> Fp {
    match f.last() {
        None => Vec::new(),
        Some(&lc) => {
            let inv = mod_inverse(lc, p).expect("nonzero leading coefficient");
            f.iter().map(|&c| mul_mod(c, inv, p)).collect()
        }
    }
}

/// Monic greatest common divisor.
pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Fp {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    monic(&x, p)
}

pub fn derivative(f: &[u64], p: u64) -> Fp {
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
            .collect(),
    )
}

/// `g` with `g(x)^p = f(x)`; valid when `f' = 0`, so only powers `x^{pi}` occur.
fn pth_root(f: &[u64], p: u64) -> Fp {
    // Over the prime field, c^p = c, so coefficients carry over unchanged.
    f.iter().step_by(p as usize).copied().collect()
}

/// `base^e mod m`.
pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Fp {
    let mut acc = vec![1];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
        b = rem(&mul(&b, &b, p), m, p);
        e >>= 1;
    }
    rem(&acc, m, p)
}

/// Squarefree factors `(g_i, i)` of a monic `f`, with `f = prod g_i^i`.
pub fn squarefree_decomposition(f: &[u64], p: u64) -> Vec<(Fp, usize)> {
    let mut out = Vec::new();
    if degree(f).unwrap_or(0) == 0 {
        return out;
    }
    let df = derivative(f, p);
    let mut c = gcd(f, &df, p);
    let mut w = divrem(f, &c, p).0;
    let mut i = 1;
    while !is_one(&w) {
        let y = gcd(&w, &c, p);
        let fac = divrem(&w, &y, p).0;
        if degree(&fac).unwrap_or(0) > 0 {
            out.push((fac, i));
        }
        c = divrem(&c, &y, p).0;
        w = y;
        i += 1;
    }
    if !is_one(&c) {
        for (g, j) in squarefree_decomposition(&pth_root(&c, p), p) {
            out.push((g, j * p as usize));
        }
    }
    out
}

/// Degrees of the irreducible factors of a squarefree monic `f`.
pub fn distinct_degree(f: &[u64], p: u64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut g = f.to_vec();
    let x = vec![0, 1];
    let mut h = x.clone();
    let mut d = 1;
    while degree(&g).unwrap_or(0) >= 2 * d {
        h = powmod(&h, p, &g, p);
        let common = gcd(&g, &sub(&h, &x, p), p);
        let dc = degree(&common).unwrap_or(0);
        if dc > 0 {
            out.extend(std::iter::repeat_n(d, dc / d));
            g = divrem(&g, &common, p).0;
            h = rem(&h, &g, p);
        }
        d += 1;
    }
    if let Some(dg) = degree(&g).filter(|&dg| dg > 0) {
        out.push(dg);
    }
    out
}

/// Degrees of all irreducible factors of `f` (nonzero), with multiplicity.
pub fn factor_degrees(f: &[u64], p: u64) -> Vec<usize> {
    let f = monic(&trim(f.to_vec()), p);
    let mut out: Vec<usize> = squarefree_decomposition(&f, p)
        .into_iter()
        .flat_map(|(g, mult)| {
            distinct_degree(&g, p)
                .into_iter()
                .flat_map(move |d| std::iter::repeat_n(d, mult))
        })
        .collect();
    out.sort_unstable();
    out
}

pub fn is_squarefree(f: &[u64], p: u64) -> bool {
    let df = derivative(f, p);
    !df.is_empty() && is_one(&gcd(f, &df, p))
}

pub fn eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter()
        .rev()
        .fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
}

/// All roots in `0..p`, by exhaustion.
pub fn roots(f: &[u64], p: u64) -> Vec<u64> {
    (0..p).filter(|&x| eval(f, x, p) == 0).collect()
}

/// Number of irreducible factors of degree `d` counted by brute force; test helper.
#[cfg(test)]
pub(crate) fn count_monic_irreducibles(d: u32, p: u64) -> u64 {
    // Necklace formula: (1/d) sum_{e | d} mu(e) p^{d/e}.
    let mu = |mut n: u32| -> i64 {
        let mut r = 1;
        let mut q = 2;
        while q * q <= n {
            if n.is_multiple_of(q) {
                n /= q;
                if n.is_multiple_of(q) {
                    return 0;
                }
                r = -r;
            }
            q += 1;
        }
        if n > 1 {
            r = -r;
        }
        r
    };
    let total: i64 = (1..=d)
        .filter(|e| d.is_multiple_of(*e))
        .map(|e| mu(e) * p.pow(d / e) as i64)
        .sum();
    (total / d as i64) as u64
}
