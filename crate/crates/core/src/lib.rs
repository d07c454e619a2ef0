//! Verification engine for the irreducibility of the generalized
//! Hermite-Laguerre polynomials `G_{1/4}` and `G_{3/4}`.
//!
//! The crate is organised around the computational steps of the argument:
//!
//! * [`ap`]: products `Δ(m, d, k)` of arithmetic-progression windows,
//!   their factorizations and deletion sets.
//! * [`criterion`]: the prime criterion excluding a factor of degree `k`,
//!   its slope oracle, and the per-`(n, k)` certificate pipeline.
//! * [`bounds`]: `L(k, l)`, prime-counting and factorial bounds, the
//!   large-`k` inequality.
//! * [`primes`]: sieves, primes mod 4, class gaps, Chebyshev sums.
//! * [`smooth`]: the smooth-window scan for `k <= 6`.
//! * [`poly`]: exact `G` and a mod-`p` factor-degree oracle.
//! * [`interval`]: directed-rounding arithmetic backing every inequality.

pub mod ap;
pub mod arith;
pub mod bounds;
pub mod criterion;
pub mod error;
pub mod interval;
pub mod poly;
pub mod primes;
pub mod ser;
pub mod smooth;

pub use ap::{APSpec, DeletionSet, FactoredProduct, ProductWindow};
pub use criterion::{
    Exclusion, ExclusionCertificate, ExclusionRule, LemmaTrace, Pipeline, TheoremReport,
};
pub use error::{Error, Result};
pub use interval::{F64Interval, HpInterval};
pub use poly::{CoefficientProfile, DegreeSet, IntPolynomial, Verdict};
pub use primes::{Mod4Class, PrimeTable, SpfSieve};
pub use smooth::{SmallCaseTable, SmoothHit};
