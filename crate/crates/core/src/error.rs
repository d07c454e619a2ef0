use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "invalid progression: need 1 <= alpha < d and gcd(alpha, d) = 1, got alpha={alpha}, d={d}"
    )]
    InvalidSpec { alpha: u64, d: u64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("prime table limit {limit} is below the required cutoff {required}")]
    TableTooSmall { required: u64, limit: u64 },

    #[error("sieve limit {limit} exceeds the memory budget ceiling {ceiling}")]
    LimitTooLarge { limit: u64, ceiling: u64 },

    #[error("window has omega={omega} >= k={k}; no terms survive deletion")]
    EmptyRetained { omega: usize, k: u64 },

    #[error("precondition violated: {0}")]
    PrecondViolated(String),

    #[error("t0 = k - t must be positive (k={k}, t={t})")]
    InvalidT0 { k: u64, t: u64 },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("ceiling {ceiling} not covered by prime table with limit {limit}")]
    CeilingExceedsTable { ceiling: u64, limit: u64 },

    #[error("sample point {nu} outside [nu0={nu0}, min(limit, 1e10))")]
    SampleOutOfRange { nu: u64, nu0: u64 },

    #[error("coefficient profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("leading coefficient vanishes modulo {p}")]
    LeadingVanishes { p: u64 },

    #[error("(m={m}, k={k}) is not a smooth hit")]
    NotAHit { m: u64, k: u64 },

    #[error("no prime satisfies the exclusion criterion for (m={m}, k={k})")]
    NoWitness { m: u64, k: u64 },

    #[error("certificate failed re-verification: {0}")]
    CertificateInvalid(String),

    #[error("prime table cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
