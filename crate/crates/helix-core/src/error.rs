use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} outside [0,1]")]
    ProbabilityRange(f64),

    #[error("bias p={0} outside (0,1)")]
    BiasRange(f64),

    #[error("tail values must be nonincreasing, violated at x={x}")]
    NonMonotoneTail { x: i64 },

    #[error("tail value {value} at x={x} outside [0,1]")]
    TailValueRange { x: i64, value: f64 },

    #[error("tail support hi={hi} exceeds generation index n={n}")]
    SupportPastLevel { hi: i64, n: u32 },

    #[error("expected consecutive levels, got n={a} followed by n={b}")]
    LevelMismatch { a: u32, b: u32 },

    #[error("degenerate anchor value {0}; need 0 < F(k) <= 1/2")]
    DegenerateAnchor(f64),

    #[error("no non-degenerate invariant profile for p={0}; requires p > 1/2")]
    NoFixedPoint(f64),

    #[error("requires p < 1/2, got p={0}")]
    RequiresDrift(f64),

    #[error("no critical tilt: the rate limit {0} is not positive")]
    NoCriticalTilt(f64),

    #[error("step law satisfies neither support condition; no helix parameters exist")]
    NoSolution,

    #[error("tilt argument must be nonnegative, got {0}")]
    GammaRange(f64),

    #[error("operation budget exceeded (needed about {needed}, budget {budget})")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("particle count would overflow 128 bits at level {0}")]
    LevelOverflow(u32),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid argument {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("root bracketing failed on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Operation counter used by the dynamic programs so that open-ended
/// experiments stay within a configured cost ceiling.
#[derive(Debug, Clone, Copy)]
pub struct OpBudget {
    limit: u64,
    used: u64,
}

/// Default ceiling: generous enough for every documented experiment,
/// small enough to stop runaway parameter choices.
pub const DEFAULT_OP_BUDGET: u64 = 2_000_000_000;

impl OpBudget {
    pub fn new(limit: u64) -> Self {
        OpBudget { limit, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Record `ops` operations, failing once the running total passes the limit.
    pub fn charge(&mut self, ops: u64) -> Result<()> {
        self.used = self.used.saturating_add(ops);
        if self.used > self.limit {
            return Err(Error::BudgetExceeded {
                needed: self.used,
                budget: self.limit,
            });
        }
        Ok(())
    }
}

impl Default for OpBudget {
    fn default() -> Self {
        OpBudget::new(DEFAULT_OP_BUDGET)
    }
}
