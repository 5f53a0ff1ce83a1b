use crate::state_graph::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    #[error("period length mismatch: {left} slots vs {right} slots")]
    PeriodMismatch { left: usize, right: usize },

    #[error("vertex ({side}, slot {slot}) appears in more than one edge")]
    Exclusivity { side: Side, slot: usize },

    #[error("two edges share active slot {slot}")]
    ScheduleConflict { slot: usize },

    #[error("edge ({u}, {v}) activates at slot {slot}, outside the {period_len}-slot period")]
    SlotOutOfPeriod { u: usize, v: usize, slot: usize, period_len: usize },

    #[error("device {side} spends {spent} units by slot {slot} but harvested only {harvested}")]
    BudgetViolation { side: Side, slot: usize, spent: usize, harvested: usize },

    #[error("edge ({u}, {v}) uses a slot where device {side} did not harvest")]
    NotHarvested { side: Side, u: usize, v: usize },

    #[error("oracle refuses {a}x{b} instance: budget is {limit} vertexes per side")]
    OracleBudget { a: usize, b: usize, limit: usize },

    #[error("pair {pair}: {source}")]
    Pair { pair: usize, source: Box<Error> },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }
}
