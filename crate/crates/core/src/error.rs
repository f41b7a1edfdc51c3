use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sigma {0}° outside [5°, 90°]")]
    SigmaOutOfRange(f64),
    #[error("invalid cell geometry: ri={ri}, ro={ro} (need ro > ri > 0)")]
    InvalidGeometry { ri: f64, ro: f64 },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("drift angle {0}° outside (-270°, 270°)")]
    DriftAngleOutOfRange(f64),
    #[error("direction index {0} outside 0..=5")]
    InvalidDirection(usize),
    #[error("heading {0} outside 0..=5")]
    InvalidHeading(u8),
    #[error("direction probabilities must be nonnegative and sum to 1")]
    InvalidProbabilities,

    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("cell ({q}, {r}) is out of coverage")]
    OutOfCoverage { q: i32, r: i32 },

    #[error("unknown station {0}")]
    UnknownStation(u64),
    #[error("unknown job {0}")]
    UnknownJob(u64),
    #[error("unknown sub job {0}")]
    UnknownSubJob(u64),
    #[error("initiator {0} is not registered in the grid")]
    InitiatorNotInGrid(u64),
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("station {ms} left the grid before sub job {subjob} was dispatched")]
    DispatchAborted { subjob: u64, ms: u64 },
    #[error("sub job {subjob} is {status}, expected {expected}")]
    WrongStatus {
        subjob: u64,
        status: &'static str,
        expected: &'static str,
    },
    #[error("sub job {subjob} is assigned to {assignee:?}, not station {ms}")]
    AssigneeMismatch {
        subjob: u64,
        ms: u64,
        assignee: Option<u64>,
    },
    #[error("move class {0} is not valid for this operation")]
    WrongMoveClass(&'static str),

    #[error("config: {0}")]
    Config(String),
    #[error("event log line {line}: {msg}")]
    Log { line: usize, msg: String },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
