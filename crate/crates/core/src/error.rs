use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },

    #[error("BIA needs at least 2 preset modes per user when serving {users} users (got L = {aps})")]
    TooFewAps { aps: usize, users: usize },

    #[error("transmission block of {slots} slots is too large to materialise (limit {limit})")]
    ScheduleTooLarge { slots: String, limit: u64 },

    #[error("user {user} has {modes} preset modes but is served by {aps} APs")]
    NotEnoughModes { user: usize, modes: usize, aps: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput { what, reason: reason.into() }
    }
}
