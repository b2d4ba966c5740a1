use thiserror::Error;

use super::policy::PolicyName;
use crate::protocol::{MoveError, Role, Step};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("no protocol `{0}`")]
    UnknownProtocol(String),
    #[error("bad role bindings: {0}")]
    BadBinding(String),
    #[error("expected seq {expected} but the session is at {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("role {role} is played by {policy}")]
    RoleNotHuman { role: Role, policy: PolicyName },
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("corrupt session log: {0}")]
    CorruptLog(String),
    #[error("storage: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "NOT_FOUND",
            ServiceError::UnknownProtocol(_) => "UNKNOWN_PROTOCOL",
            ServiceError::BadBinding(_) => "BAD_BINDING",
            ServiceError::Conflict { .. } => "CONFLICT",
            ServiceError::RoleNotHuman { .. } => "ACTOR_VIOLATION",
            ServiceError::Move(e) => e.code(),
            ServiceError::CorruptLog(_) => "CORRUPT_LOG",
            ServiceError::Io(_) => "STORAGE",
        }
    }

    /// HTTP status for the error body.
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::NotFound(_) | ServiceError::UnknownProtocol(_) => 404,
            ServiceError::Conflict { .. } | ServiceError::Move(MoveError::Terminated(_)) => 409,
            ServiceError::CorruptLog(_) | ServiceError::Io(_) => 500,
            _ => 422,
        }
    }

    pub fn legal_moves(&self) -> Option<&[Step]> {
        match self {
            ServiceError::Move(e) => e.legal_moves(),
            _ => None,
        }
    }
}
