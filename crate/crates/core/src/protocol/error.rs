use thiserror::Error;

use super::types::{AttachmentKind, DialogState, MoveKind, Role, Step};

/// Errors raised while loading or validating a protocol document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("malformed protocol document: {0}")]
    Syntax(String),
    #[error("unknown {what} `{name}`")]
    UnknownSymbol { what: &'static str, name: String },
    #[error("transition ({from}, {kind}, {actor}) is defined more than once")]
    Nondeterministic { from: DialogState, kind: MoveKind, actor: Role },
    #[error("state {0} is not reachable from the initial state")]
    UnreachableState(DialogState),
    #[error("no terminal state is reachable from {0}")]
    DeadState(DialogState),
    #[error("terminal state {0} has outgoing transitions")]
    TerminalHasExit(DialogState),
    #[error("move kind {0} has no actor constraint")]
    MissingActorConstraint(MoveKind),
    #[error("transition ({from}, {kind}, {actor}) contradicts the actor constraint for {kind}")]
    ActorMismatch { from: DialogState, kind: MoveKind, actor: Role },
    #[error("move kind {0} has an actor constraint but no transition uses it")]
    UnusedMoveKind(MoveKind),
}

impl ProtocolError {
    pub fn code(&self) -> &'static str {
        match self {
            ProtocolError::Syntax(_) => "SYNTAX",
            ProtocolError::UnknownSymbol { .. } => "UNKNOWN_SYMBOL",
            ProtocolError::Nondeterministic { .. } => "NONDETERMINISTIC",
            ProtocolError::UnreachableState(_) => "UNREACHABLE_STATE",
            ProtocolError::DeadState(_) | ProtocolError::TerminalHasExit(_) => "DEAD_STATE",
            ProtocolError::MissingActorConstraint(_) | ProtocolError::ActorMismatch { .. } => "ACTOR_VIOLATION",
            ProtocolError::UnusedMoveKind(_) => "UNKNOWN_SYMBOL",
        }
    }
}

/// Errors raised when a single move cannot be applied to a session.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("session is already in terminal state {0}")]
    Terminated(DialogState),
    #[error("{kind} cannot be performed by {actor}")]
    ActorViolation { kind: MoveKind, actor: Role },
    #[error("{attachment} cannot be attached to {kind}")]
    AttachmentViolation { kind: MoveKind, attachment: AttachmentKind },
    #[error("({kind}, {actor}) is not legal in state {state}")]
    IllegalMove { state: DialogState, kind: MoveKind, actor: Role, legal: Vec<Step> },
    #[error("topic `{offered}` differs from the dialog topic `{opened}`; end this dialog and open a new one")]
    TopicChange { opened: String, offered: String, state: DialogState, legal: Vec<Step> },
    #[error("state {0} is not part of the protocol")]
    UnknownState(DialogState),
}

impl MoveError {
    pub fn code(&self) -> &'static str {
        match self {
            MoveError::Terminated(_) => "TERMINATED",
            MoveError::ActorViolation { .. } => "ACTOR_VIOLATION",
            MoveError::AttachmentViolation { .. } => "ATTACHMENT_VIOLATION",
            MoveError::IllegalMove { .. } | MoveError::TopicChange { .. } => "ILLEGAL_MOVE",
            MoveError::UnknownState(_) => "UNKNOWN_STATE",
        }
    }

    /// The legal set reported alongside ILLEGAL_MOVE.
    pub fn legal_moves(&self) -> Option<&[Step]> {
        match self {
            MoveError::IllegalMove { legal, .. } | MoveError::TopicChange { legal, .. } => Some(legal),
            _ => None,
        }
    }
}
