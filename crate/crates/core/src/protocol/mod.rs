//! Executable explanation dialog model.
//!
//! The machine is data: a [`ProtocolDefinition`] is loaded from the JSON
//! protocol format and validated once. Sessions are plain values advanced
//! by [`apply_move`]; traces are replayed by [`validate_trace`].

mod definition;
mod enumerate;
mod error;
mod sample;
mod session;
mod types;

pub use definition::{
    default_protocol, default_protocol_document, legal_moves, load_protocol, load_protocol_with, LoadOptions,
    ProtocolDefinition, Transition,
};
pub use enumerate::{
    enumerate_traces, enumerate_traces_bounded, enumerated_as_traces, EnumerationError, DEFAULT_ENUMERATION_BOUND,
};
pub use error::{MoveError, ProtocolError};
pub use sample::{sample_dialog, Policy, PolicyError, SampleConfig, Sampler, WeightedStep};
pub use session::{apply_move, check_move, validate_trace, SessionState, Trace, TraceFormatError, Verdict};
pub use types::{ActorConstraint, Attachment, AttachmentKind, DialogState, Move, MoveKind, Role, Step, UnknownName};
