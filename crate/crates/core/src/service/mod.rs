//! Long-lived dialog sessions with scripted counterparts.
//!
//! [`SessionStore`] serializes writes per session and keeps an append-only
//! event log for each. The HTTP layer in `http` is a thin wrapper over it.

mod error;
#[cfg(feature = "server")]
pub mod http;
mod policy;
mod store;

pub use error::ServiceError;
pub use policy::{Binding, PolicyName, CANNED_EXPLANATION, CANNED_QUESTION};
pub use store::{
    bound_policies, now_ms, trace_from_export, ExportFormat, MoveOutcome, MoveSource, RoleBindings, SessionEvent,
    SessionRecord, SessionSnapshot, SessionStore, POLICY_CHAIN_LIMIT,
};
