//! Explanation dialog toolkit.
//!
//! - [`protocol`]: the dialog model as an executable state machine.
//! - [`corpus`]: coded transcript corpora, dialog segmentation and trace mapping.
//! - [`analytics`]: code statistics, ending analysis and model conformance.
//! - [`service`]: long-lived sessions with optimistic concurrency and an HTTP API.

#[macro_use]
mod macros;

pub mod analytics;
pub mod corpus;
pub mod protocol;
pub mod service;
