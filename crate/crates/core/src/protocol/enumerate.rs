use thiserror::Error;

use super::definition::ProtocolDefinition;
use super::session::Trace;
use super::types::Step;

pub const DEFAULT_ENUMERATION_BOUND: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("max_len {requested} exceeds the enumeration bound {bound}")]
    BoundExceeded { requested: usize, bound: usize },
}

impl EnumerationError {
    pub fn code(&self) -> &'static str {
        "BOUND_EXCEEDED"
    }
}

/// All complete traces of length at most `max_len`, in lexicographic step order.
pub fn enumerate_traces(protocol: &ProtocolDefinition, max_len: usize) -> Result<Vec<Vec<Step>>, EnumerationError> {
    enumerate_traces_bounded(protocol, max_len, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_traces_bounded(
    protocol: &ProtocolDefinition,
    max_len: usize,
    bound: usize,
) -> Result<Vec<Vec<Step>>, EnumerationError> {
    if max_len > bound {
        return Err(EnumerationError::BoundExceeded { requested: max_len, bound });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(max_len);
    // explicit stack of (state, next edge index); edges are pre-sorted so the
    // output comes out in lexicographic order without a final sort
    let mut stack = vec![(protocol.initial(), 0usize)];
    while let Some((state, edge)) = stack.last_mut() {
        let edges = protocol.edges_from(*state);
        if *edge >= edges.len() || prefix.len() == max_len {
            stack.pop();
            prefix.pop();
            continue;
        }
        let (step, to) = edges[*edge];
        *edge += 1;
        prefix.push(step);
        if protocol.is_terminal(to) {
            out.push(prefix.clone());
            prefix.pop();
        } else {
            stack.push((to, 0));
        }
    }
    Ok(out)
}

pub fn enumerated_as_traces(steps: &[Vec<Step>]) -> Vec<Trace> {
    steps.iter().map(|s| Trace::from_steps(s.iter().copied())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{default_protocol, validate_trace, MoveKind};

    #[test]
    fn no_single_move_dialog() {
        assert!(enumerate_traces(&default_protocol(), 1).unwrap().is_empty());
        assert!(enumerate_traces(&default_protocol(), 0).unwrap().is_empty());
    }

    #[test]
    fn two_move_dialogs_are_opening_then_end() {
        let traces = enumerate_traces(&default_protocol(), 2).unwrap();
        // frozen from the test-side DFS oracle in tests/protocol_oracle.rs
        assert_eq!(traces.len(), 6);
        for t in &traces {
            assert!(t[0].0.is_question());
            assert_eq!(t[1].0, MoveKind::EndDialog);
        }
    }

    #[test]
    fn bound_is_enforced() {
        let err = enumerate_traces(&default_protocol(), 11).unwrap_err();
        assert_eq!(err.code(), "BOUND_EXCEEDED");
        assert!(enumerate_traces_bounded(&default_protocol(), 3, 3).is_ok());
    }

    #[test]
    fn output_is_sorted_and_accepted() {
        let p = default_protocol();
        let traces = enumerate_traces(&p, 5).unwrap();
        assert!(traces.windows(2).all(|w| w[0] < w[1]));
        for t in enumerated_as_traces(&traces) {
            assert!(validate_trace(&p, &t).is_accepted());
        }
    }
}
