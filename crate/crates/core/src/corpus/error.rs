use thiserror::Error;

/// Where a corpus problem was found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Location {
    pub transcript: Option<String>,
    pub utterance: Option<u32>,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.transcript, self.utterance) {
            (Some(t), Some(u)) => write!(f, "transcript `{t}`, utterance {u}"),
            (Some(t), None) => write!(f, "transcript `{t}`"),
            _ => f.write_str("corpus"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("malformed corpus document ({at}): {message}")]
    Syntax { at: Location, message: String },
    #[error("unknown code `{code}` ({at})")]
    UnknownCode { at: Location, code: String },
    #[error("role violation ({at}): {message}")]
    RoleViolation { at: Location, message: String },
    #[error("unbalanced dialog boundary ({at}): {message}")]
    UnbalancedBoundary { at: Location, message: String },
    #[error("dialogs overlap ({at}): a dialog starts in the utterance that ends the previous one")]
    Overlap { at: Location },
    #[error("{code} has no adjacent carrier move ({at})")]
    OrphanAttachment { at: Location, code: String },
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::Syntax { .. } => "SYNTAX",
            CorpusError::UnknownCode { .. } => "UNKNOWN_CODE",
            CorpusError::RoleViolation { .. } => "ROLE_VIOLATION",
            CorpusError::UnbalancedBoundary { .. } => "UNBALANCED_BOUNDARY",
            CorpusError::Overlap { .. } => "OVERLAP",
            CorpusError::OrphanAttachment { .. } => "ORPHAN_ATTACHMENT",
        }
    }
}

pub(crate) fn at(transcript: &str, utterance: Option<u32>) -> Location {
    Location { transcript: Some(transcript.to_string()), utterance }
}
