use std::collections::HashMap;

use super::error::{at, CorpusError};
use super::model::{CodeEvent, Dialog, Transcript, Utterance};
use super::schema::CodeLabel;
use crate::protocol::Role;

/// Result of cutting a transcript at its boundary codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub dialogs: Vec<Dialog>,
    /// Indices of utterances outside every dialog.
    pub unassigned: Vec<u32>,
    /// Coded utterances after the last QE_END without a QE_START: a dialog
    /// still in progress (as written by a live-session export).
    pub pending: Option<Dialog>,
}

fn event(u: &Utterance, code: CodeLabel, attachment_text: &Option<String>) -> CodeEvent {
    CodeEvent {
        code,
        role: u.role,
        speaker_id: u.speaker_id.clone(),
        utterance: u.index,
        attachment_text: attachment_text.clone(),
        text: u.text.clone(),
    }
}

struct Open {
    first: u32,
    events: Vec<CodeEvent>,
    roles: HashMap<String, Role>,
}

/// Splits a transcript into its QE_START..QE_END dialogs. Nesting is not allowed,
/// and a dialog may not start in the utterance that closes the previous one.
pub fn segment_dialogs(transcript: &Transcript) -> Result<Segmentation, CorpusError> {
    let tid = &transcript.id;
    let mut dialogs = Vec::new();
    let mut unassigned = Vec::new();
    let mut open: Option<Open> = None;
    let mut trailing: Vec<CodeEvent> = Vec::new();
    let mut trailing_first = None;

    for u in &transcript.utterances {
        let mut closed_here = false;
        let mut touched = false;
        if let Some(o) = open.as_mut() {
            touched = true;
            // one role per speaker within a dialog
            match o.roles.get(&u.speaker_id) {
                Some(r) if *r != u.role => {
                    return Err(CorpusError::RoleViolation {
                        at: at(tid, Some(u.index)),
                        message: format!("speaker `{}` switches from {r} to {} inside a dialog", u.speaker_id, u.role),
                    })
                }
                _ => {
                    o.roles.insert(u.speaker_id.clone(), u.role);
                }
            }
        }
        for c in &u.codes {
            match (c.code, open.as_mut()) {
                (CodeLabel::QeStart, Some(_)) => {
                    return Err(CorpusError::UnbalancedBoundary {
                        at: at(tid, Some(u.index)),
                        message: "QE_START inside an open dialog".into(),
                    })
                }
                (CodeLabel::QeStart, None) => {
                    if closed_here {
                        return Err(CorpusError::Overlap { at: at(tid, Some(u.index)) });
                    }
                    trailing.clear();
                    trailing_first = None;
                    let mut o = Open { first: u.index, events: Vec::new(), roles: HashMap::new() };
                    o.roles.insert(u.speaker_id.clone(), u.role);
                    o.events.push(event(u, c.code, &c.attachment_text));
                    open = Some(o);
                    touched = true;
                }
                (CodeLabel::QeEnd, None) => {
                    return Err(CorpusError::UnbalancedBoundary {
                        at: at(tid, Some(u.index)),
                        message: "QE_END without an open dialog".into(),
                    })
                }
                (code, Some(o)) => {
                    o.events.push(event(u, code, &c.attachment_text));
                    if code == CodeLabel::QeEnd {
                        let o = open.take().unwrap();
                        dialogs.push(Dialog {
                            transcript_id: tid.clone(),
                            dialog_type: transcript.dialog_type,
                            ordinal: dialogs.len(),
                            span: (o.first, u.index),
                            code_events: o.events,
                        });
                        closed_here = true;
                    }
                }
                (code, None) => {
                    trailing.push(event(u, code, &c.attachment_text));
                    trailing_first.get_or_insert(u.index);
                }
            }
        }
        if !touched {
            unassigned.push(u.index);
        }
    }

    if let Some(o) = open {
        return Err(CorpusError::UnbalancedBoundary {
            at: at(tid, Some(o.first)),
            message: "QE_START without a matching QE_END".into(),
        });
    }

    let pending = trailing_first.map(|first| Dialog {
        transcript_id: tid.clone(),
        dialog_type: transcript.dialog_type,
        ordinal: dialogs.len(),
        span: (first, trailing.last().map_or(first, |e| e.utterance)),
        code_events: trailing,
    });

    Ok(Segmentation { dialogs, unassigned, pending })
}
