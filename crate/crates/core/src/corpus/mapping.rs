//! Bridges annotation codes and protocol moves.
//!
//! | code | move |
//! |------|------|
//! | HOW / WHY / WHAT | QUESTION_HOW / QUESTION_WHY / QUESTION_WHAT |
//! | ARGUMENT_S, opening ARGUMENT | ARGUMENT_OPEN then ARGUMENT_BODY |
//! | ARGUMENT inside an episode | ARGUMENT_BODY |
//! | ARGUMENT_A / ARGUMENT_C | ARGUMENT_AFFIRMATION / COUNTER_ARGUMENT |
//! | QE_END | END_DIALOG |
//! | information codes, ARGUMENT_CONTRAST_CASE | attachment on the adjacent carrier |
//!
//! An ARGUMENT opens an episode unless the previous move was an argument
//! opener, body or counter-argument.

use super::error::{at, CorpusError};
use super::model::{CodeEvent, CodeOccurrence, Dialog, DialogType, Medium, Participant, Transcript, Utterance};
use super::schema::CodeLabel;
use crate::protocol::{ActorConstraint, Attachment, Move, MoveKind, Role, Trace};

pub const EXPLAINEE_SPEAKER: &str = "explainee";
pub const EXPLAINER_SPEAKER: &str = "explainer";

fn non_empty(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Maps a dialog's code events onto a protocol trace.
pub fn to_trace(dialog: &Dialog) -> Result<Trace, CorpusError> {
    events_to_trace(&dialog.transcript_id, &dialog.code_events)
}

pub fn events_to_trace(transcript_id: &str, events: &[CodeEvent]) -> Result<Trace, CorpusError> {
    let mut moves: Vec<Move> = Vec::new();
    let mut in_episode = false;
    // move that may still take attachments: the carrier produced by the
    // previous non-attachment event
    let mut carrier: Option<usize> = None;
    let mut pending: Vec<(&CodeEvent, Attachment)> = Vec::new();

    let orphan = |e: &CodeEvent| CorpusError::OrphanAttachment {
        at: at(transcript_id, Some(e.utterance)),
        code: e.code.to_string(),
    };

    for e in events {
        if let Some(kind) = e.code.attachment_kind() {
            let att = Attachment::new(kind, e.attachment_text.clone().unwrap_or_default());
            match carrier {
                Some(i) if kind.fits(moves[i].kind) => moves[i].attachments.push(att),
                _ => pending.push((e, att)),
            }
            continue;
        }
        let text = non_empty(&e.text);
        let single = |kind| vec![Move { text: text.clone(), ..Move::new(kind, e.role) }];
        let produced = match e.code {
            CodeLabel::QeStart => continue,
            CodeLabel::QeEnd => single(MoveKind::EndDialog),
            CodeLabel::How => single(MoveKind::QuestionHow),
            CodeLabel::Why => single(MoveKind::QuestionWhy),
            CodeLabel::What => single(MoveKind::QuestionWhat),
            CodeLabel::Explanation => single(MoveKind::Explanation),
            CodeLabel::ExplaineeAffirmation => single(MoveKind::ExplaineeAffirmation),
            CodeLabel::ExplainerAffirmation => single(MoveKind::ExplainerAffirmation),
            CodeLabel::ExplaineeReturnQuestion => single(MoveKind::ExplaineeReturnQuestion),
            CodeLabel::ExplainerReturnQuestion => single(MoveKind::ExplainerReturnQuestion),
            CodeLabel::ArgumentA => single(MoveKind::ArgumentAffirmation),
            CodeLabel::ArgumentC => single(MoveKind::CounterArgument),
            CodeLabel::Argument if in_episode => single(MoveKind::ArgumentBody),
            CodeLabel::Argument | CodeLabel::ArgumentS => vec![
                Move::new(MoveKind::ArgumentOpen, e.role),
                Move { text: text.clone(), ..Move::new(MoveKind::ArgumentBody, e.role) },
            ],
            CodeLabel::QuestionContext
            | CodeLabel::Preconception
            | CodeLabel::CounterfactualCase
            | CodeLabel::ArgumentContrastCase => unreachable!("attachment codes handled above"),
        };
        let first = moves.len();
        let head = produced[0].kind;
        in_episode = matches!(produced.last().unwrap().kind, MoveKind::ArgumentBody | MoveKind::CounterArgument);
        moves.extend(produced);
        carrier = (head.is_question() || head == MoveKind::ArgumentOpen).then_some(first);
        for (pe, att) in pending.drain(..) {
            match carrier {
                Some(i) if att.kind.fits(moves[i].kind) => moves[i].attachments.push(att),
                _ => return Err(orphan(pe)),
            }
        }
    }
    if let Some((e, _)) = pending.first() {
        return Err(orphan(e));
    }
    Ok(Trace::new(moves))
}

fn question_code(kind: MoveKind) -> Option<CodeLabel> {
    match kind {
        MoveKind::QuestionHow => Some(CodeLabel::How),
        MoveKind::QuestionWhy => Some(CodeLabel::Why),
        MoveKind::QuestionWhat => Some(CodeLabel::What),
        _ => None,
    }
}

fn attachment_code(att: &Attachment) -> CodeOccurrence {
    use crate::protocol::AttachmentKind as A;
    let code = match att.kind {
        A::QuestionContext => CodeLabel::QuestionContext,
        A::Preconception => CodeLabel::Preconception,
        A::CounterfactualCase => CodeLabel::CounterfactualCase,
        A::ArgumentContrastCase => CodeLabel::ArgumentContrastCase,
    };
    CodeOccurrence::with_text(code, att.text.clone())
}

/// Writes a trace as a single-dialog transcript, the inverse of [`to_trace`].
///
/// Boundary codes are only written for complete traces (ending in
/// END_DIALOG); an unfinished dialog is left unbounded so that it parses as
/// the transcript's pending dialog. An ARGUMENT_OPEN directly followed by
/// ARGUMENT_BODY becomes one ARGUMENT (or ARGUMENT_S) utterance spoken by
/// the opener.
pub fn transcript_from_trace(
    id: impl Into<String>,
    dialog_type: DialogType,
    medium: Medium,
    trace: &Trace,
) -> Transcript {
    let complete = trace.moves.last().is_some_and(|m| m.kind == MoveKind::EndDialog);
    let mut utterances: Vec<Utterance> = Vec::new();
    let mut i = 0;
    while i < trace.moves.len() {
        let m = &trace.moves[i];
        let mut text = m.text.clone();
        let mut codes = Vec::new();
        match m.kind {
            MoveKind::ArgumentOpen => {
                codes.push(CodeOccurrence::new(if i == 0 { CodeLabel::ArgumentS } else { CodeLabel::Argument }));
                if let Some(next) = trace.moves.get(i + 1).filter(|n| n.kind == MoveKind::ArgumentBody) {
                    text = next.text.clone().or(text);
                    i += 1;
                }
            }
            MoveKind::ArgumentBody => codes.push(CodeOccurrence::new(CodeLabel::Argument)),
            MoveKind::ArgumentAffirmation => codes.push(CodeOccurrence::new(CodeLabel::ArgumentA)),
            MoveKind::CounterArgument => codes.push(CodeOccurrence::new(CodeLabel::ArgumentC)),
            MoveKind::EndDialog => codes.push(CodeOccurrence::new(CodeLabel::QeEnd)),
            MoveKind::Explanation => codes.push(CodeOccurrence::new(CodeLabel::Explanation)),
            MoveKind::ExplaineeAffirmation => codes.push(CodeOccurrence::new(CodeLabel::ExplaineeAffirmation)),
            MoveKind::ExplainerAffirmation => codes.push(CodeOccurrence::new(CodeLabel::ExplainerAffirmation)),
            MoveKind::ExplaineeReturnQuestion => codes.push(CodeOccurrence::new(CodeLabel::ExplaineeReturnQuestion)),
            MoveKind::ExplainerReturnQuestion => codes.push(CodeOccurrence::new(CodeLabel::ExplainerReturnQuestion)),
            kind => codes.push(CodeOccurrence::new(question_code(kind).expect("question kind"))),
        }
        codes.extend(m.attachments.iter().map(attachment_code));
        if complete && utterances.is_empty() {
            codes.insert(0, CodeOccurrence::new(CodeLabel::QeStart));
        }
        utterances.push(Utterance {
            index: utterances.len() as u32,
            speaker_id: speaker_for(m.actor).to_string(),
            role: m.actor,
            text: text.unwrap_or_default(),
            codes,
        });
        i += 1;
    }
    Transcript {
        id: id.into(),
        dialog_type,
        medium,
        participants: vec![
            Participant { speaker_id: EXPLAINEE_SPEAKER.into(), role: ActorConstraint::Questioner },
            Participant { speaker_id: EXPLAINER_SPEAKER.into(), role: ActorConstraint::Explainer },
        ],
        utterances,
    }
}

pub fn speaker_for(role: Role) -> &'static str {
    match role {
        Role::Questioner => EXPLAINEE_SPEAKER,
        Role::Explainer => EXPLAINER_SPEAKER,
    }
}
