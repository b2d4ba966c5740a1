use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::definition::ProtocolDefinition;
use super::error::MoveError;
use super::types::{DialogState, Move, MoveKind, Step};

/// Ordered moves of one dialog.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    pub moves: Vec<Move>,
}

impl Trace {
    pub fn new(moves: Vec<Move>) -> Self {
        Trace { moves }
    }

    pub fn from_steps(steps: impl IntoIterator<Item = Step>) -> Self {
        Trace { moves: steps.into_iter().map(Move::from).collect() }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn steps(&self) -> Vec<Step> {
        self.moves.iter().map(Move::step).collect()
    }

    pub fn kinds(&self) -> Vec<MoveKind> {
        self.moves.iter().map(|m| m.kind).collect()
    }

    /// Writes one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for m in &self.moves {
            serde_json::to_writer(&mut out, m)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Reads the JSON-lines trace format; blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Trace, TraceFormatError> {
        let mut moves = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| TraceFormatError { line: n + 1, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let m =
                serde_json::from_str(&line).map_err(|e| TraceFormatError { line: n + 1, message: e.to_string() })?;
            moves.push(m);
        }
        Ok(Trace { moves })
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceFormatError> {
        Trace::read_jsonl(text.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct TraceFormatError {
    pub line: usize,
    pub message: String,
}

/// A live dialog on a protocol. Values are immutable; [`apply_move`] returns a new one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub protocol: String,
    pub current: DialogState,
    pub history: Trace,
    /// First topic tag seen in the dialog.
    pub topic: Option<String>,
    /// Number of argumentation sub-dialogs opened.
    pub arg_dialog_count: u32,
    /// Number of times the dialog returned to the composite question.
    pub explanation_loop_count: u32,
    pub seq: u64,
}

impl SessionState {
    pub fn new(protocol: &ProtocolDefinition) -> Self {
        SessionState {
            protocol: protocol.id().to_string(),
            current: protocol.initial(),
            history: Trace::default(),
            topic: None,
            arg_dialog_count: 0,
            explanation_loop_count: 0,
            seq: 0,
        }
    }

    /// Replays `trace` from the initial state.
    pub fn replay(protocol: &ProtocolDefinition, trace: &Trace) -> Result<SessionState, (usize, MoveError)> {
        let mut session = SessionState::new(protocol);
        for (i, m) in trace.moves.iter().enumerate() {
            session = apply_move(protocol, &session, m.clone()).map_err(|e| (i, e))?;
        }
        Ok(session)
    }

    pub fn is_finished(&self, protocol: &ProtocolDefinition) -> bool {
        protocol.is_terminal(self.current)
    }
}

/// Checks `mv` against the session without building the successor.
pub fn check_move(protocol: &ProtocolDefinition, session: &SessionState, mv: &Move) -> Result<DialogState, MoveError> {
    if protocol.is_terminal(session.current) {
        return Err(MoveError::Terminated(session.current));
    }
    if let Some(constraint) = protocol.actor_constraint(mv.kind) {
        if !constraint.allows(mv.actor) {
            return Err(MoveError::ActorViolation { kind: mv.kind, actor: mv.actor });
        }
    }
    if let Some(a) = mv.attachments.iter().find(|a| !a.kind.fits(mv.kind)) {
        return Err(MoveError::AttachmentViolation { kind: mv.kind, attachment: a.kind });
    }
    let legal = || protocol.legal_moves_vec(session.current);
    let next = protocol.next_state(session.current, mv.kind, mv.actor).ok_or_else(|| MoveError::IllegalMove {
        state: session.current,
        kind: mv.kind,
        actor: mv.actor,
        legal: legal(),
    })?;
    if mv.kind.asks() {
        if let (Some(opened), Some(offered)) = (&session.topic, &mv.topic) {
            if opened != offered {
                return Err(MoveError::TopicChange {
                    opened: opened.clone(),
                    offered: offered.clone(),
                    state: session.current,
                    legal: legal(),
                });
            }
        }
    }
    Ok(next)
}

/// Applies one move, returning the successor session. `session` is left untouched.
pub fn apply_move(protocol: &ProtocolDefinition, session: &SessionState, mv: Move) -> Result<SessionState, MoveError> {
    let next = check_move(protocol, session, &mv)?;
    let mut out = session.clone();
    if mv.kind == MoveKind::ArgumentOpen {
        out.arg_dialog_count += 1;
    }
    if next == DialogState::CompositeQuestion
        && !matches!(session.current, DialogState::Start | DialogState::CompositeQuestion)
    {
        out.explanation_loop_count += 1;
    }
    if out.topic.is_none() {
        out.topic = mv.topic.clone();
    }
    out.current = next;
    out.history.moves.push(mv);
    out.seq += 1;
    Ok(out)
}

impl ProtocolDefinition {
    pub(crate) fn legal_moves_vec(&self, state: DialogState) -> Vec<Step> {
        self.edges_from(state).iter().map(|(step, _)| *step).collect()
    }
}

/// Outcome of replaying a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accepted { final_state: DialogState },
    Incomplete { final_state: DialogState },
    Rejected { index: usize, code: String, reason: String, state: DialogState, legal: Vec<Step> },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Accepted { .. } => "ACCEPTED",
            Verdict::Incomplete { .. } => "INCOMPLETE",
            Verdict::Rejected { .. } => "REJECTED",
        }
    }
}

pub fn validate_trace(protocol: &ProtocolDefinition, trace: &Trace) -> Verdict {
    let mut session = SessionState::new(protocol);
    for (index, m) in trace.moves.iter().enumerate() {
        match apply_move(protocol, &session, m.clone()) {
            Ok(next) => session = next,
            Err(e) => {
                return Verdict::Rejected {
                    index,
                    code: e.code().to_string(),
                    reason: e.to_string(),
                    state: session.current,
                    legal: protocol.legal_moves_vec(session.current),
                }
            }
        }
    }
    if protocol.is_terminal(session.current) {
        Verdict::Accepted { final_state: session.current }
    } else {
        Verdict::Incomplete { final_state: session.current }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::default_protocol;
    use crate::protocol::types::{AttachmentKind, Role};

    use MoveKind::*;
    use Role::{Explainer as E, Questioner as Q};

    fn golden() -> Trace {
        Trace::from_steps([
            (QuestionWhat, Q),
            (Explanation, E),
            (ExplaineeAffirmation, Q),
            (ArgumentOpen, Q),
            (ArgumentBody, Q),
            (ArgumentAffirmation, E),
            (EndDialog, E),
        ])
    }

    #[test]
    fn start_question_enters_composite_question() {
        let p = default_protocol();
        let s = apply_move(&p, &SessionState::new(&p), Move::new(QuestionWhat, Q)).unwrap();
        assert_eq!(s.current, DialogState::CompositeQuestion);
        assert_eq!(s.seq, 1);
    }

    #[test]
    fn input_session_is_not_modified() {
        let p = default_protocol();
        let s0 = SessionState::new(&p);
        let before = s0.clone();
        let _ = apply_move(&p, &s0, Move::new(QuestionWhy, Q)).unwrap();
        assert_eq!(s0, before);
    }

    #[test]
    fn finished_session_is_terminated() {
        let p = default_protocol();
        let s = SessionState::replay(&p, &golden()).unwrap();
        assert_eq!(s.current, DialogState::End);
        let err = apply_move(&p, &s, Move::new(QuestionWhat, Q)).unwrap_err();
        assert_eq!(err.code(), "TERMINATED");
    }

    #[test]
    fn affirmation_before_explanation_is_illegal() {
        let p = default_protocol();
        let s = apply_move(&p, &SessionState::new(&p), Move::new(QuestionWhat, Q)).unwrap();
        let err = apply_move(&p, &s, Move::new(ExplaineeAffirmation, Q)).unwrap_err();
        assert_eq!(err.code(), "ILLEGAL_MOVE");
        let legal = err.legal_moves().unwrap();
        assert!(legal.contains(&(Explanation, E)));
        assert!(!legal.contains(&(ExplaineeAffirmation, Q)));
    }

    #[test]
    fn actor_and_attachment_violations() {
        let p = default_protocol();
        let s = SessionState::new(&p);
        let err = apply_move(&p, &s, Move::new(QuestionWhat, E)).unwrap_err();
        assert_eq!(err.code(), "ACTOR_VIOLATION");
        let mv = Move::new(QuestionWhat, Q).with_attachment(AttachmentKind::ArgumentContrastCase, "x");
        assert_eq!(apply_move(&p, &s, mv).unwrap_err().code(), "ATTACHMENT_VIOLATION");
        let mv = Move::new(ArgumentOpen, Q).with_attachment(AttachmentKind::Preconception, "x");
        assert_eq!(apply_move(&p, &s, mv).unwrap_err().code(), "ATTACHMENT_VIOLATION");
        let mv = Move::new(QuestionWhy, Q).with_attachment(AttachmentKind::CounterfactualCase, "why not B");
        assert!(apply_move(&p, &s, mv).is_ok());
    }

    #[test]
    fn counters_track_history() {
        let p = default_protocol();
        let t = Trace::from_steps([
            (QuestionHow, Q),
            (QuestionWhat, Q),
            (Explanation, E),
            (ExplaineeReturnQuestion, Q),
            (Explanation, E),
            (ExplaineeAffirmation, Q),
            (ArgumentOpen, E),
            (ArgumentBody, E),
            (ArgumentAffirmation, Q),
            (ArgumentOpen, Q),
            (ArgumentBody, Q),
            (CounterArgument, E),
            (ArgumentBody, E),
            (ArgumentAffirmation, Q),
            (QuestionWhy, Q),
        ]);
        let s = SessionState::replay(&p, &t).unwrap();
        assert_eq!(s.arg_dialog_count, 2);
        assert_eq!(s.explanation_loop_count, 2);
        assert_eq!(s.current, DialogState::CompositeQuestion);
        assert_eq!(s.seq, 15);
    }

    #[test]
    fn topic_change_is_illegal() {
        let p = default_protocol();
        let s = apply_move(&p, &SessionState::new(&p), Move::new(QuestionWhat, Q).with_topic("tax")).unwrap();
        let s = apply_move(&p, &s, Move::new(Explanation, E)).unwrap();
        let same = apply_move(&p, &s, Move::new(QuestionWhy, Q).with_topic("tax"));
        assert!(same.is_ok());
        let err = apply_move(&p, &s, Move::new(QuestionWhy, Q).with_topic("weather")).unwrap_err();
        assert!(matches!(err, MoveError::TopicChange { .. }));
        assert_eq!(err.code(), "ILLEGAL_MOVE");
    }

    #[test]
    fn verdicts() {
        let p = default_protocol();
        assert_eq!(validate_trace(&p, &golden()), Verdict::Accepted { final_state: DialogState::End });
        assert_eq!(validate_trace(&p, &Trace::default()), Verdict::Incomplete { final_state: DialogState::Start });
        let t = Trace::from_steps([(Explanation, E), (EndDialog, E)]);
        match validate_trace(&p, &t) {
            Verdict::Rejected { index, state, legal, .. } => {
                assert_eq!(index, 0);
                assert_eq!(state, DialogState::Start);
                assert!(legal.contains(&(QuestionWhat, Q)));
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let t = Trace::new(vec![
            Move::new(QuestionWhy, Q)
                .with_attachment(AttachmentKind::CounterfactualCase, "rather than B")
                .with_text("Why A?")
                .with_topic("t1"),
            Move::new(Explanation, E),
        ]);
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().starts_with("{\"kind\":\"QUESTION_WHY\",\"actor\":\"Q\""));
        assert_eq!(Trace::from_jsonl(&text).unwrap(), t);
        let minimal = Trace::from_jsonl("{\"kind\":\"EXPLANATION\",\"actor\":\"E\"}\n\n").unwrap();
        assert_eq!(minimal.len(), 1);
        let bad = Trace::from_jsonl("{\"kind\":\"EXPLANATION\",\"actor\":\"E\",\"mood\":1}").unwrap_err();
        assert_eq!(bad.line, 1);
    }
}
