use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A name that is not part of a closed symbol set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownName(pub String);

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown name `{}`", self.0)
    }
}

symbol_enum! {
    /// Dialog participant role: `Q` is the questioner (explainee), `E` the explainer.
    pub enum Role {
        Questioner => "Q",
        Explainer => "E",
    }
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Questioner => Role::Explainer,
            Role::Explainer => Role::Questioner,
        }
    }
}

symbol_enum! {
    /// One dialog act. The set is closed.
    pub enum MoveKind {
        QuestionWhy => "QUESTION_WHY",
        QuestionHow => "QUESTION_HOW",
        QuestionWhat => "QUESTION_WHAT",
        Explanation => "EXPLANATION",
        ExplaineeAffirmation => "EXPLAINEE_AFFIRMATION",
        ExplainerAffirmation => "EXPLAINER_AFFIRMATION",
        ExplaineeReturnQuestion => "EXPLAINEE_RETURN_QUESTION",
        ExplainerReturnQuestion => "EXPLAINER_RETURN_QUESTION",
        ArgumentOpen => "ARGUMENT_OPEN",
        ArgumentBody => "ARGUMENT_BODY",
        ArgumentAffirmation => "ARGUMENT_AFFIRMATION",
        CounterArgument => "COUNTER_ARGUMENT",
        EndDialog => "END_DIALOG",
    }
}

impl MoveKind {
    pub const QUESTIONS: [MoveKind; 3] = [MoveKind::QuestionWhy, MoveKind::QuestionHow, MoveKind::QuestionWhat];

    /// Why/how/what questions. These are the only carriers of question attachments.
    pub fn is_question(self) -> bool {
        matches!(self, MoveKind::QuestionWhy | MoveKind::QuestionHow | MoveKind::QuestionWhat)
    }

    /// Question kinds plus both return questions; used for topic checks.
    pub fn asks(self) -> bool {
        self.is_question() || matches!(self, MoveKind::ExplaineeReturnQuestion | MoveKind::ExplainerReturnQuestion)
    }

    pub fn is_argumentation(self) -> bool {
        matches!(
            self,
            MoveKind::ArgumentOpen | MoveKind::ArgumentBody | MoveKind::ArgumentAffirmation | MoveKind::CounterArgument
        )
    }
}

symbol_enum! {
    /// States of the explanation dialog model.
    pub enum DialogState {
        Start => "START",
        CompositeQuestion => "COMPOSITE_QUESTION",
        Clarification => "CLARIFICATION",
        ExplanationPresented => "EXPLANATION_PRESENTED",
        ExplaineeAffirmed => "EXPLAINEE_AFFIRMED",
        ExplainerAffirmed => "EXPLAINER_AFFIRMED",
        ArgInitiated => "ARG_INITIATED",
        ArgPresented => "ARG_PRESENTED",
        CounterArg => "COUNTER_ARG",
        ArgAffirmed => "ARG_AFFIRMED",
        End => "END",
    }
}

symbol_enum! {
    /// Information embedded in a question or in an argument opener.
    pub enum AttachmentKind {
        QuestionContext => "QUESTION_CONTEXT",
        Preconception => "PRECONCEPTION",
        CounterfactualCase => "COUNTERFACTUAL_CASE",
        ArgumentContrastCase => "ARGUMENT_CONTRAST_CASE",
    }
}

impl AttachmentKind {
    /// Whether a move of `kind` may carry this attachment.
    pub fn fits(self, kind: MoveKind) -> bool {
        match self {
            AttachmentKind::ArgumentContrastCase => kind == MoveKind::ArgumentOpen,
            _ => kind.is_question(),
        }
    }
}

/// Which roles may perform a move kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActorConstraint {
    #[serde(rename = "Q")]
    Questioner,
    #[serde(rename = "E")]
    Explainer,
    #[serde(rename = "ANY")]
    Any,
}

impl ActorConstraint {
    pub fn allows(self, role: Role) -> bool {
        match self {
            ActorConstraint::Any => true,
            ActorConstraint::Questioner => role == Role::Questioner,
            ActorConstraint::Explainer => role == Role::Explainer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActorConstraint::Questioner => "Q",
            ActorConstraint::Explainer => "E",
            ActorConstraint::Any => "ANY",
        }
    }
}

impl FromStr for ActorConstraint {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Q" => Ok(ActorConstraint::Questioner),
            "E" => Ok(ActorConstraint::Explainer),
            "ANY" => Ok(ActorConstraint::Any),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attachment {
    pub kind: AttachmentKind,
    pub text: String,
}

impl Attachment {
    pub fn new(kind: AttachmentKind, text: impl Into<String>) -> Self {
        Attachment { kind, text: text.into() }
    }
}

/// A move together with its performer; the unit the transition relation is keyed on.
pub type Step = (MoveKind, Role);

/// One dialog act as exchanged on the wire and stored in traces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Move {
    pub kind: MoveKind,
    pub actor: Role,
    #[serde(default)]
    pub attachments: Vec<Attachment>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub topic: Option<String>,
}

impl Move {
    pub fn new(kind: MoveKind, actor: Role) -> Self {
        Move { kind, actor, attachments: Vec::new(), text: None, topic: None }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn with_topic(mut self, topic: impl Into<String>) -> Self {
        self.topic = Some(topic.into());
        self
    }

    pub fn with_attachment(mut self, kind: AttachmentKind, text: impl Into<String>) -> Self {
        self.attachments.push(Attachment::new(kind, text));
        self
    }

    pub fn step(&self) -> Step {
        (self.kind, self.actor)
    }
}

impl From<Step> for Move {
    fn from((kind, actor): Step) -> Self {
        Move::new(kind, actor)
    }
}
