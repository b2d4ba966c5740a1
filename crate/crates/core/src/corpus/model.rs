use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::CodeLabel;
use crate::protocol::{ActorConstraint, Role};

/// Participant/medium category of a transcript, 1 through 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct DialogType(u8);

impl DialogType {
    pub const ALL: [DialogType; 6] =
        [DialogType(1), DialogType(2), DialogType(3), DialogType(4), DialogType(5), DialogType(6)];

    pub fn new(n: u8) -> Option<DialogType> {
        (1..=6).contains(&n).then_some(DialogType(n))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "Human-Human static explainee",
            2 => "Human-Human static explainer",
            3 => "Human-Explainer agent",
            4 => "Human-Explainee agent",
            5 => "Human-Human QnA",
            _ => "Human-Human multiple explainee",
        }
    }

    /// Both parties are human.
    pub fn is_human_human(self) -> bool {
        !matches!(self.0, 3 | 4)
    }
}

impl TryFrom<u8> for DialogType {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        DialogType::new(n).ok_or_else(|| format!("dialog_type {n} is outside 1..=6"))
    }
}

impl From<DialogType> for u8 {
    fn from(t: DialogType) -> u8 {
        t.0
    }
}

impl fmt::Display for DialogType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Verbal,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub speaker_id: String,
    /// `Q`, `E`, or `ANY` for speakers who both ask and answer.
    pub role: ActorConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeOccurrence {
    pub code: CodeLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment_text: Option<String>,
}

impl CodeOccurrence {
    pub fn new(code: CodeLabel) -> Self {
        CodeOccurrence { code, attachment_text: None }
    }

    pub fn with_text(code: CodeLabel, text: impl Into<String>) -> Self {
        CodeOccurrence { code, attachment_text: Some(text.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub index: u32,
    pub speaker_id: String,
    pub role: Role,
    pub text: String,
    pub codes: Vec<CodeOccurrence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    pub dialog_type: DialogType,
    pub medium: Medium,
    pub participants: Vec<Participant>,
    pub utterances: Vec<Utterance>,
}

/// The corpus file as written on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub corpus_id: String,
    pub transcripts: Vec<Transcript>,
}

impl CorpusDocument {
    /// Canonical text: two-space indented JSON, fixed field order, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("corpus serializes");
        s.push('\n');
        s
    }
}

/// One code occurrence inside a dialog, flattened from its utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeEvent {
    pub code: CodeLabel,
    pub role: Role,
    pub speaker_id: String,
    pub utterance: u32,
    pub attachment_text: Option<String>,
    pub text: String,
}

/// A QE_START..QE_END span of one transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dialog {
    pub transcript_id: String,
    pub dialog_type: DialogType,
    pub ordinal: usize,
    /// First and last utterance index, inclusive.
    pub span: (u32, u32),
    pub code_events: Vec<CodeEvent>,
}

impl Dialog {
    /// Code events with the two boundary codes removed.
    pub fn body(&self) -> impl Iterator<Item = &CodeEvent> {
        self.code_events.iter().filter(|e| !e.code.is_boundary())
    }

    pub fn count(&self, code: CodeLabel) -> u32 {
        self.code_events.iter().filter(|e| e.code == code).count() as u32
    }
}

/// A parsed, segmented corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub corpus_id: String,
    pub transcripts: Vec<Transcript>,
    pub dialogs: Vec<Dialog>,
    /// `(transcript id, utterance index)` of utterances outside every dialog.
    pub unassigned: Vec<(String, u32)>,
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn total_dialogs(&self) -> usize {
        self.dialogs.len()
    }

    /// Dialog counts for types 1..=6.
    pub fn per_type_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for d in &self.dialogs {
            counts[d.dialog_type.get() as usize - 1] += 1;
        }
        counts
    }

    pub fn dialogs_of(&self, t: DialogType) -> impl Iterator<Item = &Dialog> {
        self.dialogs.iter().filter(move |d| d.dialog_type == t)
    }

    pub fn to_document(&self) -> CorpusDocument {
        CorpusDocument { corpus_id: self.corpus_id.clone(), transcripts: self.transcripts.clone() }
    }
}
