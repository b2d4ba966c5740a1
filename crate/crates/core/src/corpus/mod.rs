//! Annotated transcript corpus: schema, parsing, segmentation into dialogs,
//! and the mapping between annotation codes and protocol moves.

mod error;
mod mapping;
mod model;
mod parse;
mod schema;
mod segment;

pub use error::{CorpusError, Location};
pub use mapping::{
    events_to_trace, speaker_for, to_trace, transcript_from_trace, EXPLAINEE_SPEAKER, EXPLAINER_SPEAKER,
};
pub use model::{
    CodeEvent, CodeOccurrence, Corpus, CorpusDocument, Dialog, DialogType, Medium, Participant, Transcript, Utterance,
};
pub use parse::{corpus_from_document, parse_corpus, serialize_corpus};
pub use schema::{code_schema, Category, CodeInfo, CodeLabel};
pub use segment::{segment_dialogs, Segmentation};
