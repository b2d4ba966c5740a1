use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;
use serde_json::Value;

use super::error::{at, CorpusError, Location};
use super::mapping::to_trace;
use super::model::{CodeOccurrence, Corpus, CorpusDocument, DialogType, Medium, Participant, Transcript, Utterance};
use super::schema::CodeLabel;
use super::segment::segment_dialogs;
use crate::protocol::{ActorConstraint, Role};

type Extra = BTreeMap<String, Value>;

#[derive(Deserialize)]
struct RawDocument {
    corpus_id: String,
    transcripts: Vec<RawTranscript>,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Deserialize)]
struct RawTranscript {
    id: String,
    dialog_type: i64,
    medium: String,
    participants: Vec<RawParticipant>,
    utterances: Vec<RawUtterance>,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Deserialize)]
struct RawParticipant {
    speaker_id: String,
    role: String,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Deserialize)]
struct RawUtterance {
    index: i64,
    speaker_id: String,
    role: String,
    #[serde(default)]
    text: String,
    #[serde(default)]
    codes: Vec<RawCode>,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Deserialize)]
struct RawCode {
    code: String,
    #[serde(default)]
    attachment_text: Option<String>,
    #[serde(flatten)]
    extra: Extra,
}

struct Parser {
    strict: bool,
    warnings: Vec<String>,
}

impl Parser {
    fn extra(&mut self, extra: &Extra, loc: Location) -> Result<(), CorpusError> {
        let Some(key) = extra.keys().next() else { return Ok(()) };
        let message = format!("unknown field `{key}`");
        if self.strict {
            return Err(CorpusError::Syntax { at: loc, message });
        }
        self.warnings.push(format!("{loc}: {message} ignored"));
        Ok(())
    }

    fn transcript(&mut self, raw: RawTranscript) -> Result<Transcript, CorpusError> {
        let tid = raw.id.clone();
        let loc = || at(&tid, None);
        self.extra(&raw.extra, loc())?;
        let dialog_type = u8::try_from(raw.dialog_type).ok().and_then(DialogType::new).ok_or_else(|| {
            CorpusError::Syntax { at: loc(), message: format!("dialog_type {} is outside 1..=6", raw.dialog_type) }
        })?;
        let medium = match raw.medium.as_str() {
            "verbal" => Medium::Verbal,
            "text" => Medium::Text,
            other => return Err(CorpusError::Syntax { at: loc(), message: format!("unknown medium `{other}`") }),
        };

        let mut participants = Vec::with_capacity(raw.participants.len());
        let mut allowed: HashMap<String, ActorConstraint> = HashMap::new();
        for p in raw.participants {
            self.extra(&p.extra, loc())?;
            let role: ActorConstraint = p.role.parse().map_err(|_| CorpusError::Syntax {
                at: loc(),
                message: format!("participant `{}` has unknown role `{}`", p.speaker_id, p.role),
            })?;
            if allowed.insert(p.speaker_id.clone(), role).is_some() {
                return Err(CorpusError::Syntax {
                    at: loc(),
                    message: format!("participant `{}` listed twice", p.speaker_id),
                });
            }
            participants.push(Participant { speaker_id: p.speaker_id, role });
        }

        let mut utterances = Vec::with_capacity(raw.utterances.len());
        let mut last_index: Option<i64> = None;
        for u in raw.utterances {
            let uloc = || at(&tid, u32::try_from(u.index).ok());
            self.extra(&u.extra, uloc())?;
            if u.index < 0 || u32::try_from(u.index).is_err() || last_index.is_some_and(|l| u.index <= l) {
                return Err(CorpusError::Syntax {
                    at: uloc(),
                    message: "utterance indices must be non-negative and strictly increasing".into(),
                });
            }
            last_index = Some(u.index);
            let index = u.index as u32;
            let role: Role = u
                .role
                .parse()
                .map_err(|_| CorpusError::Syntax { at: uloc(), message: format!("unknown role `{}`", u.role) })?;
            match allowed.get(&u.speaker_id) {
                None => {
                    return Err(CorpusError::RoleViolation {
                        at: uloc(),
                        message: format!("speaker `{}` is not a participant", u.speaker_id),
                    })
                }
                Some(c) if !c.allows(role) => {
                    return Err(CorpusError::RoleViolation {
                        at: uloc(),
                        message: format!("speaker `{}` may not act as {role}", u.speaker_id),
                    })
                }
                Some(_) => {}
            }
            let mut codes = Vec::with_capacity(u.codes.len());
            for c in u.codes {
                self.extra(&c.extra, uloc())?;
                let parsed =
                    if self.strict { c.code.parse::<CodeLabel>().ok() } else { CodeLabel::parse_lenient(&c.code).ok() };
                let Some(code) = parsed else {
                    if self.strict {
                        return Err(CorpusError::UnknownCode { at: uloc(), code: c.code });
                    }
                    self.warnings.push(format!("{}: unknown code `{}` dropped", uloc(), c.code));
                    continue;
                };
                if let Some(required) = code.required_role() {
                    if required != role {
                        return Err(CorpusError::RoleViolation {
                            at: uloc(),
                            message: format!("{code} coded on a {role}-role utterance"),
                        });
                    }
                }
                codes.push(CodeOccurrence { code, attachment_text: c.attachment_text });
            }
            utterances.push(Utterance { index, speaker_id: u.speaker_id, role, text: u.text, codes });
        }

        Ok(Transcript { id: raw.id, dialog_type, medium, participants, utterances })
    }
}

/// Parses, validates and segments a corpus document.
///
/// In strict mode unknown codes and fields are errors; otherwise they are
/// dropped and reported in [`Corpus::warnings`].
pub fn parse_corpus(document: &str, strict: bool) -> Result<Corpus, CorpusError> {
    let raw: RawDocument = serde_json::from_str(document)
        .map_err(|e| CorpusError::Syntax { at: Location::default(), message: e.to_string() })?;
    let mut parser = Parser { strict, warnings: Vec::new() };
    parser.extra(&raw.extra, Location::default())?;
    let mut transcripts = Vec::with_capacity(raw.transcripts.len());
    for t in raw.transcripts {
        if transcripts.iter().any(|x: &Transcript| x.id == t.id) {
            return Err(CorpusError::Syntax { at: at(&t.id, None), message: "duplicate transcript id".into() });
        }
        transcripts.push(parser.transcript(t)?);
    }
    let doc = CorpusDocument { corpus_id: raw.corpus_id, transcripts };
    build_corpus(doc, parser.warnings)
}

/// Segments and checks an already typed document.
pub fn corpus_from_document(doc: CorpusDocument) -> Result<Corpus, CorpusError> {
    build_corpus(doc, Vec::new())
}

fn build_corpus(doc: CorpusDocument, mut warnings: Vec<String>) -> Result<Corpus, CorpusError> {
    let mut dialogs = Vec::new();
    let mut unassigned = Vec::new();
    for t in &doc.transcripts {
        let seg = segment_dialogs(t)?;
        for d in &seg.dialogs {
            to_trace(d)?;
        }
        if let Some(p) = &seg.pending {
            warnings.push(format!(
                "transcript `{}`: {} coded events after the last dialog boundary",
                t.id,
                p.code_events.len()
            ));
        }
        dialogs.extend(seg.dialogs);
        unassigned.extend(seg.unassigned.into_iter().map(|i| (t.id.clone(), i)));
    }
    Ok(Corpus { corpus_id: doc.corpus_id, transcripts: doc.transcripts, dialogs, unassigned, warnings })
}

/// Canonical corpus text for a parsed corpus.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    corpus.to_document().to_canonical_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(utterances: Value) -> String {
        json!({
            "corpus_id": "t",
            "transcripts": [{
                "id": "T1", "dialog_type": 1, "medium": "verbal",
                "participants": [{"speaker_id": "a", "role": "Q"}, {"speaker_id": "b", "role": "E"}],
                "utterances": utterances
            }]
        })
        .to_string()
    }

    fn u(index: u32, speaker: &str, role: &str, codes: &[&str]) -> Value {
        json!({
            "index": index, "speaker_id": speaker, "role": role, "text": "",
            "codes": codes.iter().map(|c| json!({"code": c})).collect::<Vec<_>>()
        })
    }

    #[test]
    fn empty_corpus() {
        let c = parse_corpus(r#"{"corpus_id":"e","transcripts":[]}"#, true).unwrap();
        assert_eq!(c.total_dialogs(), 0);
        assert_eq!(c.per_type_counts(), [0; 6]);
    }

    #[test]
    fn dangling_start_is_unbalanced() {
        let d = doc(json!([u(0, "a", "Q", &["QE_START", "WHAT"]), u(1, "b", "E", &["EXPLANATION"])]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "UNBALANCED_BOUNDARY");
    }

    #[test]
    fn explanation_by_questioner_is_role_violation() {
        let d = doc(json!([u(0, "a", "Q", &["QE_START", "WHAT", "EXPLANATION", "QE_END"])]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "ROLE_VIOLATION");
        let d = doc(json!([u(0, "b", "Q", &["QE_START", "WHAT", "QE_END"])]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "ROLE_VIOLATION");
        let d = doc(json!([u(0, "z", "Q", &["QE_START", "WHAT", "QE_END"])]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "ROLE_VIOLATION");
    }

    #[test]
    fn unknown_code_strict_and_lenient() {
        let d =
            doc(json!([u(0, "a", "Q", &["QE_START", "What", "SHRUG"]), u(1, "b", "E", &["Explanation", "QE_END"])]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "UNKNOWN_CODE");
        let c = parse_corpus(&d, false).unwrap();
        assert_eq!(c.total_dialogs(), 1);
        assert_eq!(c.warnings.len(), 1);
        assert_eq!(c.dialogs[0].count(CodeLabel::What), 1);
    }

    #[test]
    fn unknown_field_strict_and_lenient() {
        let mut v: Value = serde_json::from_str(&doc(json!([u(0, "a", "Q", &[])]))).unwrap();
        v["transcripts"][0]["utterances"][0]["mood"] = json!("happy");
        let d = v.to_string();
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "SYNTAX");
        assert_eq!(parse_corpus(&d, false).unwrap().warnings.len(), 1);
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse_corpus("{", true).unwrap_err().code(), "SYNTAX");
        let mut v: Value = serde_json::from_str(&doc(json!([]))).unwrap();
        v["transcripts"][0]["dialog_type"] = json!(7);
        assert_eq!(parse_corpus(&v.to_string(), true).unwrap_err().code(), "SYNTAX");
        let d = doc(json!([u(3, "a", "Q", &[]), u(3, "b", "E", &[])]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "SYNTAX");
    }

    #[test]
    fn orphan_attachment_fails_parse() {
        let d = doc(json!([
            u(0, "a", "Q", &["QE_START", "WHAT"]),
            u(1, "b", "E", &["EXPLANATION"]),
            u(2, "a", "Q", &["PRECONCEPTION", "EXPLAINEE_AFFIRMATION", "QE_END"])
        ]));
        assert_eq!(parse_corpus(&d, true).unwrap_err().code(), "ORPHAN_ATTACHMENT");
    }

    #[test]
    fn serialization_is_canonical() {
        let d = doc(json!([u(0, "a", "Q", &["QE_START", "WHY"]), u(1, "b", "E", &["EXPLANATION", "QE_END"])]));
        let c = parse_corpus(&d, true).unwrap();
        let once = serialize_corpus(&c);
        let twice = serialize_corpus(&parse_corpus(&once, true).unwrap());
        assert_eq!(once, twice);
        let a: Value = serde_json::from_str(&d).unwrap();
        let b: Value = serde_json::from_str(&once).unwrap();
        assert_eq!(a, b);
    }
}
