use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use super::error::ServiceError;
use super::policy::{Binding, PolicyName};
use crate::corpus::{
    events_to_trace, parse_corpus, segment_dialogs, transcript_from_trace, CorpusDocument, CorpusError, DialogType,
    Medium,
};
use crate::protocol::{
    apply_move, default_protocol, DialogState, Move, MoveKind, ProtocolDefinition, Role, SessionState, Step, Trace,
};

/// Upper bound on consecutive policy moves triggered by one request.
pub const POLICY_CHAIN_LIMIT: usize = 256;
const EVENT_CHANNEL_CAPACITY: usize = 1024;

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Who produced a logged move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveSource {
    Human,
    Policy,
}

/// One entry of a session's event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    #[serde(rename = "move")]
    pub mv: Move,
    pub state: DialogState,
    pub source: MoveSource,
    pub at_ms: u64,
}

pub type RoleBindings = BTreeMap<Role, Binding>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum LogLine {
    Created { session_id: String, protocol: String, bindings: RoleBindings, created_ms: u64 },
    Move(SessionEvent),
}

pub struct SessionRecord {
    pub session_id: String,
    pub protocol: Arc<ProtocolDefinition>,
    pub state: SessionState,
    pub bindings: RoleBindings,
    pub created_ms: u64,
    pub updated_ms: u64,
    pub events: Vec<SessionEvent>,
    sender: broadcast::Sender<SessionEvent>,
    log: Option<File>,
}

impl SessionRecord {
    fn append(&mut self, mv: Move, source: MoveSource) -> Result<SessionEvent, ServiceError> {
        let next = apply_move(&self.protocol, &self.state, mv.clone())?;
        let event = SessionEvent { seq: next.seq, mv, state: next.current, source, at_ms: now_ms() };
        if let Some(f) = self.log.as_mut() {
            write_line(f, &LogLine::Move(event.clone()))?;
        }
        self.state = next;
        self.updated_ms = event.at_ms;
        self.events.push(event.clone());
        // no subscribers is fine
        let _ = self.sender.send(event.clone());
        Ok(event)
    }

    /// Lets bound policies respond, alternating from `turn`, until one
    /// passes or the dialog ends.
    fn run_policies(&mut self, mut turn: Role, produced: &mut Vec<SessionEvent>) -> Result<(), ServiceError> {
        for _ in 0..POLICY_CHAIN_LIMIT {
            let Some(policy) = self.bindings[&turn].policy() else { return Ok(()) };
            let Some(mv) = policy.choose(&self.protocol, &self.state, turn) else { return Ok(()) };
            produced.push(self.append(mv, MoveSource::Policy)?);
            turn = turn.other();
        }
        log::warn!("session {}: policy chain limit reached", self.session_id);
        Ok(())
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let p = &self.protocol;
        SessionSnapshot {
            session_id: self.session_id.clone(),
            protocol: p.id().to_string(),
            state: self.state.current,
            seq: self.state.seq,
            finished: self.state.is_finished(p),
            legal_moves: Role::ALL.iter().map(|&r| (r, p.legal_moves_for(self.state.current, r))).collect(),
            legal_steps: p.legal_moves(self.state.current).map(|s| s.into_iter().collect()).unwrap_or_default(),
            bindings: self.bindings.clone(),
            topic: self.state.topic.clone(),
            arg_dialog_count: self.state.arg_dialog_count,
            explanation_loop_count: self.state.explanation_loop_count,
            history: self.state.history.moves.clone(),
            created_ms: self.created_ms,
            updated_ms: self.updated_ms,
        }
    }

    /// Dialog type a live session is filed under when exported.
    pub fn dialog_type(&self) -> DialogType {
        let n = match (self.bindings[&Role::Questioner], self.bindings[&Role::Explainer]) {
            (Binding::Human, Binding::Human) => 1,
            (Binding::Policy(_), Binding::Human) => 4,
            _ => 3,
        };
        DialogType::new(n).expect("valid type")
    }
}

/// Consistent view of one session at `seq`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub session_id: String,
    pub protocol: String,
    pub state: DialogState,
    pub seq: u64,
    pub finished: bool,
    /// Legal move kinds per role.
    pub legal_moves: BTreeMap<Role, Vec<MoveKind>>,
    pub legal_steps: Vec<Step>,
    pub bindings: RoleBindings,
    pub topic: Option<String>,
    pub arg_dialog_count: u32,
    pub explanation_loop_count: u32,
    pub history: Vec<Move>,
    pub created_ms: u64,
    pub updated_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub state: DialogState,
    pub seq: u64,
    /// The accepted move followed by any policy responses.
    pub events: Vec<SessionEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Corpus,
    Trace,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corpus" => Ok(ExportFormat::Corpus),
            "trace" => Ok(ExportFormat::Trace),
            _ => Err(format!("unknown export format `{s}`")),
        }
    }
}

/// Sessions over a registry of protocols, optionally persisted as one
/// JSON-lines event log per session.
pub struct SessionStore {
    protocols: RwLock<BTreeMap<String, Arc<ProtocolDefinition>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionRecord>>>>,
    data_dir: Option<PathBuf>,
}

fn write_line(f: &mut File, line: &LogLine) -> Result<(), ServiceError> {
    let mut buf = serde_json::to_vec(line).expect("log line serializes");
    buf.push(b'\n');
    f.write_all(&buf)?;
    f.flush()?;
    Ok(())
}

impl Default for SessionStore {
    fn default() -> Self {
        SessionStore::in_memory()
    }
}

impl SessionStore {
    /// A store holding only the default protocol, without persistence.
    pub fn in_memory() -> SessionStore {
        let store = SessionStore {
            protocols: RwLock::new(BTreeMap::new()),
            sessions: RwLock::new(HashMap::new()),
            data_dir: None,
        };
        store.register_protocol(default_protocol());
        store
    }

    /// A persistent store; existing logs in `data_dir` are replayed.
    /// Protocols must be registered before the logs that use them are read, so
    /// extra protocols are passed here.
    pub fn open(
        data_dir: impl Into<PathBuf>,
        protocols: impl IntoIterator<Item = ProtocolDefinition>,
    ) -> Result<SessionStore, ServiceError> {
        let dir = data_dir.into();
        fs::create_dir_all(&dir)?;
        let mut store = SessionStore::in_memory();
        for p in protocols {
            store.register_protocol(p);
        }
        store.data_dir = Some(dir.clone());
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match store.load_log(&path) {
                Ok(record) => {
                    store.sessions.write().insert(record.session_id.clone(), Arc::new(Mutex::new(record)));
                }
                Err(e) => log::warn!("skipping session log {}: {e}", path.display()),
            }
        }
        Ok(store)
    }

    fn load_log(&self, path: &Path) -> Result<SessionRecord, ServiceError> {
        let reader = BufReader::new(File::open(path)?);
        let mut record: Option<SessionRecord> = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LogLine = match serde_json::from_str(&line) {
                Ok(l) => l,
                Err(e) => {
                    // a torn final write leaves a partial line; keep what replays
                    log::warn!("{}:{}: {e}; ignoring the rest of the log", path.display(), n + 1);
                    break;
                }
            };
            match (parsed, record.as_mut()) {
                (LogLine::Created { session_id, protocol, bindings, created_ms }, None) => {
                    let protocol = self.protocol(&protocol)?;
                    check_bindings(&bindings)?;
                    let (sender, _) = broadcast::channel(EVENT_CHANNEL_CAPACITY);
                    record = Some(SessionRecord {
                        session_id,
                        state: SessionState::new(&protocol),
                        protocol,
                        bindings,
                        created_ms,
                        updated_ms: created_ms,
                        events: Vec::new(),
                        sender,
                        log: None,
                    });
                }
                (LogLine::Move(ev), Some(r)) => {
                    if ev.seq != r.state.seq + 1 {
                        return Err(ServiceError::CorruptLog(format!("seq {} follows {}", ev.seq, r.state.seq)));
                    }
                    let next = apply_move(&r.protocol, &r.state, ev.mv.clone())?;
                    if next.current != ev.state {
                        return Err(ServiceError::CorruptLog(format!("seq {} state mismatch", ev.seq)));
                    }
                    r.state = next;
                    r.updated_ms = ev.at_ms;
                    r.events.push(ev);
                }
                _ => return Err(ServiceError::CorruptLog("log must start with one header line".into())),
            }
        }
        let mut record = record.ok_or_else(|| ServiceError::CorruptLog("empty log".into()))?;
        record.log = Some(OpenOptions::new().append(true).open(path)?);
        Ok(record)
    }

    pub fn register_protocol(&self, protocol: ProtocolDefinition) {
        self.protocols.write().insert(protocol.id().to_string(), Arc::new(protocol));
    }

    pub fn protocol_ids(&self) -> Vec<String> {
        self.protocols.read().keys().cloned().collect()
    }

    pub fn protocol(&self, id: &str) -> Result<Arc<ProtocolDefinition>, ServiceError> {
        self.protocols.read().get(id).cloned().ok_or_else(|| ServiceError::UnknownProtocol(id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    fn record(&self, id: &str) -> Result<Arc<Mutex<SessionRecord>>, ServiceError> {
        self.sessions.read().get(id).cloned().ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    /// Creates a session at the initial state. A policy bound to the
    /// questioner makes its opening move before this returns.
    pub fn create_session(&self, protocol_id: &str, bindings: RoleBindings) -> Result<SessionSnapshot, ServiceError> {
        let protocol = self.protocol(protocol_id)?;
        check_bindings(&bindings)?;
        let session_id = uuid::Uuid::new_v4().simple().to_string();
        let created_ms = now_ms();
        let log = match &self.data_dir {
            Some(dir) => {
                let mut f =
                    OpenOptions::new().create_new(true).append(true).open(dir.join(format!("{session_id}.jsonl")))?;
                let header = LogLine::Created {
                    session_id: session_id.clone(),
                    protocol: protocol.id().to_string(),
                    bindings: bindings.clone(),
                    created_ms,
                };
                write_line(&mut f, &header)?;
                Some(f)
            }
            None => None,
        };
        let (sender, _) = broadcast::channel(EVENT_CHANNEL_CAPACITY);
        let mut record = SessionRecord {
            session_id: session_id.clone(),
            state: SessionState::new(&protocol),
            protocol,
            bindings,
            created_ms,
            updated_ms: created_ms,
            events: Vec::new(),
            sender,
            log,
        };
        record.run_policies(Role::Questioner, &mut Vec::new())?;
        let snapshot = record.snapshot();
        self.sessions.write().insert(session_id, Arc::new(Mutex::new(record)));
        Ok(snapshot)
    }

    pub fn get_session(&self, id: &str) -> Result<SessionSnapshot, ServiceError> {
        Ok(self.record(id)?.lock().snapshot())
    }

    /// Applies a human move if `expected_seq` is current, then lets the
    /// counterpart policy respond. On any error nothing changes.
    pub fn post_move(&self, id: &str, expected_seq: u64, mv: Move) -> Result<MoveOutcome, ServiceError> {
        let record = self.record(id)?;
        let mut r = record.lock();
        if r.state.seq != expected_seq {
            return Err(ServiceError::Conflict { expected: expected_seq, current: r.state.seq });
        }
        if let Binding::Policy(p) = r.bindings[&mv.actor] {
            return Err(ServiceError::RoleNotHuman { role: mv.actor, policy: p });
        }
        let mut events = vec![r.append(mv.clone(), MoveSource::Human)?];
        r.run_policies(mv.actor.other(), &mut events)?;
        Ok(MoveOutcome { state: r.state.current, seq: r.state.seq, events })
    }

    /// Past events and a receiver for later ones, with no gap between them.
    pub fn subscribe(&self, id: &str) -> Result<(Vec<SessionEvent>, broadcast::Receiver<SessionEvent>), ServiceError> {
        let record = self.record(id)?;
        let r = record.lock();
        Ok((r.events.clone(), r.sender.subscribe()))
    }

    /// Events with `seq > after`.
    pub fn events_since(&self, id: &str, after: u64) -> Result<Vec<SessionEvent>, ServiceError> {
        let record = self.record(id)?;
        let r = record.lock();
        Ok(r.events.iter().filter(|e| e.seq > after).cloned().collect())
    }

    pub fn events(&self, id: &str) -> Result<Vec<SessionEvent>, ServiceError> {
        self.events_since(id, 0)
    }

    pub fn export_transcript(&self, id: &str, format: ExportFormat) -> Result<String, ServiceError> {
        let record = self.record(id)?;
        let r = record.lock();
        Ok(match format {
            ExportFormat::Trace => r.state.history.to_jsonl(),
            ExportFormat::Corpus => {
                let transcript = transcript_from_trace(
                    format!("session-{}", r.session_id),
                    r.dialog_type(),
                    Medium::Text,
                    &r.state.history,
                );
                CorpusDocument { corpus_id: format!("session-{}", r.session_id), transcripts: vec![transcript] }
                    .to_canonical_string()
            }
        })
    }
}

fn check_bindings(bindings: &RoleBindings) -> Result<(), ServiceError> {
    match Role::ALL.iter().find(|r| !bindings.contains_key(r)) {
        Some(r) => Err(ServiceError::BadBinding(format!("role {r} is unbound"))),
        None => Ok(()),
    }
}

/// Reads the trace back out of an exported single-session corpus document:
/// its one complete dialog, or the unfinished remainder, or nothing.
pub fn trace_from_export(document: &str) -> Result<Trace, CorpusError> {
    let corpus = parse_corpus(document, true)?;
    if let Some(d) = corpus.dialogs.first() {
        return crate::corpus::to_trace(d);
    }
    match corpus.transcripts.first() {
        Some(t) => match segment_dialogs(t)?.pending {
            Some(p) => events_to_trace(&t.id, &p.code_events),
            None => Ok(Trace::default()),
        },
        None => Ok(Trace::default()),
    }
}

/// The policies a binding map refers to.
pub fn bound_policies(bindings: &RoleBindings) -> Vec<(Role, PolicyName)> {
    bindings.iter().filter_map(|(&r, b)| b.policy().map(|p| (r, p))).collect()
}
