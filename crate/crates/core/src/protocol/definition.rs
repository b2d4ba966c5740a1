use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::error::{MoveError, ProtocolError};
use super::types::{ActorConstraint, DialogState, MoveKind, Role, Step};

const DEFAULT_DOCUMENT: &str = include_str!("../../fixtures/default_protocol.json");

/// One arrow of the state diagram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: DialogState,
    #[serde(rename = "move")]
    pub kind: MoveKind,
    pub actor: Role,
    pub to: DialogState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Reject fields outside the protocol file format.
    pub strict: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { strict: true }
    }
}

/// A validated protocol: deterministic, every state reachable, a terminal
/// reachable from every state, and terminals without exits.
///
/// Instances can only be obtained through [`load_protocol`] or
/// [`default_protocol`], so these invariants always hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolDefinition {
    id: String,
    notes: Vec<String>,
    states: BTreeSet<DialogState>,
    initial: DialogState,
    terminals: BTreeSet<DialogState>,
    actor_constraints: BTreeMap<MoveKind, ActorConstraint>,
    transitions: Vec<Transition>,
    index: HashMap<(DialogState, MoveKind, Role), DialogState>,
    outgoing: BTreeMap<DialogState, Vec<(Step, DialogState)>>,
}

#[derive(Serialize)]
struct Document<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notes: &'a [String],
    states: Vec<DialogState>,
    initial: DialogState,
    terminals: Vec<DialogState>,
    actor_constraints: &'a BTreeMap<MoveKind, ActorConstraint>,
    transitions: &'a [Transition],
}

const TOP_FIELDS: &[&str] = &["id", "notes", "states", "initial", "terminals", "actor_constraints", "transitions"];
const TRANSITION_FIELDS: &[&str] = &["from", "move", "actor", "to", "note"];

fn syntax(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::Syntax(msg.into())
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value, ProtocolError> {
    obj.get(key).ok_or_else(|| syntax(format!("missing field `{key}`")))
}

fn string<'a>(value: &'a Value, ctx: &str) -> Result<&'a str, ProtocolError> {
    value.as_str().ok_or_else(|| syntax(format!("`{ctx}` must be a string")))
}

fn array<'a>(value: &'a Value, ctx: &str) -> Result<&'a Vec<Value>, ProtocolError> {
    value.as_array().ok_or_else(|| syntax(format!("`{ctx}` must be an array")))
}

fn symbol<T: FromStr>(name: &str, what: &'static str) -> Result<T, ProtocolError> {
    name.parse().map_err(|_| ProtocolError::UnknownSymbol { what, name: name.to_string() })
}

fn check_fields(
    obj: &serde_json::Map<String, Value>,
    allowed: &[&str],
    ctx: &str,
    strict: bool,
) -> Result<(), ProtocolError> {
    if !strict {
        return Ok(());
    }
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(syntax(format!("unknown field `{k}` in {ctx}"))),
        None => Ok(()),
    }
}

/// Parses and validates a protocol document in strict mode.
pub fn load_protocol(document: &str) -> Result<ProtocolDefinition, ProtocolError> {
    load_protocol_with(document, LoadOptions::default())
}

pub fn load_protocol_with(document: &str, options: LoadOptions) -> Result<ProtocolDefinition, ProtocolError> {
    let root: Value = serde_json::from_str(document).map_err(|e| syntax(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| syntax("document must be a JSON object"))?;
    check_fields(obj, TOP_FIELDS, "protocol", options.strict)?;

    let id = string(field(obj, "id")?, "id")?.to_string();
    let notes = match obj.get("notes") {
        None => Vec::new(),
        Some(v) => {
            array(v, "notes")?.iter().map(|n| string(n, "notes").map(str::to_string)).collect::<Result<_, _>>()?
        }
    };

    let mut states = BTreeSet::new();
    for s in array(field(obj, "states")?, "states")? {
        states.insert(symbol::<DialogState>(string(s, "states")?, "state")?);
    }
    let initial = symbol(string(field(obj, "initial")?, "initial")?, "state")?;
    let mut terminals = BTreeSet::new();
    for s in array(field(obj, "terminals")?, "terminals")? {
        terminals.insert(symbol::<DialogState>(string(s, "terminals")?, "state")?);
    }

    let constraints_obj =
        field(obj, "actor_constraints")?.as_object().ok_or_else(|| syntax("`actor_constraints` must be an object"))?;
    let mut actor_constraints = BTreeMap::new();
    for (kind, role) in constraints_obj {
        let kind: MoveKind = symbol(kind, "move kind")?;
        let role: ActorConstraint = symbol(string(role, "actor_constraints")?, "actor constraint")?;
        actor_constraints.insert(kind, role);
    }

    let mut transitions = Vec::new();
    for t in array(field(obj, "transitions")?, "transitions")? {
        let t = t.as_object().ok_or_else(|| syntax("transition must be an object"))?;
        check_fields(t, TRANSITION_FIELDS, "transition", options.strict)?;
        let note = match t.get("note") {
            None | Some(Value::Null) => None,
            Some(v) => Some(string(v, "note")?.to_string()),
        };
        transitions.push(Transition {
            from: symbol(string(field(t, "from")?, "from")?, "state")?,
            kind: symbol(string(field(t, "move")?, "move")?, "move kind")?,
            actor: symbol(string(field(t, "actor")?, "actor")?, "role")?,
            to: symbol(string(field(t, "to")?, "to")?, "state")?,
            note,
        });
    }

    ProtocolDefinition::build(id, notes, states, initial, terminals, actor_constraints, transitions)
}

/// The bundled explanation dialog model.
pub fn default_protocol() -> ProtocolDefinition {
    static DEFAULT: OnceLock<ProtocolDefinition> = OnceLock::new();
    DEFAULT.get_or_init(|| load_protocol(DEFAULT_DOCUMENT).expect("bundled protocol is valid")).clone()
}

/// Raw text of the bundled protocol file.
pub fn default_protocol_document() -> &'static str {
    DEFAULT_DOCUMENT
}

impl ProtocolDefinition {
    fn build(
        id: String,
        notes: Vec<String>,
        states: BTreeSet<DialogState>,
        initial: DialogState,
        terminals: BTreeSet<DialogState>,
        actor_constraints: BTreeMap<MoveKind, ActorConstraint>,
        transitions: Vec<Transition>,
    ) -> Result<Self, ProtocolError> {
        let unknown_state =
            |s: DialogState| ProtocolError::UnknownSymbol { what: "state", name: s.as_str().to_string() };
        if !states.contains(&initial) {
            return Err(unknown_state(initial));
        }
        if terminals.is_empty() {
            return Err(syntax("at least one terminal state is required"));
        }
        if let Some(t) = terminals.iter().find(|t| !states.contains(t)) {
            return Err(unknown_state(*t));
        }

        let mut index = HashMap::new();
        let mut outgoing: BTreeMap<DialogState, Vec<(Step, DialogState)>> =
            states.iter().map(|s| (*s, Vec::new())).collect();
        for t in &transitions {
            for s in [t.from, t.to] {
                if !states.contains(&s) {
                    return Err(unknown_state(s));
                }
            }
            if terminals.contains(&t.from) {
                return Err(ProtocolError::TerminalHasExit(t.from));
            }
            let constraint = actor_constraints.get(&t.kind).ok_or(ProtocolError::MissingActorConstraint(t.kind))?;
            if !constraint.allows(t.actor) {
                return Err(ProtocolError::ActorMismatch { from: t.from, kind: t.kind, actor: t.actor });
            }
            if index.insert((t.from, t.kind, t.actor), t.to).is_some() {
                return Err(ProtocolError::Nondeterministic { from: t.from, kind: t.kind, actor: t.actor });
            }
            outgoing.get_mut(&t.from).unwrap().push(((t.kind, t.actor), t.to));
        }
        for edges in outgoing.values_mut() {
            edges.sort();
        }
        if let Some(kind) = actor_constraints.keys().find(|k| !transitions.iter().any(|t| t.kind == **k)) {
            return Err(ProtocolError::UnusedMoveKind(*kind));
        }

        // forward reachability from the initial state
        let mut seen = BTreeSet::from([initial]);
        let mut queue = VecDeque::from([initial]);
        while let Some(s) = queue.pop_front() {
            for (_, to) in &outgoing[&s] {
                if seen.insert(*to) {
                    queue.push_back(*to);
                }
            }
        }
        if let Some(s) = states.iter().find(|s| !seen.contains(s)) {
            return Err(ProtocolError::UnreachableState(*s));
        }

        // backward reachability from the terminals
        let mut alive: BTreeSet<DialogState> = terminals.clone();
        loop {
            let before = alive.len();
            for t in &transitions {
                if alive.contains(&t.to) {
                    alive.insert(t.from);
                }
            }
            if alive.len() == before {
                break;
            }
        }
        if let Some(s) = states.iter().find(|s| !alive.contains(s)) {
            return Err(ProtocolError::DeadState(*s));
        }

        Ok(ProtocolDefinition {
            id,
            notes,
            states,
            initial,
            terminals,
            actor_constraints,
            transitions,
            index,
            outgoing,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn states(&self) -> &BTreeSet<DialogState> {
        &self.states
    }

    pub fn initial(&self) -> DialogState {
        self.initial
    }

    pub fn terminals(&self) -> &BTreeSet<DialogState> {
        &self.terminals
    }

    pub fn is_terminal(&self, state: DialogState) -> bool {
        self.terminals.contains(&state)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn actor_constraint(&self, kind: MoveKind) -> Option<ActorConstraint> {
        self.actor_constraints.get(&kind).copied()
    }

    pub fn actor_constraints(&self) -> &BTreeMap<MoveKind, ActorConstraint> {
        &self.actor_constraints
    }

    /// Target of the transition keyed by `(from, kind, actor)`, if any.
    pub fn next_state(&self, from: DialogState, kind: MoveKind, actor: Role) -> Option<DialogState> {
        self.index.get(&(from, kind, actor)).copied()
    }

    /// Outgoing edges of `state`, sorted by step.
    pub fn edges_from(&self, state: DialogState) -> &[(Step, DialogState)] {
        self.outgoing.get(&state).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Set of `(move, actor)` pairs that have a transition out of `state`.
    pub fn legal_moves(&self, state: DialogState) -> Result<BTreeSet<Step>, MoveError> {
        if !self.states.contains(&state) {
            return Err(MoveError::UnknownState(state));
        }
        Ok(self.edges_from(state).iter().map(|(step, _)| *step).collect())
    }

    pub fn legal_moves_for(&self, state: DialogState, role: Role) -> Vec<MoveKind> {
        self.edges_from(state).iter().filter(|((_, actor), _)| *actor == role).map(|((kind, _), _)| *kind).collect()
    }

    /// Serializes back into the protocol file format.
    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(Document {
            id: &self.id,
            notes: &self.notes,
            states: self.states.iter().copied().collect(),
            initial: self.initial,
            terminals: self.terminals.iter().copied().collect(),
            actor_constraints: &self.actor_constraints,
            transitions: &self.transitions,
        })
        .expect("protocol serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("protocol serializes")
    }
}

pub fn legal_moves(protocol: &ProtocolDefinition, state: DialogState) -> Result<BTreeSet<Step>, MoveError> {
    protocol.legal_moves(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edit(f: impl FnOnce(&mut Value)) -> String {
        let mut doc: Value = serde_json::from_str(DEFAULT_DOCUMENT).unwrap();
        f(&mut doc);
        doc.to_string()
    }

    fn push_transition(doc: &mut Value, t: Value) {
        doc["transitions"].as_array_mut().unwrap().push(t);
    }

    #[test]
    fn bundled_protocol_shape() {
        let p = default_protocol();
        assert_eq!(p.states().len(), 11);
        assert_eq!(p.terminals().len(), 1);
        assert_eq!(p.initial(), DialogState::Start);
        assert!(p.states().contains(&DialogState::CompositeQuestion));
        assert!(p.states().contains(&DialogState::ArgPresented));
    }

    #[test]
    fn start_opens_with_question_or_argument() {
        let p = default_protocol();
        let legal = p.legal_moves(DialogState::Start).unwrap();
        for kind in MoveKind::QUESTIONS {
            assert!(legal.contains(&(kind, Role::Questioner)));
        }
        assert!(legal.contains(&(MoveKind::ArgumentOpen, Role::Questioner)));
        assert!(!legal.iter().any(|(k, _)| *k == MoveKind::EndDialog));
    }

    #[test]
    fn terminal_has_no_legal_moves() {
        assert!(default_protocol().legal_moves(DialogState::End).unwrap().is_empty());
    }

    #[test]
    fn argument_presented_moves() {
        let legal = default_protocol().legal_moves(DialogState::ArgPresented).unwrap();
        assert!(legal.iter().any(|(k, _)| *k == MoveKind::ArgumentAffirmation));
        assert!(legal.iter().any(|(k, _)| *k == MoveKind::CounterArgument));
    }

    #[test]
    fn unknown_state_is_reported() {
        let doc = edit(|d| {
            let states = d["states"].as_array_mut().unwrap();
            states.retain(|s| s != "CLARIFICATION");
            d["transitions"]
                .as_array_mut()
                .unwrap()
                .retain(|t| t["from"] != "CLARIFICATION" && t["to"] != "CLARIFICATION");
            d["transitions"].as_array_mut().unwrap().retain(|t| t["move"] != "EXPLAINER_RETURN_QUESTION");
            d["actor_constraints"].as_object_mut().unwrap().remove("EXPLAINER_RETURN_QUESTION");
        });
        let p = load_protocol(&doc).unwrap();
        assert!(matches!(
            p.legal_moves(DialogState::Clarification),
            Err(MoveError::UnknownState(DialogState::Clarification))
        ));
    }

    #[test]
    fn exit_from_terminal_is_rejected() {
        let doc = edit(|d| {
            push_transition(
                d,
                serde_json::json!({"from":"END","move":"QUESTION_WHAT","actor":"Q","to":"COMPOSITE_QUESTION"}),
            );
        });
        let err = load_protocol(&doc).unwrap_err();
        assert_eq!(err, ProtocolError::TerminalHasExit(DialogState::End));
        assert_eq!(err.code(), "DEAD_STATE");
    }

    #[test]
    fn duplicate_key_is_nondeterministic() {
        let doc = edit(|d| {
            push_transition(
                d,
                serde_json::json!({"from":"START","move":"QUESTION_WHAT","actor":"Q","to":"CLARIFICATION"}),
            );
        });
        let err = load_protocol(&doc).unwrap_err();
        assert_eq!(err.code(), "NONDETERMINISTIC");
    }

    #[test]
    fn malformed_json_is_syntax() {
        assert_eq!(load_protocol("{\"id\": ").unwrap_err().code(), "SYNTAX");
        assert_eq!(load_protocol("[]").unwrap_err().code(), "SYNTAX");
    }

    #[test]
    fn unknown_names_are_rejected() {
        let doc = edit(|d| d["initial"] = "BEGIN".into());
        assert_eq!(load_protocol(&doc).unwrap_err().code(), "UNKNOWN_SYMBOL");
        let doc = edit(|d| {
            push_transition(d, serde_json::json!({"from":"START","move":"SHRUG","actor":"Q","to":"END"}));
        });
        assert_eq!(load_protocol(&doc).unwrap_err().code(), "UNKNOWN_SYMBOL");
    }

    #[test]
    fn unreachable_and_dead_states() {
        // drop every edge into CLARIFICATION
        let doc = edit(|d| {
            d["transitions"].as_array_mut().unwrap().retain(|t| t["to"] != "CLARIFICATION");
            d["transitions"].as_array_mut().unwrap().retain(|t| t["move"] != "EXPLAINER_RETURN_QUESTION");
            d["actor_constraints"].as_object_mut().unwrap().remove("EXPLAINER_RETURN_QUESTION");
        });
        assert_eq!(load_protocol(&doc).unwrap_err(), ProtocolError::UnreachableState(DialogState::Clarification));
        // CLARIFICATION can only loop back into itself
        let doc = edit(|d| {
            d["transitions"].as_array_mut().unwrap().retain(|t| t["from"] != "CLARIFICATION");
            push_transition(
                d,
                serde_json::json!({"from":"CLARIFICATION","move":"QUESTION_WHAT","actor":"Q","to":"CLARIFICATION"}),
            );
        });
        assert_eq!(load_protocol(&doc).unwrap_err(), ProtocolError::DeadState(DialogState::Clarification));
    }

    #[test]
    fn strict_mode_rejects_unknown_fields() {
        let doc = edit(|d| d["colour"] = "blue".into());
        assert_eq!(load_protocol(&doc).unwrap_err().code(), "SYNTAX");
        let lenient = load_protocol_with(&doc, LoadOptions { strict: false }).unwrap();
        assert_eq!(lenient.id(), "default");
    }

    #[test]
    fn actor_constraint_totality() {
        let doc = edit(|d| {
            d["actor_constraints"].as_object_mut().unwrap().remove("EXPLANATION");
        });
        assert_eq!(load_protocol(&doc).unwrap_err(), ProtocolError::MissingActorConstraint(MoveKind::Explanation));
        let doc = edit(|d| {
            push_transition(
                d,
                serde_json::json!({"from":"COMPOSITE_QUESTION","move":"EXPLANATION","actor":"Q","to":"EXPLANATION_PRESENTED"}),
            );
        });
        assert_eq!(load_protocol(&doc).unwrap_err().code(), "ACTOR_VIOLATION");
    }

    #[test]
    fn serialization_reloads_to_the_same_protocol() {
        let p = default_protocol();
        let again = load_protocol(&p.to_json_pretty()).unwrap();
        assert_eq!(p, again);
    }
}
