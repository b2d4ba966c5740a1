use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::protocol::{DialogState, Move, MoveKind, ProtocolDefinition, Role, SessionState};

pub const CANNED_EXPLANATION: &str = "Here is the explanation you asked for.";
pub const CANNED_QUESTION: &str = "What happened?";

/// Scripted counterpart that plays one role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyName {
    CannedExplainer,
    CannedExplainee,
    UniformRandom { seed: u64 },
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyName::CannedExplainer => f.write_str("canned-explainer"),
            PolicyName::CannedExplainee => f.write_str("canned-explainee"),
            PolicyName::UniformRandom { seed } => write!(f, "uniform-random({seed})"),
        }
    }
}

impl FromStr for PolicyName {
    type Err = String;

    /// Accepts `canned-explainer`, `canned-explainee`, `uniform-random`,
    /// `uniform-random(7)` and `uniform-random:7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canned-explainer" => return Ok(PolicyName::CannedExplainer),
            "canned-explainee" => return Ok(PolicyName::CannedExplainee),
            "uniform-random" => return Ok(PolicyName::UniformRandom { seed: 0 }),
            _ => {}
        }
        let seed = s
            .strip_prefix("uniform-random(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("uniform-random:"))
            .ok_or_else(|| format!("unknown policy `{s}`"))?;
        seed.trim().parse().map(|seed| PolicyName::UniformRandom { seed }).map_err(|_| format!("bad seed in `{s}`"))
    }
}

/// Who plays a role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Binding {
    Human,
    Policy(PolicyName),
}

impl Binding {
    pub fn policy(self) -> Option<PolicyName> {
        match self {
            Binding::Human => None,
            Binding::Policy(p) => Some(p),
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Human => f.write_str("human"),
            Binding::Policy(p) => p.fmt(f),
        }
    }
}

impl FromStr for Binding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "human" {
            Ok(Binding::Human)
        } else {
            s.parse().map(Binding::Policy)
        }
    }
}

impl Serialize for Binding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Binding {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn last_by_other(session: &SessionState, role: Role) -> bool {
    session.history.moves.last().is_some_and(|m| m.actor != role)
}

impl PolicyName {
    /// The move this policy makes as `role`, or `None` to pass.
    /// Only moves legal at the current state are ever returned.
    pub fn choose(self, protocol: &ProtocolDefinition, session: &SessionState, role: Role) -> Option<Move> {
        use DialogState as S;
        use MoveKind as K;
        let legal = protocol.legal_moves_for(session.current, role);
        if legal.is_empty() {
            return None;
        }
        let affirm_other = matches!(session.current, S::ArgPresented | S::CounterArg) && last_by_other(session, role);
        let wanted = match self {
            PolicyName::UniformRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ session.seq.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let kind = *legal.choose(&mut rng)?;
                let mv = Move::new(kind, role);
                return Some(match (&session.topic, kind.asks()) {
                    (Some(t), true) => mv.with_topic(t.clone()),
                    _ => mv,
                });
            }
            PolicyName::CannedExplainer => match session.current {
                S::CompositeQuestion => Move::new(K::Explanation, role).with_text(CANNED_EXPLANATION),
                S::ExplaineeAffirmed => Move::new(K::ExplainerAffirmation, role),
                _ if affirm_other => Move::new(K::ArgumentAffirmation, role),
                _ => return None,
            },
            PolicyName::CannedExplainee => match session.current {
                S::Start | S::Clarification => {
                    let q = Move::new(K::QuestionWhat, role).with_text(CANNED_QUESTION);
                    match &session.topic {
                        Some(t) => q.with_topic(t.clone()),
                        None => q,
                    }
                }
                S::ExplanationPresented => Move::new(K::ExplaineeAffirmation, role),
                S::ExplainerAffirmed | S::ArgAffirmed => Move::new(K::EndDialog, role),
                _ if affirm_other => Move::new(K::ArgumentAffirmation, role),
                _ => return None,
            },
        };
        legal.contains(&wanted.kind).then_some(wanted)
    }
}
