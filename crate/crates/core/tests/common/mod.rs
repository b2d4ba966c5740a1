//! Test-side helpers. The oracles here read the protocol file as plain JSON
//! and share no code with the library's machine.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// `(move, actor)` as written in the protocol file.
pub type RawStep = (String, String);

/// The protocol file as a bare edge list.
pub struct RawMachine {
    pub initial: String,
    pub terminals: BTreeSet<String>,
    /// from -> [(move, actor, to)]
    pub edges: BTreeMap<String, Vec<(String, String, String)>>,
}

impl RawMachine {
    pub fn from_json(text: &str) -> RawMachine {
        let v: Value = serde_json::from_str(text).unwrap();
        let s = |x: &Value| x.as_str().unwrap().to_string();
        let mut edges: BTreeMap<String, Vec<(String, String, String)>> = BTreeMap::new();
        for t in v["transitions"].as_array().unwrap() {
            edges.entry(s(&t["from"])).or_default().push((s(&t["move"]), s(&t["actor"]), s(&t["to"])));
        }
        RawMachine {
            initial: s(&v["initial"]),
            terminals: v["terminals"].as_array().unwrap().iter().map(s).collect(),
            edges,
        }
    }

    pub fn default_file() -> RawMachine {
        RawMachine::from_json(&read_fixture("default_protocol.json"))
    }

    /// Every walk of exactly `len` moves from the initial state that ends in a
    /// terminal state, by plain recursion.
    pub fn accepted_of_length(&self, len: usize) -> BTreeSet<Vec<RawStep>> {
        fn go(m: &RawMachine, state: &str, left: usize, path: &mut Vec<RawStep>, out: &mut BTreeSet<Vec<RawStep>>) {
            if left == 0 {
                if m.terminals.contains(state) {
                    out.insert(path.clone());
                }
                return;
            }
            if m.terminals.contains(state) {
                return;
            }
            for (mv, actor, to) in m.edges.get(state).into_iter().flatten() {
                path.push((mv.clone(), actor.clone()));
                go(m, to, left - 1, path, out);
                path.pop();
            }
        }
        let mut out = BTreeSet::new();
        go(self, &self.initial, len, &mut Vec::new(), &mut out);
        out
    }

    /// Accepted walks of at most `max_len` moves.
    pub fn accepted_up_to(&self, max_len: usize) -> BTreeSet<Vec<RawStep>> {
        (0..=max_len).flat_map(|n| self.accepted_of_length(n)).collect()
    }

    /// Replays steps; `Ok(final_state)` or `Err(index of the first bad step)`.
    pub fn run(&self, steps: &[RawStep]) -> Result<String, usize> {
        let mut state = self.initial.clone();
        for (i, (mv, actor)) in steps.iter().enumerate() {
            if self.terminals.contains(&state) {
                return Err(i);
            }
            let next = self
                .edges
                .get(&state)
                .and_then(|es| es.iter().find(|(m, a, _)| m == mv && a == actor))
                .map(|(_, _, to)| to.clone());
            match next {
                Some(n) => state = n,
                None => return Err(i),
            }
        }
        Ok(state)
    }

    pub fn accepts(&self, steps: &[RawStep]) -> bool {
        self.run(steps).is_ok_and(|s| self.terminals.contains(&s))
    }

    pub fn all_steps(&self) -> BTreeSet<RawStep> {
        self.edges.values().flatten().map(|(m, a, _)| (m.clone(), a.clone())).collect()
    }

    /// Distinct move-kind sequences of accepted walks up to `max_len` moves.
    pub fn accepted_kind_sequences(&self, max_len: usize) -> BTreeSet<Vec<String>> {
        (0..=max_len)
            .flat_map(|n| self.accepted_of_length(n))
            .map(|t| t.into_iter().map(|(m, _)| m).collect())
            .collect()
    }
}

/// Textbook Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

pub fn to_raw(steps: &[xdialog_core::protocol::Step]) -> Vec<RawStep> {
    steps.iter().map(|(k, a)| (k.to_string(), a.to_string())).collect()
}

/// The worked sequence from question to affirmed argument.
pub fn golden_steps() -> Vec<xdialog_core::protocol::Step> {
    use xdialog_core::protocol::MoveKind::*;
    use xdialog_core::protocol::Role::{Explainer as E, Questioner as Q};
    vec![
        (QuestionWhat, Q),
        (Explanation, E),
        (ExplaineeAffirmation, Q),
        (ArgumentOpen, Q),
        (ArgumentBody, Q),
        (ArgumentAffirmation, E),
        (EndDialog, E),
    ]
}
