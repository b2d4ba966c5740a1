//! Policy-driven random dialogs.
//!
//! A [`Policy`] assigns non-negative weights to the legal `(move, actor)`
//! pairs of each state. Sampling walks the machine from the initial state,
//! drawing each step proportionally to its weight. Past the move budget the
//! `END_DIALOG` weight is floored to the row mean and doubled on every
//! further step, so every walk terminates.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::definition::ProtocolDefinition;
use super::session::Trace;
use super::types::{DialogState, Move, MoveKind, Role, Step};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("negative weight {weight} on ({kind}, {actor}) in {state}")]
    NegativeWeight { state: DialogState, kind: MoveKind, actor: Role, weight: f64 },
    #[error("weight on ({kind}, {actor}) which is not legal in {state}")]
    IllegalPair { state: DialogState, kind: MoveKind, actor: Role },
    #[error("state {0} is reachable under the policy but has no positive weight")]
    ZeroRow(DialogState),
}

impl PolicyError {
    pub fn code(&self) -> &'static str {
        "INVALID_POLICY"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedStep {
    pub kind: MoveKind,
    pub actor: Role,
    pub weight: f64,
}

/// Per-state weights over legal steps. Steps not listed have weight zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Policy {
    pub rows: BTreeMap<DialogState, Vec<WeightedStep>>,
}

impl Policy {
    /// Weight 1 on every legal step of every non-terminal state.
    pub fn uniform(protocol: &ProtocolDefinition) -> Policy {
        let rows = protocol
            .states()
            .iter()
            .filter(|s| !protocol.is_terminal(**s))
            .map(|s| {
                let row = protocol
                    .edges_from(*s)
                    .iter()
                    .map(|((kind, actor), _)| WeightedStep { kind: *kind, actor: *actor, weight: 1.0 })
                    .collect();
                (*s, row)
            })
            .collect();
        Policy { rows }
    }

    pub fn set(&mut self, state: DialogState, kind: MoveKind, actor: Role, weight: f64) -> &mut Self {
        let row = self.rows.entry(state).or_default();
        match row.iter_mut().find(|w| w.kind == kind && w.actor == actor) {
            Some(w) => w.weight = weight,
            None => row.push(WeightedStep { kind, actor, weight }),
        }
        self
    }

    fn weight(&self, state: DialogState, step: Step) -> f64 {
        self.rows.get(&state).and_then(|row| row.iter().find(|w| (w.kind, w.actor) == step)).map_or(0.0, |w| w.weight)
    }

    /// Checks weights against the protocol and that every state the policy
    /// can reach has some positive mass.
    pub fn validate(&self, protocol: &ProtocolDefinition) -> Result<(), PolicyError> {
        for (state, row) in &self.rows {
            for w in row {
                if w.weight.is_nan() || w.weight < 0.0 {
                    return Err(PolicyError::NegativeWeight {
                        state: *state,
                        kind: w.kind,
                        actor: w.actor,
                        weight: w.weight,
                    });
                }
                if protocol.next_state(*state, w.kind, w.actor).is_none() {
                    return Err(PolicyError::IllegalPair { state: *state, kind: w.kind, actor: w.actor });
                }
            }
        }
        let mut seen = BTreeSet::from([protocol.initial()]);
        let mut stack = vec![protocol.initial()];
        while let Some(s) = stack.pop() {
            if protocol.is_terminal(s) {
                continue;
            }
            let mut any = false;
            for (step, to) in protocol.edges_from(s) {
                if self.weight(s, *step) > 0.0 {
                    any = true;
                    if seen.insert(*to) {
                        stack.push(*to);
                    }
                }
            }
            if !any {
                return Err(PolicyError::ZeroRow(s));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    /// Moves after which the END_DIALOG ramp starts.
    pub move_budget: usize,
    pub ramp_base: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { move_budget: 30, ramp_base: 2.0 }
    }
}

/// Draws a stream of dialogs from one seeded generator.
pub struct Sampler<'a> {
    protocol: &'a ProtocolDefinition,
    policy: &'a Policy,
    config: SampleConfig,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(protocol: &'a ProtocolDefinition, policy: &'a Policy, seed: u64) -> Result<Self, PolicyError> {
        Sampler::with_config(protocol, policy, seed, SampleConfig::default())
    }

    pub fn with_config(
        protocol: &'a ProtocolDefinition,
        policy: &'a Policy,
        seed: u64,
        config: SampleConfig,
    ) -> Result<Self, PolicyError> {
        policy.validate(protocol)?;
        Ok(Sampler { protocol, policy, config, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn next_dialog(&mut self) -> Trace {
        let mut state = self.protocol.initial();
        let mut moves = Vec::new();
        let mut choices: Vec<(Step, DialogState, f64)> = Vec::new();
        while !self.protocol.is_terminal(state) {
            choices.clear();
            let edges = self.protocol.edges_from(state);
            for (step, to) in edges {
                choices.push((*step, *to, self.policy.weight(state, *step)));
            }
            if moves.len() >= self.config.move_budget {
                let mean = choices.iter().map(|c| c.2).sum::<f64>() / choices.len() as f64;
                let over = (moves.len() - self.config.move_budget + 1) as i32;
                let ramp = self.config.ramp_base.powi(over.min(60));
                for c in choices.iter_mut().filter(|c| c.0 .0 == MoveKind::EndDialog) {
                    c.2 = c.2.max(mean) * ramp;
                }
            }
            let total: f64 = choices.iter().map(|c| c.2).sum();
            let mut pick = self.rng.gen::<f64>() * total;
            let mut chosen = None;
            for (step, to, w) in &choices {
                if *w <= 0.0 {
                    continue;
                }
                chosen = Some((*step, *to));
                if pick < *w {
                    break;
                }
                pick -= w;
            }
            let (step, to) = chosen.expect("validated policy has positive mass at every reachable state");
            moves.push(Move::from(step));
            state = to;
        }
        Trace::new(moves)
    }
}

/// One complete dialog drawn with `seed`.
pub fn sample_dialog(protocol: &ProtocolDefinition, policy: &Policy, seed: u64) -> Result<Trace, PolicyError> {
    Ok(Sampler::new(protocol, policy, seed)?.next_dialog())
}
