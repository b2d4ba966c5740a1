use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::stats::{groups, Decimal, Group};
use crate::corpus::{to_trace, Corpus, CorpusError, DialogType};
use crate::protocol::{validate_trace, DialogState, MoveKind, ProtocolDefinition, Verdict};

/// Fewest insertions, deletions and substitutions of move kinds that turn
/// `kinds` into the kind sequence of some accepted trace. Actors are ignored.
///
/// Runs a shortest-path relaxation over (position, state). The result is
/// exact for every length. `None` when the protocol accepts nothing.
pub fn edit_distance(protocol: &ProtocolDefinition, kinds: &[MoveKind]) -> Option<u32> {
    let states: Vec<DialogState> = protocol.states().iter().copied().collect();
    let index = |s: DialogState| states.binary_search(&s).expect("state belongs to protocol");
    let edges: BTreeSet<(usize, MoveKind, usize)> =
        protocol.transitions().iter().map(|t| (index(t.from), t.kind, index(t.to))).collect();

    const INF: u32 = u32::MAX / 2;
    let close = |dist: &mut Vec<u32>| loop {
        let mut changed = false;
        for &(a, _, b) in &edges {
            if dist[a] + 1 < dist[b] {
                dist[b] = dist[a] + 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    };

    let mut dist = vec![INF; states.len()];
    dist[index(protocol.initial())] = 0;
    close(&mut dist);
    for &k in kinds {
        let mut next: Vec<u32> = dist.iter().map(|&d| d + 1).collect();
        for &(a, e, b) in &edges {
            let cost = dist[a] + u32::from(e != k);
            if cost < next[b] {
                next[b] = cost;
            }
        }
        close(&mut next);
        dist = next;
    }
    protocol.terminals().iter().map(|&t| dist[index(t)]).min().filter(|&d| d < INF)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DialogConformance {
    pub transcript_id: String,
    pub ordinal: usize,
    pub dialog_type: DialogType,
    pub length: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub edit_distance: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConformanceSummary {
    pub dialogs: u64,
    pub accepted: u64,
    pub incomplete: u64,
    pub rejected: u64,
    pub acceptance_rate: Decimal,
    pub mean_edit_distance: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConformanceReport {
    pub protocol: String,
    pub summary: BTreeMap<Group, ConformanceSummary>,
    pub dialogs: Vec<DialogConformance>,
}

impl ConformanceReport {
    pub fn overall(&self) -> &ConformanceSummary {
        &self.summary[&Group::All]
    }
}

pub fn conformance(
    corpus: &Corpus,
    protocol: &ProtocolDefinition,
    by_type: bool,
) -> Result<ConformanceReport, CorpusError> {
    let mut dialogs = Vec::with_capacity(corpus.dialogs.len());
    for d in &corpus.dialogs {
        let trace = to_trace(d)?;
        let verdict = validate_trace(protocol, &trace);
        let edit_distance = if verdict.is_accepted() { Some(0) } else { edit_distance(protocol, &trace.kinds()) };
        dialogs.push(DialogConformance {
            transcript_id: d.transcript_id.clone(),
            ordinal: d.ordinal,
            dialog_type: d.dialog_type,
            length: trace.len(),
            verdict,
            edit_distance,
        });
    }
    let summary = groups(corpus, by_type)
        .into_iter()
        .map(|g| {
            let rows: Vec<&DialogConformance> =
                dialogs.iter().filter(|c| matches!(g, Group::All) || g == Group::Type(c.dialog_type)).collect();
            let count = |label: &str| rows.iter().filter(|c| c.verdict.label() == label).count() as u64;
            let n = rows.len() as u64;
            let accepted = count("ACCEPTED");
            let total_distance: u64 = rows.iter().filter_map(|c| c.edit_distance).map(u64::from).sum();
            let measured = rows.iter().filter(|c| c.edit_distance.is_some()).count() as u64;
            let s = ConformanceSummary {
                dialogs: n,
                accepted,
                incomplete: count("INCOMPLETE"),
                rejected: count("REJECTED"),
                acceptance_rate: Decimal::new(accepted, n),
                mean_edit_distance: Decimal::new(total_distance, measured),
            };
            (g, s)
        })
        .collect();
    Ok(ConformanceReport { protocol: protocol.id().to_string(), summary, dialogs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::default_protocol;
    use MoveKind::*;

    #[test]
    fn distances_on_small_cases() {
        let p = default_protocol();
        assert_eq!(edit_distance(&p, &[QuestionWhat, Explanation, EndDialog]), Some(0));
        assert_eq!(edit_distance(&p, &[QuestionWhat, ExplaineeAffirmation, EndDialog]), Some(1));
        assert_eq!(edit_distance(&p, &[]), Some(2));
        assert_eq!(edit_distance(&p, &[EndDialog]), Some(1));
        assert_eq!(edit_distance(&p, &[QuestionWhat, Explanation]), Some(1));
        assert_eq!(edit_distance(&p, &[EndDialog, EndDialog, QuestionWhat]), Some(2));
    }
}
