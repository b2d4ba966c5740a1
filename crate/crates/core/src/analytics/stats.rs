use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::corpus::{to_trace, CodeLabel, Corpus, CorpusError, Dialog, DialogType};
use crate::protocol::MoveKind;

/// Aggregation group: the whole corpus or one dialog type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    All,
    Type(DialogType),
}

impl Group {
    pub fn contains(self, dialog: &Dialog) -> bool {
        match self {
            Group::All => true,
            Group::Type(t) => dialog.dialog_type == t,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::All => f.write_str("ALL"),
            Group::Type(t) => write!(f, "{t}"),
        }
    }
}

impl std::str::FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Group::All);
        }
        s.parse::<u8>()
            .ok()
            .and_then(DialogType::new)
            .map(Group::Type)
            .ok_or_else(|| format!("`{s}` is neither ALL nor a dialog type 1-6"))
    }
}

impl Serialize for Group {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `ALL`, followed by each dialog type present when `by_type` is set.
pub fn groups(corpus: &Corpus, by_type: bool) -> Vec<Group> {
    let mut out = vec![Group::All];
    if by_type {
        let counts = corpus.per_type_counts();
        out.extend(DialogType::ALL.iter().filter(|t| counts[t.get() as usize - 1] > 0).map(|&t| Group::Type(t)));
    }
    out
}

fn members(corpus: &Corpus, group: Group) -> impl Iterator<Item = &Dialog> {
    corpus.dialogs.iter().filter(move |d| group.contains(d))
}

/// An exact non-negative rational, written with three decimals (half up).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(pub Ratio<u64>);

impl Decimal {
    pub fn new(numer: u64, denom: u64) -> Decimal {
        if denom == 0 {
            Decimal(Ratio::from_integer(0))
        } else {
            Decimal(Ratio::new(numer, denom))
        }
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (*self.0.numer() as u128, *self.0.denom() as u128);
        let milli = (2 * n * 1000 + d) / (2 * d);
        write!(f, "{}.{:03}", milli / 1000, milli % 1000)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub type CodeCounts = BTreeMap<CodeLabel, u64>;

fn zero_counts() -> CodeCounts {
    CodeLabel::ALL.iter().map(|&c| (c, 0)).collect()
}

/// Occurrences of every code (boundaries included), per group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FrequencyTable {
    pub groups: BTreeMap<Group, CodeCounts>,
}

impl FrequencyTable {
    pub fn all(&self) -> &CodeCounts {
        &self.groups[&Group::All]
    }

    pub fn get(&self, group: Group, code: CodeLabel) -> u64 {
        self.groups.get(&group).map_or(0, |c| c[&code])
    }
}

pub fn code_frequency(corpus: &Corpus, by_type: bool) -> FrequencyTable {
    let groups = groups(corpus, by_type)
        .into_iter()
        .map(|g| {
            let mut counts = zero_counts();
            for e in members(corpus, g).flat_map(|d| &d.code_events) {
                *counts.get_mut(&e.code).unwrap() += 1;
            }
            (g, counts)
        })
        .collect();
    FrequencyTable { groups }
}

/// Mean occurrences per dialog, per group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MeanTable {
    pub groups: BTreeMap<Group, BTreeMap<CodeLabel, Decimal>>,
}

impl MeanTable {
    pub fn get(&self, group: Group, code: CodeLabel) -> Option<Decimal> {
        self.groups.get(&group).map(|m| m[&code])
    }
}

pub fn mean_occurrence(corpus: &Corpus, by_type: bool) -> MeanTable {
    let freq = code_frequency(corpus, by_type);
    let groups = freq
        .groups
        .iter()
        .map(|(&g, counts)| {
            let n = members(corpus, g).count() as u64;
            (g, counts.iter().map(|(&c, &k)| (c, Decimal::new(k, n))).collect())
        })
        .collect();
    MeanTable { groups }
}

/// How many dialogs contain a code exactly k times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccurrenceHistogram {
    #[serde(skip)]
    pub code: CodeLabel,
    #[serde(skip)]
    pub group: Group,
    pub buckets: BTreeMap<u32, u64>,
    /// Most frequent occurrence count; ties go to the smaller count.
    pub mode: u32,
}

pub fn occurrence_histogram(corpus: &Corpus, code: CodeLabel, group: Group) -> OccurrenceHistogram {
    let mut buckets = BTreeMap::new();
    for d in members(corpus, group) {
        *buckets.entry(d.count(code)).or_insert(0) += 1;
    }
    // strict comparison keeps the first (smallest) occurrence count on ties
    let mode = buckets
        .iter()
        .fold(None, |best: Option<(u32, u64)>, (&k, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((k, v)),
        })
        .map_or(0, |(k, _)| k);
    OccurrenceHistogram { code, group, buckets, mode }
}

/// Histogram lookup by code name, as typed by a user.
pub fn occurrence_histogram_named(
    corpus: &Corpus,
    code: &str,
    group: Group,
) -> Result<OccurrenceHistogram, CorpusError> {
    let label =
        CodeLabel::parse_lenient(code).map_err(|e| CorpusError::UnknownCode { at: Default::default(), code: e.0 })?;
    Ok(occurrence_histogram(corpus, label, group))
}

pub type HistogramTable = BTreeMap<Group, BTreeMap<CodeLabel, OccurrenceHistogram>>;

pub fn histograms(corpus: &Corpus, by_type: bool) -> HistogramTable {
    groups(corpus, by_type)
        .into_iter()
        .map(|g| (g, CodeLabel::ALL.iter().map(|&c| (c, occurrence_histogram(corpus, c, g))).collect()))
        .collect()
}

symbol_enum! {
    /// How a dialog ends, judged by its last non-boundary code.
    pub enum EndingCategory {
        Explanation => "EXPLANATION",
        ExplaineeAffirmation => "EXPLAINEE_AFFIRMATION",
        ExplainerAffirmation => "EXPLAINER_AFFIRMATION",
        Other => "OTHER",
    }
}

impl EndingCategory {
    pub fn of_code(code: Option<CodeLabel>) -> EndingCategory {
        match code {
            Some(CodeLabel::Explanation) => EndingCategory::Explanation,
            Some(CodeLabel::ExplaineeAffirmation) => EndingCategory::ExplaineeAffirmation,
            Some(CodeLabel::ExplainerAffirmation) => EndingCategory::ExplainerAffirmation,
            _ => EndingCategory::Other,
        }
    }

    pub fn of_dialog(dialog: &Dialog) -> EndingCategory {
        EndingCategory::of_code(dialog.body().last().map(|e| e.code))
    }
}

/// Ending counts of one group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndingDistribution {
    pub rows: BTreeMap<EndingCategory, u64>,
    /// Dialogs ending in EXPLANATION, split by whether an affirmation code
    /// occurs earlier in the dialog.
    pub explanation_after_affirmation: u64,
    pub explanation_without_affirmation: u64,
    /// Last two non-boundary codes, joined with `>`; `-` when the body is shorter.
    pub suffixes: BTreeMap<String, u64>,
}

impl EndingDistribution {
    /// Categories by descending count; ties keep category order.
    pub fn ranking(&self) -> Vec<EndingCategory> {
        let mut r: Vec<_> = self.rows.iter().map(|(&c, &n)| (c, n)).collect();
        r.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
        r.into_iter().map(|(c, _)| c).collect()
    }

    pub fn total(&self) -> u64 {
        self.rows.values().sum()
    }
}

pub type EndingTable = BTreeMap<Group, EndingDistribution>;

fn is_affirmation(code: CodeLabel) -> bool {
    matches!(code, CodeLabel::ExplaineeAffirmation | CodeLabel::ExplainerAffirmation)
}

pub fn ending_distribution(corpus: &Corpus, by_type: bool) -> EndingTable {
    groups(corpus, by_type)
        .into_iter()
        .map(|g| {
            let mut dist = EndingDistribution {
                rows: EndingCategory::ALL.iter().map(|&c| (c, 0)).collect(),
                explanation_after_affirmation: 0,
                explanation_without_affirmation: 0,
                suffixes: BTreeMap::new(),
            };
            for d in members(corpus, g) {
                let body: Vec<CodeLabel> = d.body().map(|e| e.code).collect();
                let cat = EndingCategory::of_code(body.last().copied());
                *dist.rows.get_mut(&cat).unwrap() += 1;
                if cat == EndingCategory::Explanation {
                    if body[..body.len() - 1].iter().any(|&c| is_affirmation(c)) {
                        dist.explanation_after_affirmation += 1;
                    } else {
                        dist.explanation_without_affirmation += 1;
                    }
                }
                let name = |i: Option<usize>| i.and_then(|i| body.get(i)).map_or("-", |c| c.as_str());
                let n = body.len();
                let key = format!("{}>{}", name(n.checked_sub(2)), name(n.checked_sub(1)));
                *dist.suffixes.entry(key).or_insert(0) += 1;
            }
            (g, dist)
        })
        .collect()
}

/// Counts of consecutive move pairs within dialogs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub counts: BTreeMap<(MoveKind, MoveKind), u64>,
}

impl TransitionMatrix {
    pub fn get(&self, from: MoveKind, to: MoveKind) -> u64 {
        self.counts.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn add_trace(&mut self, kinds: &[MoveKind]) {
        for w in kinds.windows(2) {
            *self.counts.entry((w[0], w[1])).or_insert(0) += 1;
        }
    }

    /// Rows keyed by the earlier move.
    pub fn nested(&self) -> BTreeMap<MoveKind, BTreeMap<MoveKind, u64>> {
        let mut out: BTreeMap<MoveKind, BTreeMap<MoveKind, u64>> = BTreeMap::new();
        for (&(a, b), &n) in &self.counts {
            out.entry(a).or_default().insert(b, n);
        }
        out
    }
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.nested().serialize(s)
    }
}

pub fn transition_matrix(corpus: &Corpus) -> Result<TransitionMatrix, CorpusError> {
    let mut m = TransitionMatrix::default();
    for d in &corpus.dialogs {
        m.add_trace(&to_trace(d)?.kinds());
    }
    Ok(m)
}
