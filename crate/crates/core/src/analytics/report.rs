use serde::Serialize;

use super::conformance::{conformance, ConformanceReport};
use super::stats::{
    code_frequency, ending_distribution, histograms, mean_occurrence, transition_matrix, EndingTable, FrequencyTable,
    HistogramTable, MeanTable, TransitionMatrix,
};
use crate::corpus::{Corpus, CorpusError};
use crate::protocol::ProtocolDefinition;

pub const REPORT_NOTES: &[&str] = &[
    "WHAT counts every question that is neither how nor why (where, which, do, is, ...).",
    "Means are exact per-dialog ratios printed with three decimals, rounded half up.",
    "Histogram modes break ties toward the smaller occurrence count.",
    "Endings use the last non-boundary code; anything other than EXPLANATION and the two affirmations is OTHER.",
    "Transitions and edit distances are over protocol move kinds; actors and attachments are ignored.",
];

/// Every statistic over one corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticsReport {
    pub notes: Vec<String>,
    pub code_frequency: FrequencyTable,
    pub mean_occurrence: MeanTable,
    pub histograms: HistogramTable,
    pub endings: EndingTable,
    pub transition_matrix: TransitionMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformance: Option<ConformanceReport>,
}

impl AnalyticsReport {
    pub fn build(
        corpus: &Corpus,
        by_type: bool,
        protocol: Option<&ProtocolDefinition>,
    ) -> Result<AnalyticsReport, CorpusError> {
        Ok(AnalyticsReport {
            notes: REPORT_NOTES.iter().map(|s| s.to_string()).collect(),
            code_frequency: code_frequency(corpus, by_type),
            mean_occurrence: mean_occurrence(corpus, by_type),
            histograms: histograms(corpus, by_type),
            endings: ending_distribution(corpus, by_type),
            transition_matrix: transition_matrix(corpus)?,
            conformance: protocol.map(|p| conformance(corpus, p, by_type)).transpose()?,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Long-format table: `section,group,key,subkey,value`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |section: &str, group: &str, key: &str, subkey: &str, value: String| {
            w.write_record([section, group, key, subkey, &value]).expect("in-memory csv");
        };
        row("section", "group", "key", "subkey", "value".into());
        for (g, counts) in &self.code_frequency.groups {
            for (c, n) in counts {
                row("code_frequency", &g.to_string(), c.as_str(), "", n.to_string());
            }
        }
        for (g, means) in &self.mean_occurrence.groups {
            for (c, m) in means {
                row("mean_occurrence", &g.to_string(), c.as_str(), "", m.to_string());
            }
        }
        for (g, hs) in &self.histograms {
            for (c, h) in hs {
                for (k, n) in &h.buckets {
                    row("histogram", &g.to_string(), c.as_str(), &k.to_string(), n.to_string());
                }
                row("histogram_mode", &g.to_string(), c.as_str(), "", h.mode.to_string());
            }
        }
        for (g, e) in &self.endings {
            for (cat, n) in &e.rows {
                row("ending", &g.to_string(), cat.as_str(), "", n.to_string());
            }
            row(
                "ending_explanation_affirmed",
                &g.to_string(),
                "after_affirmation",
                "",
                e.explanation_after_affirmation.to_string(),
            );
            row(
                "ending_explanation_affirmed",
                &g.to_string(),
                "without_affirmation",
                "",
                e.explanation_without_affirmation.to_string(),
            );
            for (s, n) in &e.suffixes {
                row("ending_suffix", &g.to_string(), s, "", n.to_string());
            }
        }
        for (&(a, b), n) in &self.transition_matrix.counts {
            row("transition", "ALL", a.as_str(), b.as_str(), n.to_string());
        }
        if let Some(c) = &self.conformance {
            for (g, s) in &c.summary {
                let g = g.to_string();
                row("conformance", &g, "dialogs", "", s.dialogs.to_string());
                row("conformance", &g, "accepted", "", s.accepted.to_string());
                row("conformance", &g, "incomplete", "", s.incomplete.to_string());
                row("conformance", &g, "rejected", "", s.rejected.to_string());
                row("conformance", &g, "acceptance_rate", "", s.acceptance_rate.to_string());
                row("conformance", &g, "mean_edit_distance", "", s.mean_edit_distance.to_string());
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is UTF-8")
    }
}
