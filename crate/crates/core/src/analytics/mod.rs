//! Corpus statistics and protocol conformance.
//!
//! Every statistic is a pure fold over a parsed [`Corpus`](crate::corpus::Corpus).
//! Grouped tables always carry an `ALL` group first, followed by the dialog
//! types present in the corpus.

mod conformance;
mod report;
mod stats;

pub use conformance::{conformance, edit_distance, ConformanceReport, ConformanceSummary, DialogConformance};
pub use report::{AnalyticsReport, REPORT_NOTES};
pub use stats::{
    code_frequency, ending_distribution, groups, histograms, mean_occurrence, occurrence_histogram,
    occurrence_histogram_named, transition_matrix, CodeCounts, Decimal, EndingCategory, EndingDistribution,
    EndingTable, FrequencyTable, Group, HistogramTable, MeanTable, OccurrenceHistogram, TransitionMatrix,
};
