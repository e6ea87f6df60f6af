//! Attachment scoring and benchmark reporting.

mod report;
mod scores;

pub use report::{
    minimal_pair_report, prediction_file_name, BenchmarkReport, BenchmarkRow, Dimension, PairAnalysis,
    ParserFamily, ReportError, WinCount,
};
pub use scores::{attachment_scores, AlignmentError, AttachmentScores};
