mod common;

use depparse::eval::{minimal_pair_report, BenchmarkReport, Dimension};

fn wins(dimension: Dimension, better: &str, worse: &str) -> (usize, usize, usize) {
    let analysis = minimal_pair_report(&common::published_grid(), dimension).unwrap();
    let c = analysis.count(better, worse).unwrap();
    (c.uas_wins, c.las_wins, c.groups)
}

#[test]
fn grid_has_72_rows() {
    assert_eq!(common::published_grid().len(), 72);
}

#[test]
fn encoder_pairs() {
    assert_eq!(wins(Dimension::Encoder, "P", "W"), (34, 35, 36));
}

#[test]
fn augmentation_pairs() {
    assert_eq!(wins(Dimension::Augmentation, "augmented", "plain"), (26, 31, 36));
}

#[test]
fn transition_system_pairs() {
    assert_eq!(wins(Dimension::TransitionSystem, "TS", "TE"), (17, 11, 24));
}

#[test]
fn parser_pairs_use_the_better_transition_system() {
    assert_eq!(wins(Dimension::Parser, "transition", "graph"), (19, 16, 24));
}

#[test]
fn pos_triplets() {
    assert_eq!(wins(Dimension::PosMode, "gold", "none"), (24, 24, 24));
    assert_eq!(wins(Dimension::PosMode, "gold", "auto"), (23, 24, 24));
    assert_eq!(wins(Dimension::PosMode, "auto", "none"), (14, 17, 24));
}

#[test]
fn full_report_covers_every_dimension() {
    let report = BenchmarkReport::new(common::published_grid()).unwrap();
    assert_eq!(report.analyses.len(), 5);
    assert!(report.skipped.is_empty());
    let text = report.to_text();
    assert!(text.contains("TSWA"));
    assert!(text.contains("P > W: UAS 34/36 LAS 35/36"), "{text}");
}
