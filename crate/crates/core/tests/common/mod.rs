//! Published scores of the 72-model grid (two treebanks, three POS modes),
//! transcribed as UAS/LAS pairs.

#![allow(dead_code)]

use depparse::eval::{BenchmarkRow, ParserFamily};
use depparse::features::PosMode;

/// Per row: gold, auto, none on the first treebank, then the same on the second.
const GRID: [(&str, [f64; 12]); 12] = [
    ("TSW", [88.14, 80.39, 85.28, 76.65, 85.6, 75.45, 89.47, 82.6, 86.27, 76.22, 86.59, 76.81]),
    ("TSWA", [88.83, 82.23, 88.14, 80.2, 86.25, 76.6, 89.82, 83.18, 86.59, 76.52, 86.8, 76.87]),
    ("TEW", [87.4, 80.53, 88.0, 79.6, 84.54, 75.03, 89.2, 82.27, 86.33, 76.53, 86.02, 76.02]),
    ("TEWA", [88.42, 81.91, 87.77, 80.39, 86.39, 78.08, 89.41, 82.62, 86.24, 76.7, 86.37, 76.55]),
    ("TSP", [89.57, 82.33, 87.91, 79.51, 84.73, 75.27, 90.15, 83.57, 87.05, 77.6, 87.19, 77.64]),
    ("TSPA", [89.43, 83.48, 88.28, 80.94, 85.65, 76.7, 90.04, 83.74, 87.26, 77.55, 87.09, 77.68]),
    ("TEP", [89.11, 82.6, 88.92, 80.48, 86.48, 78.17, 89.93, 83.42, 86.82, 77.09, 86.54, 77.07]),
    ("TEPA", [89.39, 83.76, 88.37, 81.17, 87.45, 79.51, 89.77, 83.42, 87.0, 77.68, 86.76, 77.61]),
    ("GW", [85.97, 80.43, 83.43, 76.6, 84.36, 77.34, 86.33, 79.64, 84.25, 74.59, 84.77, 74.41]),
    ("GWA", [87.82, 82.69, 86.29, 79.79, 83.8, 76.14, 87.99, 81.01, 81.44, 71.5, 85.62, 75.53]),
    ("GP", [89.29, 84.82, 88.42, 82.19, 87.91, 81.68, 88.75, 82.25, 85.73, 76.12, 86.4, 76.56]),
    ("GPA", [89.8, 84.91, 88.65, 82.6, 88.74, 82.05, 89.48, 82.98, 86.03, 76.4, 85.84, 76.14]),
];

pub fn published_grid() -> Vec<BenchmarkRow> {
    let mut rows = Vec::new();
    for (code, scores) in GRID {
        let family = match &code[..2] {
            "TS" => ParserFamily::TransitionStandard,
            "TE" => ParserFamily::TransitionEager,
            _ => ParserFamily::Graph,
        };
        let rest = code.trim_start_matches(['T', 'S', 'E', 'G']);
        let encoder = &rest[..1];
        let augment = rest.ends_with('A');
        let columns = ["treebank-a", "treebank-b"]
            .into_iter()
            .flat_map(|tb| [PosMode::Gold, PosMode::Auto, PosMode::None].map(|m| (tb, m)));
        for (i, (treebank, pos_mode)) in columns.enumerate() {
            rows.push(BenchmarkRow {
                treebank: treebank.into(),
                model_id: format!("{code}-{pos_mode}"),
                family,
                encoder: encoder.into(),
                augment,
                pos_mode,
                uas: scores[2 * i],
                las: scores[2 * i + 1],
            });
        }
    }
    rows
}
