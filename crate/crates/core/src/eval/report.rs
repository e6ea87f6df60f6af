use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::features::PosMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParserFamily {
    TransitionStandard,
    TransitionEager,
    Graph,
}

impl ParserFamily {
    pub const ALL: [ParserFamily; 3] = [
        ParserFamily::TransitionStandard,
        ParserFamily::TransitionEager,
        ParserFamily::Graph,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParserFamily::TransitionStandard => "transition-standard",
            ParserFamily::TransitionEager => "transition-eager",
            ParserFamily::Graph => "graph",
        }
    }

    /// Short code used in model ids: TS, TE or G.
    pub fn code(self) -> &'static str {
        match self {
            ParserFamily::TransitionStandard => "TS",
            ParserFamily::TransitionEager => "TE",
            ParserFamily::Graph => "G",
        }
    }

    pub fn is_transition(self) -> bool {
        self != ParserFamily::Graph
    }
}

impl fmt::Display for ParserFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParserFamily {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParserFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == s || f.code() == s)
            .ok_or_else(|| ReportError::UnknownValue(s.to_owned()))
    }
}

/// Design axis along which minimal pairs (or triplets) are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Encoder,
    /// Graph-based against transition-based, taking the higher-LAS
    /// transition system of each standard/eager pair.
    Parser,
    /// Arc-standard against arc-eager; graph rows are ignored.
    TransitionSystem,
    Augmentation,
    PosMode,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Encoder,
        Dimension::Parser,
        Dimension::TransitionSystem,
        Dimension::Augmentation,
        Dimension::PosMode,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Encoder => "encoder",
            Dimension::Parser => "parser",
            Dimension::TransitionSystem => "transition-system",
            Dimension::Augmentation => "augmentation",
            Dimension::PosMode => "pos-mode",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("duplicate model id {model_id:?} for treebank {treebank:?}")]
    DuplicateModel { treebank: String, model_id: String },
    #[error("incomplete grid for {dimension}; missing: {}", missing.join("; "))]
    IncompleteGrid { dimension: Dimension, missing: Vec<String> },
    #[error("no rows to compare for {0}")]
    NoRows(Dimension),
    #[error("unknown value {0:?}")]
    UnknownValue(String),
}

/// Test-set scores of one model on one treebank.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub treebank: String,
    pub model_id: String,
    pub family: ParserFamily,
    pub encoder: String,
    pub augment: bool,
    pub pos_mode: PosMode,
    pub uas: f64,
    pub las: f64,
}

impl BenchmarkRow {
    /// Model name without the POS mode, e.g. `TSlookupA`.
    pub fn config_code(&self) -> String {
        format!("{}{}{}", self.family.code(), self.encoder, if self.augment { "A" } else { "" })
    }

    fn coordinate(&self, dimension: Dimension) -> String {
        match dimension {
            Dimension::Encoder => self.encoder.clone(),
            Dimension::Parser => if self.family.is_transition() { "transition" } else { "graph" }.into(),
            Dimension::TransitionSystem => self.family.code().into(),
            Dimension::Augmentation => if self.augment { "augmented" } else { "plain" }.into(),
            Dimension::PosMode => self.pos_mode.to_string(),
        }
    }

    /// All coordinates except `dimension`.
    fn context(&self, dimension: Dimension) -> String {
        let mut parts = vec![format!("treebank={}", self.treebank)];
        if !matches!(dimension, Dimension::Parser | Dimension::TransitionSystem) {
            parts.push(format!("parser={}", self.family));
        }
        if dimension != Dimension::Encoder {
            parts.push(format!("encoder={}", self.encoder));
        }
        if dimension != Dimension::Augmentation {
            parts.push(format!("augment={}", self.augment));
        }
        if dimension != Dimension::PosMode {
            parts.push(format!("pos={}", self.pos_mode));
        }
        parts.join(",")
    }
}

/// Strict wins of `better` over `worse` across the groups of a dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinCount {
    pub better: String,
    pub worse: String,
    pub uas_wins: usize,
    pub las_wins: usize,
    pub groups: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairAnalysis {
    pub dimension: Dimension,
    /// Models per group: 2 for pairs, 3 for triplets.
    pub group_size: usize,
    pub groups: usize,
    /// Every ordered pair of values.
    pub counts: Vec<WinCount>,
}

impl PairAnalysis {
    pub fn count(&self, better: &str, worse: &str) -> Option<&WinCount> {
        self.counts.iter().find(|c| c.better == better && c.worse == worse)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = if self.group_size == 3 { "triplets" } else { "pairs" };
        let _ = writeln!(out, "{} ({} minimal {kind})", self.dimension, self.groups);
        for c in &self.counts {
            let _ = writeln!(
                out,
                "  {} > {}: UAS {}/{} LAS {}/{}",
                c.better, c.worse, c.uas_wins, c.groups, c.las_wins, c.groups
            );
        }
        out
    }
}

fn check_unique(rows: &[BenchmarkRow]) -> Result<(), ReportError> {
    let mut seen = BTreeSet::new();
    for row in rows {
        if !seen.insert((&row.treebank, &row.model_id)) {
            return Err(ReportError::DuplicateModel {
                treebank: row.treebank.clone(),
                model_id: row.model_id.clone(),
            });
        }
    }
    Ok(())
}

/// Win counts for every ordered pair of values along `dimension`.
///
/// Rows are grouped by all other coordinates; every group must hold every
/// value seen in the grid. Ties count as a win for neither side.
pub fn minimal_pair_report(rows: &[BenchmarkRow], dimension: Dimension) -> Result<PairAnalysis, ReportError> {
    check_unique(rows)?;
    let rows: Vec<&BenchmarkRow> = rows
        .iter()
        .filter(|r| dimension != Dimension::TransitionSystem || r.family.is_transition())
        .collect();
    if rows.is_empty() {
        return Err(ReportError::NoRows(dimension));
    }
    let values: BTreeSet<String> = rows.iter().map(|r| r.coordinate(dimension)).collect();
    let mut groups: BTreeMap<String, BTreeMap<String, Vec<&BenchmarkRow>>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry(row.context(dimension))
            .or_default()
            .entry(row.coordinate(dimension))
            .or_default()
            .push(row);
    }

    let mut missing = Vec::new();
    let mut scores: Vec<BTreeMap<&str, (f64, f64)>> = Vec::new();
    for (context, members) in &groups {
        let mut group = BTreeMap::new();
        for value in &values {
            match members.get(value) {
                Some(candidates) => {
                    let pick = select(dimension, candidates);
                    if dimension == Dimension::Parser && value == "transition" && candidates.len() != 2 {
                        missing.push(format!("{context},parser=transition (need both systems)"));
                    }
                    group.insert(value.as_str(), (pick.uas, pick.las));
                }
                None => missing.push(format!("{context},{dimension}={value}")),
            }
        }
        scores.push(group);
    }
    if !missing.is_empty() {
        return Err(ReportError::IncompleteGrid { dimension, missing });
    }

    let mut counts = Vec::new();
    for a in &values {
        for b in &values {
            if a == b {
                continue;
            }
            let (mut uas_wins, mut las_wins) = (0, 0);
            for group in &scores {
                let (x, y) = (group[a.as_str()], group[b.as_str()]);
                uas_wins += usize::from(x.0 > y.0);
                las_wins += usize::from(x.1 > y.1);
            }
            counts.push(WinCount {
                better: a.clone(),
                worse: b.clone(),
                uas_wins,
                las_wins,
                groups: scores.len(),
            });
        }
    }
    Ok(PairAnalysis {
        dimension,
        group_size: values.len(),
        groups: scores.len(),
        counts,
    })
}

/// The row standing for a value: the higher-LAS transition model when
/// standard and eager are collapsed (standard on ties), otherwise the only row.
fn select<'a>(dimension: Dimension, candidates: &[&'a BenchmarkRow]) -> &'a BenchmarkRow {
    if dimension != Dimension::Parser {
        return candidates[0];
    }
    candidates
        .iter()
        .copied()
        .fold(candidates[0], |best, r| if r.las > best.las { r } else { best })
}

/// Scores of a model grid plus the minimal-pair analyses that apply to it.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub analyses: Vec<PairAnalysis>,
    /// Analyses skipped because the grid does not vary along them.
    pub skipped: Vec<(Dimension, String)>,
}

impl BenchmarkReport {
    /// Runs every analysis the grid supports.
    pub fn new(rows: Vec<BenchmarkRow>) -> Result<Self, ReportError> {
        check_unique(&rows)?;
        let mut analyses = Vec::new();
        let mut skipped = Vec::new();
        for dimension in Dimension::ALL {
            match minimal_pair_report(&rows, dimension) {
                Ok(a) if a.group_size >= 2 => analyses.push(a),
                Ok(_) => skipped.push((dimension, "only one value in the grid".to_owned())),
                Err(e) => skipped.push((dimension, e.to_string())),
            }
        }
        Ok(BenchmarkReport {
            rows,
            analyses,
            skipped,
        })
    }

    pub fn analysis(&self, dimension: Dimension) -> Option<&PairAnalysis> {
        self.analyses.iter().find(|a| a.dimension == dimension)
    }

    fn columns(&self) -> Vec<(String, PosMode)> {
        let treebanks: BTreeSet<&str> = self.rows.iter().map(|r| r.treebank.as_str()).collect();
        let modes: BTreeSet<PosMode> = self.rows.iter().map(|r| r.pos_mode).collect();
        treebanks
            .into_iter()
            .flat_map(|t| modes.iter().map(move |&m| (t.to_owned(), m)))
            .collect()
    }

    fn grid(&self) -> (Vec<String>, BTreeMap<(String, String, PosMode), (f64, f64)>) {
        let mut configs: Vec<String> = Vec::new();
        let mut cells = BTreeMap::new();
        for r in &self.rows {
            let code = r.config_code();
            if !configs.contains(&code) {
                configs.push(code.clone());
            }
            cells.insert((code, r.treebank.clone(), r.pos_mode), (r.uas, r.las));
        }
        (configs, cells)
    }

    /// Aligned text: one line per model configuration, UAS and LAS per
    /// (treebank, POS mode), followed by the analyses.
    pub fn to_text(&self) -> String {
        let columns = self.columns();
        let (configs, cells) = self.grid();
        let width = configs.iter().map(String::len).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "# UAS/LAS over all tokens (punctuation included)");
        let _ = write!(out, "{:<width$}", "model");
        for (tb, mode) in &columns {
            let _ = write!(out, " {:>15}", format!("{tb}/{mode}"));
        }
        out.push('\n');
        let _ = write!(out, "{:<width$}", "");
        for _ in &columns {
            let _ = write!(out, " {:>7} {:>7}", "UAS", "LAS");
        }
        out.push('\n');
        for code in &configs {
            let _ = write!(out, "{code:<width$}");
            for (tb, mode) in &columns {
                match cells.get(&(code.clone(), tb.clone(), *mode)) {
                    Some((u, l)) => {
                        let _ = write!(out, " {u:>7.2} {l:>7.2}");
                    }
                    None => {
                        let _ = write!(out, " {:>7} {:>7}", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        for analysis in &self.analyses {
            out.push('\n');
            out.push_str(&analysis.to_text());
        }
        for (dimension, reason) in &self.skipped {
            let _ = writeln!(out, "\n{dimension}: not analysed ({reason})");
        }
        out
    }

    /// Tab-separated rows followed by tab-separated win counts.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("treebank\tmodel_id\tparser\tencoder\taugment\tpos_mode\tuas\tlas\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}",
                r.treebank, r.model_id, r.family, r.encoder, r.augment, r.pos_mode, r.uas, r.las
            );
        }
        out.push_str("\ndimension\tbetter\tworse\tuas_wins\tlas_wins\tgroups\n");
        for a in &self.analyses {
            for c in &a.counts {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    a.dimension, c.better, c.worse, c.uas_wins, c.las_wins, c.groups
                );
            }
        }
        out
    }
}

/// File name of a model's test-set predictions.
pub fn prediction_file_name(model_id: &str, treebank: &str) -> String {
    format!("{model_id}.{treebank}.test.pred.conllu")
}
