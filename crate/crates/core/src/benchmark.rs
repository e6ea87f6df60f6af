//! Trains and evaluates a grid of parser configurations.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::conllu::{parse_conllu, serialize_conllu, ConlluError, Treebank};
use crate::eval::{
    attachment_scores, prediction_file_name, AlignmentError, BenchmarkReport, BenchmarkRow, ParserFamily,
    ReportError,
};
use crate::features::{EncoderKind, PosMode};
use crate::graph_parser::{self, BiaffineParser};
use crate::neural::ModelFile;
use crate::parser::ParserError;
use crate::tagger::{AutoPosCache, TaggerError, TaggerModel};
use crate::training::TrainLog;
use crate::transition::{self, SystemKind, TransitionParser};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Conllu { path: PathBuf, source: ConlluError },
    #[error("model file {0} not found")]
    MissingModel(PathBuf),
    #[error("config key `{0}` must name a treebank file")]
    MissingInput(&'static str),
    #[error("model {model}: {source}")]
    Parser { model: String, source: ParserError },
    #[error("tagger: {0}")]
    Tagger(#[from] TaggerError),
    #[error("model {model} on {treebank}: {source}")]
    Alignment { model: String, treebank: String, source: AlignmentError },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchmarkError + '_ {
    move |source| BenchmarkError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn read_treebank(path: &Path) -> Result<Treebank, BenchmarkError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut treebank = parse_conllu(&text).map_err(|source| BenchmarkError::Conllu {
        path: path.to_owned(),
        source,
    })?;
    if let Some(stem) = path.file_stem() {
        treebank.name = stem.to_string_lossy().into_owned();
    }
    Ok(treebank)
}

/// Writes through a temporary file so an interrupted run never leaves a
/// truncated file behind.
pub fn write_file_atomically(path: &Path, bytes: &[u8]) -> Result<(), BenchmarkError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// A trained parser of either family.
#[derive(Clone, Debug)]
pub enum ParserModel {
    Transition(TransitionParser),
    Graph(BiaffineParser),
}

impl ParserModel {
    /// Trains the configured family on `train`, selecting on `dev`.
    pub fn train(
        family: ParserFamily,
        config: &RunConfig,
        pos_mode: PosMode,
        augment: bool,
        train: &Treebank,
        dev: &Treebank,
    ) -> Result<(Self, TrainLog), ParserError> {
        let schedule = config.schedule();
        match family {
            ParserFamily::Graph => {
                let (p, log) = BiaffineParser::train(train, dev, &config.graph_config(pos_mode, augment), &schedule)?;
                Ok((ParserModel::Graph(p), log))
            }
            _ => {
                let system = if family == ParserFamily::TransitionStandard {
                    SystemKind::ArcStandard
                } else {
                    SystemKind::ArcEager
                };
                let cfg = config.transition_config(system, pos_mode, augment);
                let (p, log) = TransitionParser::train(train, dev, &cfg, &schedule)?;
                Ok((ParserModel::Transition(p), log))
            }
        }
    }

    pub fn family(&self) -> ParserFamily {
        match self {
            ParserModel::Graph(_) => ParserFamily::Graph,
            ParserModel::Transition(p) if p.system() == SystemKind::ArcStandard => ParserFamily::TransitionStandard,
            ParserModel::Transition(_) => ParserFamily::TransitionEager,
        }
    }

    pub fn pos_mode(&self) -> PosMode {
        match self {
            ParserModel::Graph(p) => p.encoder.config.pos_mode,
            ParserModel::Transition(p) => p.encoder.config.pos_mode,
        }
    }

    pub fn parse_treebank(&self, treebank: &Treebank) -> Result<Treebank, ParserError> {
        match self {
            ParserModel::Graph(p) => p.parse_treebank(treebank),
            ParserModel::Transition(p) => p.parse_treebank(treebank),
        }
    }

    pub fn to_model_file(&self) -> ModelFile {
        match self {
            ParserModel::Graph(p) => p.to_model_file(),
            ParserModel::Transition(p) => p.to_model_file(),
        }
    }

    /// Reads a model file of either family.
    pub fn from_model_file(file: ModelFile) -> Result<Self, ParserError> {
        let family = file
            .config
            .iter()
            .find(|(k, _)| k == "family")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| ParserError::Model("missing family".into()))?;
        match family.as_str() {
            graph_parser::FAMILY => Ok(ParserModel::Graph(BiaffineParser::from_model_file(file)?)),
            transition::FAMILY => Ok(ParserModel::Transition(TransitionParser::from_model_file(file)?)),
            other => Err(ParserError::Model(format!("not a parser model (family {other:?})"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), BenchmarkError> {
        let mut bytes = Vec::new();
        self.to_model_file()
            .write(&mut bytes)
            .map_err(|e| BenchmarkError::Parser {
                model: path.display().to_string(),
                source: e.into(),
            })?;
        write_file_atomically(path, &bytes)
    }

    pub fn load(path: &Path) -> Result<Self, BenchmarkError> {
        if !path.exists() {
            return Err(BenchmarkError::MissingModel(path.to_owned()));
        }
        let file = File::open(path).map_err(io_err(path))?;
        let model = ModelFile::read(BufReader::new(file))
            .map_err(ParserError::from)
            .and_then(ParserModel::from_model_file);
        model.map_err(|source| BenchmarkError::Parser {
            model: path.display().to_string(),
            source,
        })
    }
}

/// One cell of the configuration grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelSpec {
    pub family: ParserFamily,
    pub encoder: EncoderKind,
    pub augment: bool,
    pub pos_mode: PosMode,
}

impl ModelSpec {
    /// Unique per configuration, e.g. `TSlookupA-gold`.
    pub fn id(&self) -> String {
        format!(
            "{}{}{}-{}",
            self.family.code(),
            self.encoder,
            if self.augment { "A" } else { "" },
            self.pos_mode
        )
    }

    pub fn model_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.model", self.id()))
    }

    /// Parser families × augmentation × POS modes from the config.
    pub fn grid(config: &RunConfig) -> Vec<ModelSpec> {
        let mut specs = Vec::new();
        for &family in &config.grid_parsers {
            for &augment in &config.grid_augment {
                for &pos_mode in &config.grid_pos_modes {
                    specs.push(ModelSpec {
                        family,
                        encoder: config.encoder,
                        augment,
                        pos_mode,
                    });
                }
            }
        }
        specs.sort();
        specs.dedup();
        specs
    }
}

/// A test split with its gold annotation and, for auto-POS models, a copy
/// whose UPOS column comes from the tagger.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub gold: Treebank,
    pub auto: Option<Treebank>,
}

impl TestSet {
    fn input(&self, pos_mode: PosMode) -> &Treebank {
        match (pos_mode, &self.auto) {
            (PosMode::Auto, Some(auto)) => auto,
            _ => &self.gold,
        }
    }
}

/// Parses every test set with every model, writes the predictions to
/// `prediction_dir` and scores them against gold.
pub fn benchmark_matrix(
    specs: &[ModelSpec],
    model_dir: &Path,
    test_sets: &[TestSet],
    prediction_dir: &Path,
) -> Result<BenchmarkReport, BenchmarkError> {
    let mut rows = Vec::new();
    for spec in specs {
        let model = ParserModel::load(&spec.model_path(model_dir))?;
        let id = spec.id();
        for set in test_sets {
            if spec.pos_mode == PosMode::Auto && set.auto.is_none() {
                return Err(BenchmarkError::Tagger(TaggerError::Model(format!(
                    "no auto-tagged copy of {} for {id}",
                    set.gold.name
                ))));
            }
            let treebank = set.gold.name.clone();
            let predicted = model
                .parse_treebank(set.input(spec.pos_mode))
                .map_err(|source| BenchmarkError::Parser { model: id.clone(), source })?;
            let path = prediction_dir.join(prediction_file_name(&id, &treebank));
            write_file_atomically(&path, serialize_conllu(&predicted).as_bytes())?;
            let scores = attachment_scores(&set.gold, &predicted).map_err(|source| BenchmarkError::Alignment {
                model: id.clone(),
                treebank: treebank.clone(),
                source,
            })?;
            rows.push(BenchmarkRow {
                treebank,
                model_id: id.clone(),
                family: spec.family,
                encoder: spec.encoder.to_string(),
                augment: spec.augment,
                pos_mode: spec.pos_mode,
                uas: scores.uas,
                las: scores.las,
            });
        }
    }
    Ok(BenchmarkReport::new(rows)?)
}

/// Where a benchmark run keeps its artefacts.
#[derive(Clone, Debug)]
pub struct RunLayout {
    pub models: PathBuf,
    pub predictions: PathBuf,
    pub auto_pos: PathBuf,
    pub tagger: PathBuf,
    pub report_text: PathBuf,
    pub report_tsv: PathBuf,
}

impl RunLayout {
    pub fn new(output_dir: &Path) -> Self {
        RunLayout {
            models: output_dir.join("models"),
            predictions: output_dir.join("predictions"),
            auto_pos: output_dir.join("auto-pos"),
            tagger: output_dir.join("models").join("tagger.model"),
            report_text: output_dir.join("report.txt"),
            report_tsv: output_dir.join("report.tsv"),
        }
    }
}

/// Input treebanks of a run, as loaded from the config paths.
#[derive(Clone, Debug)]
pub struct RunData {
    pub train: Treebank,
    pub dev: Treebank,
    pub test: Treebank,
}

impl RunData {
    pub fn load(config: &RunConfig) -> Result<Self, BenchmarkError> {
        let load = |key: &'static str, path: &Option<PathBuf>| -> Result<Treebank, BenchmarkError> {
            let path = path.as_ref().ok_or(BenchmarkError::MissingInput(key))?;
            read_treebank(path)
        };
        let train = load("train", &config.train)?;
        let dev = match &config.dev {
            Some(p) => read_treebank(p)?,
            None => Treebank::new("dev", Vec::new()),
        };
        let mut test = load("test", &config.test)?;
        test.name = config.treebank.clone();
        Ok(RunData { train, dev, test })
    }
}

/// Tagger for auto-POS runs: the configured file, or one trained on the
/// training split and kept in the run directory.
fn auto_tagger(config: &RunConfig, data: &RunData, layout: &RunLayout, force: bool) -> Result<TaggerModel, BenchmarkError> {
    let path = config.tagger.clone().unwrap_or_else(|| layout.tagger.clone());
    if path.exists() && (config.tagger.is_some() || !force) {
        let file = File::open(&path).map_err(io_err(&path))?;
        return Ok(TaggerModel::load(BufReader::new(file))?);
    }
    if config.tagger.is_some() {
        return Err(BenchmarkError::MissingModel(path));
    }
    let (tagger, _) = TaggerModel::train(&data.train, &data.dev, &config.tagger_config(), &config.tagger_schedule())?;
    let mut bytes = Vec::new();
    tagger.save(&mut bytes)?;
    write_file_atomically(&path, &bytes)?;
    Ok(tagger)
}

/// Progress events of [`run_benchmark`].
#[derive(Clone, Debug, PartialEq)]
pub enum Progress {
    Reused(String),
    Trained { model: String, summary: String },
}

/// Trains every grid model that has no model file yet (all of them with
/// `force`), then evaluates the whole grid and writes the reports.
pub fn run_benchmark(
    config: &RunConfig,
    force: bool,
    progress: impl Fn(Progress) + Sync,
) -> Result<BenchmarkReport, BenchmarkError> {
    config.validate()?;
    let data = RunData::load(config)?;
    let layout = RunLayout::new(&config.output_dir);
    let specs = ModelSpec::grid(config);

    let auto = if specs.iter().any(|s| s.pos_mode == PosMode::Auto) {
        let tagger = auto_tagger(config, &data, &layout, force)?;
        let cache = AutoPosCache::new(&layout.auto_pos);
        let tag = |tb: &Treebank| cache.get_or_tag(tb, |tb| tagger.tag_treebank(tb));
        Some((tag(&data.train)?, tag(&data.dev)?, tag(&data.test)?))
    } else {
        None
    };

    let pending: Vec<&ModelSpec> = specs
        .iter()
        .filter(|s| {
            let reuse = !force && s.model_path(&layout.models).exists();
            if reuse {
                progress(Progress::Reused(s.id()));
            }
            !reuse
        })
        .collect();
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<BenchmarkError>> = Mutex::new(None);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(spec) = pending.get(i) else { break };
        if failure.lock().map(|f| f.is_some()).unwrap_or(true) {
            break;
        }
        let (train, dev) = match (&auto, spec.pos_mode) {
            (Some((train, dev, _)), PosMode::Auto) => (train, dev),
            _ => (&data.train, &data.dev),
        };
        let result = ParserModel::train(spec.family, config, spec.pos_mode, spec.augment, train, dev)
            .map_err(|source| BenchmarkError::Parser { model: spec.id(), source })
            .and_then(|(model, log)| {
                model.save(&spec.model_path(&layout.models))?;
                Ok(log)
            });
        match result {
            Ok(log) => progress(Progress::Trained {
                model: spec.id(),
                summary: log.summary(),
            }),
            Err(e) => {
                if let Ok(mut f) = failure.lock() {
                    f.get_or_insert(e);
                }
            }
        }
    };
    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(pending.len()).max(1) {
            scope.spawn(&worker);
        }
    });
    if let Some(e) = failure.into_inner().ok().flatten() {
        return Err(e);
    }

    let test_set = TestSet {
        gold: data.test.clone(),
        auto: auto.map(|(_, _, test)| Treebank { name: data.test.name.clone(), ..test }),
    };
    let report = benchmark_matrix(&specs, &layout.models, &[test_set], &layout.predictions)?;
    write_file_atomically(&layout.report_text, report.to_text().as_bytes())?;
    write_file_atomically(&layout.report_tsv, report.to_tsv().as_bytes())?;
    Ok(report)
}

/// Saves `treebank` as CoNLL-U at `path`.
pub fn write_treebank(path: &Path, treebank: &Treebank) -> Result<(), BenchmarkError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    out.write_all(serialize_conllu(treebank).as_bytes())
        .and_then(|_| out.flush())
        .map_err(io_err(path))
}
