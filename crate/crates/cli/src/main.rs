use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use depparse::benchmark::{read_treebank, run_benchmark, write_file_atomically, ParserModel, Progress};
use depparse::config::RunConfig;
use depparse::conllu::{serialize_conllu, validate_tree, Treebank};
use depparse::eval::attachment_scores;
use depparse::features::PosMode;
use depparse::tagger::TaggerModel;
use depparse::tools::{agreement, extract_trees, filter_trees, stratified_split, SplitSpec};

#[derive(Parser)]
#[command(name = "depparse", version, about = "Dependency treebank tools, parsers and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every tree against the well-formedness rules.
    Validate {
        input: PathBuf,
    },
    /// Split paragraph annotations into single-rooted trees.
    Extract {
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Stratified train/dev/test split.
    Split {
        input: PathBuf,
        #[arg(long, default_value = "8:1:1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        min_label_count: usize,
        /// Defaults to the input's directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Inter-annotator agreement between two annotations of one corpus.
    Agreement {
        first: PathBuf,
        second: PathBuf,
        /// `table` or `kv`.
        #[arg(long, default_value = "table")]
        format: String,
    },
    TrainTagger {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Fill the UPOS column with predicted tags.
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    TrainParser {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        output: PathBuf,
    },
    Parse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Required for models trained with automatic POS tags.
        #[arg(long)]
        tagger: Option<PathBuf>,
    },
    /// UAS and LAS of predictions against gold trees.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Train (or reuse) every model of the grid and write the report.
    Benchmark {
        #[arg(long)]
        grid: PathBuf,
        /// Retrain models that already have a model file.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Config file plus flag overrides.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    parser: Option<String>,
    #[arg(long)]
    pos_mode: Option<String>,
    #[arg(long)]
    augment: Option<bool>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tagger: Option<PathBuf>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => RunConfig::parse("")?,
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let overrides = [
            ("train", path(&self.train)),
            ("dev", path(&self.dev)),
            ("parser", self.parser.clone()),
            ("pos_mode", self.pos_mode.clone()),
            ("augment", self.augment.map(|b| b.to_string())),
            ("epochs", self.epochs.map(|e| e.to_string())),
            ("seed", self.seed.map(|s| s.to_string())),
            ("tagger", path(&self.tagger)),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.set(key, &value)?;
            }
        }
        for item in &self.set {
            let Some((key, value)) = item.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {item:?}");
            };
            if !RunConfig::KEYS.contains(&key.trim()) {
                bail!("unknown config key {:?}", key.trim());
            }
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn load_tagger(path: &Path) -> Result<TaggerModel> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    TaggerModel::load(BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
}

fn parse_ratios(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad ratios {text:?}"))?;
    let total: f64 = parts.iter().sum();
    if parts.len() != 3 || !(total > 0.0) {
        bail!("--ratios expects three parts like 8:1:1, got {text:?}");
    }
    Ok([parts[0] / total, parts[1] / total, parts[2] / total])
}

fn training_pair(config: &RunConfig) -> Result<(Treebank, Treebank)> {
    let train = read_treebank(config.train.as_deref().context("no training file (--train or `train =`)")?)?;
    let dev = match &config.dev {
        Some(path) => read_treebank(path)?,
        None => Treebank::new("dev", Vec::new()),
    };
    Ok((train, dev))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { input } => {
            let treebank = read_treebank(&input)?;
            let mut invalid = 0;
            let mut out = String::new();
            for (i, tree) in treebank.trees.iter().enumerate() {
                let id = tree.comment_value("sent_id").map(str::to_owned).unwrap_or_else(|| (i + 1).to_string());
                let report = validate_tree(tree);
                if report.is_valid() {
                    out.push_str(&format!("{id}\tOK\n"));
                } else {
                    invalid += 1;
                    for v in &report.violations {
                        let token = v.token.map(|t| format!(" token {t}")).unwrap_or_default();
                        out.push_str(&format!("{id}\t{}{token}\t{}\n", v.rule.id(), v.message));
                    }
                }
            }
            out.push_str(&format!("{} trees, {} invalid\n", treebank.len(), invalid));
            emit(None, &out)?;
            Ok(if invalid == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Extract { input, output } => {
            let paragraphs = read_treebank(&input)?;
            let trees: Vec<_> = paragraphs.trees.iter().flat_map(extract_trees).collect();
            let (kept, discarded) = filter_trees(trees);
            for d in &discarded {
                let rules: Vec<&str> = d.rules.iter().map(|r| r.id()).collect();
                eprintln!("discarded tree ({}): {}", rules.join(","), d.tree.forms().join(" "));
            }
            eprintln!("{} trees kept, {} discarded", kept.len(), discarded.len());
            emit(output.as_deref(), &serialize_conllu(&Treebank::new(paragraphs.name, kept)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Split {
            input,
            ratios,
            seed,
            min_label_count,
            output_dir,
        } => {
            let treebank = read_treebank(&input)?;
            let spec = SplitSpec {
                ratios: parse_ratios(&ratios)?,
                seed,
                min_label_count,
            };
            let split = stratified_split(&treebank, &spec)?;
            let dir = output_dir.unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "treebank".into());
            for (part, tb) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
                let path = dir.join(format!("{stem}.{part}.conllu"));
                write_file_atomically(&path, serialize_conllu(tb).as_bytes())?;
                println!("{}\t{} trees", path.display(), tb.len());
            }
            for w in &split.warnings {
                eprintln!("warning: {w}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Agreement { first, second, format } => {
            let result = agreement(&read_treebank(&first)?, &read_treebank(&second)?)?;
            match format.as_str() {
                "table" => emit(None, &result.to_table())?,
                "kv" => emit(None, &result.to_key_values())?,
                other => bail!("unknown format {other:?} (table or kv)"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::TrainTagger { run, output } => {
            let config = run.load()?;
            let (train, dev) = training_pair(&config)?;
            let (tagger, log) = TaggerModel::train(&train, &dev, &config.tagger_config(), &config.tagger_schedule())?;
            eprint!("{}", log.summary());
            let mut bytes = Vec::new();
            tagger.save(&mut bytes)?;
            write_file_atomically(&output, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tag { model, input, output } => {
            let tagger = load_tagger(&model)?;
            let tagged = tagger.tag_treebank(&read_treebank(&input)?)?;
            emit(output.as_deref(), &serialize_conllu(&tagged))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TrainParser { run, output } => {
            let config = run.load()?;
            let (mut train, mut dev) = training_pair(&config)?;
            if config.pos_mode == PosMode::Auto {
                let path = config.tagger.as_deref().context("pos_mode = auto needs a tagger (--tagger)")?;
                let tagger = load_tagger(path)?;
                train = tagger.tag_treebank(&train)?;
                dev = tagger.tag_treebank(&dev)?;
            }
            let (model, log) = ParserModel::train(config.parser, &config, config.pos_mode, config.augment, &train, &dev)?;
            eprint!("{}", log.summary());
            model.save(&output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Parse {
            model,
            input,
            output,
            tagger,
        } => {
            let parser = ParserModel::load(&model)?;
            let mut treebank = read_treebank(&input)?;
            if parser.pos_mode() == PosMode::Auto {
                let path = tagger.context("this model was trained on automatic POS tags; pass --tagger")?;
                treebank = load_tagger(&path)?.tag_treebank(&treebank)?;
            }
            let parsed = parser.parse_treebank(&treebank)?;
            emit(output.as_deref(), &serialize_conllu(&parsed))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { gold, pred } => {
            let scores = attachment_scores(&read_treebank(&gold)?, &read_treebank(&pred)?)?;
            println!("UAS {:.2} LAS {:.2}", scores.uas, scores.las);
            Ok(ExitCode::SUCCESS)
        }
        Command::Benchmark {
            grid,
            force,
            output_dir,
            seed,
        } => {
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let mut config = RunConfig::parse(&text).with_context(|| format!("in {}", grid.display()))?;
            let base = grid.parent().unwrap_or(Path::new(""));
            for path in [&mut config.train, &mut config.dev, &mut config.test, &mut config.tagger]
                .into_iter()
                .flatten()
            {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            match output_dir {
                Some(dir) => config.output_dir = dir,
                None if config.output_dir.is_relative() => config.output_dir = base.join(&config.output_dir),
                None => {}
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let report = run_benchmark(&config, force, |event| match event {
                Progress::Reused(id) => eprintln!("{id}: reusing existing model"),
                Progress::Trained { model, .. } => eprintln!("{model}: trained"),
            })?;
            print!("{}", report.to_text());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use depparse::eval::ParserFamily;

    #[test]
    fn ratios_are_normalised() {
        assert_eq!(parse_ratios("8:1:1").unwrap(), [0.8, 0.1, 0.1]);
        assert!(parse_ratios("8:1").is_err());
        assert!(parse_ratios("a:b:c").is_err());
    }

    #[test]
    fn family_names_parse() {
        assert_eq!("graph".parse::<ParserFamily>().unwrap(), ParserFamily::Graph);
    }
}
