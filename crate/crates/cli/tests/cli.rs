use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use depparse::conllu::{parse_conllu, serialize_conllu, Tree, Treebank};
use depparse::synthetic::toy_treebank;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("depparse-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn depparse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depparse")).args(args).output().unwrap()
}

fn write(path: &Path, tb: &Treebank) -> String {
    fs::write(path, serialize_conllu(tb)).unwrap();
    path.display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn eval_of_identical_files() {
    let dir = scratch("eval");
    let gold = write(&dir.join("g.conllu"), &toy_treebank("g", 5, 1));
    let out = depparse(&["eval", "--gold", &gold, "--pred", &gold]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "UAS 100.00 LAS 100.00");

    let other = write(&dir.join("o.conllu"), &toy_treebank("o", 5, 2));
    let out = depparse(&["eval", "--gold", &gold, "--pred", &other]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sentence"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn split_sizes() {
    let dir = scratch("split");
    let input = write(&dir.join("in.conllu"), &toy_treebank("in", 100, 4));
    let out = depparse(&["split", "--ratios", "8:1:1", "--seed", "7", &input]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sizes: Vec<usize> = ["train", "dev", "test"]
        .iter()
        .map(|p| parse_conllu(&fs::read_to_string(dir.join(format!("in.{p}.conllu"))).unwrap()).unwrap().len())
        .collect();
    assert_eq!(sizes, [80, 10, 10]);
    let first = fs::read_to_string(dir.join("in.train.conllu")).unwrap();
    assert!(depparse(&["split", "--ratios", "8:1:1", "--seed", "7", &input]).status.success());
    assert_eq!(fs::read_to_string(dir.join("in.train.conllu")).unwrap(), first);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(depparse(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(depparse(&["eval", "--gold"]).status.code(), Some(2));
    assert_eq!(depparse(&["eval", "--bogus", "x"]).status.code(), Some(2));
    assert_eq!(depparse(&[]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_1() {
    let dir = scratch("data");
    let missing = dir.join("nope.conllu").display().to_string();
    assert_eq!(depparse(&["validate", &missing]).status.code(), Some(1));
    let bad_config = dir.join("bad.cfg");
    fs::write(&bad_config, "colour = blue\n").unwrap();
    let out = depparse(&["benchmark", "--grid", &bad_config.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn validate_reports_rules() {
    let dir = scratch("validate");
    let good = write(&dir.join("good.conllu"), &toy_treebank("g", 3, 1));
    let out = depparse(&["validate", &good]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("3 trees, 0 invalid"));

    // Two roots violate the single-root rule.
    let bad = write(&dir.join("bad.conllu"), &Treebank::new("b", vec![Tree::from_heads(&[0, 0], &["root", "root"])]));
    let out = depparse(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("1 invalid"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn extract_and_agreement() {
    let dir = scratch("extract");
    let tb = toy_treebank("p", 4, 9);
    let input = write(&dir.join("p.conllu"), &tb);
    let output = dir.join("trees.conllu").display().to_string();
    assert!(depparse(&["extract", &input, "--output", &output]).status.success());
    assert_eq!(parse_conllu(&fs::read_to_string(&output).unwrap()).unwrap().len(), 4);

    let out = depparse(&["agreement", &input, &output, "--format", "kv"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("labeled_agreement=1.000000"));
    fs::remove_dir_all(dir).unwrap();
}

const TINY: &[&str] = &[
    "--set", "word_dim=8", "--set", "pos_dim=4", "--set", "hidden_dim=8", "--set", "arc_dim=8",
    "--set", "label_dim=4", "--set", "supertoken_dim=4",
];

#[test]
fn tagger_and_parser_round_trip() {
    let dir = scratch("train");
    let train = write(&dir.join("train.conllu"), &toy_treebank("train", 30, 1));
    let test_tb = toy_treebank("test", 5, 2);
    let test = write(&dir.join("test.conllu"), &test_tb);
    let tagger = dir.join("tagger.model").display().to_string();
    let mut args = vec!["train-tagger", "--train", &train, "--epochs", "2", "--output", &tagger];
    args.extend_from_slice(TINY);
    let out = depparse(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let tagged = dir.join("tagged.conllu").display().to_string();
    assert!(depparse(&["tag", "--model", &tagger, "--input", &test, "--output", &tagged]).status.success());
    assert!(fs::read_to_string(&tagged).unwrap().contains("# upos_source = auto"));

    for (parser, pos) in [("graph", "gold"), ("transition-eager", "auto"), ("transition-standard", "none")] {
        let model = dir.join(format!("{parser}.model")).display().to_string();
        let mut args = vec![
            "train-parser", "--train", &train, "--parser", parser, "--pos-mode", pos, "--epochs", "1",
            "--tagger", &tagger, "--output", &model,
        ];
        args.extend_from_slice(TINY);
        let out = depparse(&args);
        assert!(out.status.success(), "{parser}: {}", String::from_utf8_lossy(&out.stderr));

        let pred = dir.join(format!("{parser}.pred.conllu")).display().to_string();
        let mut args = vec!["parse", "--model", &model, "--input", &test, "--output", &pred];
        if pos == "auto" {
            assert_eq!(depparse(&args).status.code(), Some(1), "auto model without tagger");
            args.extend_from_slice(&["--tagger", &tagger]);
        }
        assert!(depparse(&args).status.success());
        let first = fs::read(&pred).unwrap();
        assert!(depparse(&args).status.success());
        assert_eq!(fs::read(&pred).unwrap(), first, "parsing is deterministic");
        let out = depparse(&["eval", "--gold", &test, "--pred", &pred]);
        assert!(stdout(&out).starts_with("UAS "));
    }
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn benchmark_grid_trains_then_resumes() {
    let dir = scratch("bench");
    for (split, n, seed) in [("train", 30, 1), ("dev", 5, 2), ("test", 8, 3)] {
        write(&dir.join(format!("{split}.conllu")), &toy_treebank(split, n, seed));
    }
    let grid = dir.join("grid.cfg");
    fs::write(
        &grid,
        "# desk grid: 3 parsers x 2 augment x 2 pos modes\n\
         treebank = toy\ntrain = train.conllu\ndev = dev.conllu\ntest = test.conllu\noutput_dir = out\n\
         word_dim = 8\npos_dim = 4\nsupertoken_dim = 4\nhidden_dim = 8\narc_dim = 8\nlabel_dim = 4\nepochs = 1\nworkers = 2\n",
    )
    .unwrap();
    let grid = grid.display().to_string();
    let out = depparse(&["benchmark", "--grid", &grid]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("punctuation included"));
    let predictions = fs::read_dir(dir.join("out/predictions")).unwrap().count();
    assert_eq!(predictions, 12);
    assert!(dir.join("out/report.tsv").exists());

    let again = depparse(&["benchmark", "--grid", &grid]);
    assert!(again.status.success());
    assert_eq!(String::from_utf8_lossy(&again.stderr).matches("reusing").count(), 12);
    assert_eq!(stdout(&again), text);
    fs::remove_dir_all(dir).unwrap();
}
