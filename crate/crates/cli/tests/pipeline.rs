use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irony_core::ensemble::{unweighted_average, PosteriorFile};
use irony_core::synthetic::fixture_tweets;

const SMALL: &str = "\
word.embed_dim = 16
word.lstm_size = 8
char.embed_dim = 8
char.lstm_size = 8
train.max_epochs = 3
train.patience = 2
skipgram.dim = 16
skipgram.min_count = 1
skipgram.epochs = 2
";

fn irony(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irony"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = irony(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let lines = fixture_tweets(200, 1);
    fs::write(dir.path().join("train.tsv"), lines[..160].join("\n") + "\n").unwrap();
    fs::write(dir.path().join("test.tsv"), lines[160..].join("\n") + "\n").unwrap();
    fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    dir
}

/// Runs every stage and returns the produced files by name.
fn run_pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let c = ["--config", "small.cfg"];
    let with = |rest: &[&'static str]| -> Vec<&'static str> { c.iter().copied().chain(rest.iter().copied()).collect() };
    ok(dir, &with(&["stats-build", "--input", "train.tsv", "--output", "stats.tsv"]));
    ok(dir, &with(&["preprocess", "--input", "train.tsv", "--output", "train.pre.tsv"]));
    ok(dir, &with(&["embed-train", "--preprocess", "--input", "train.tsv", "--output", "emb.txt"]));
    ok(dir, &with(&["train", "--level", "word", "--input", "train.tsv", "--embeddings", "emb.txt", "--output", "word"]));
    ok(dir, &with(&["train", "--level", "char", "--input", "train.tsv", "--output", "char"]));
    for m in ["word", "char"] {
        let post = format!("{m}.post");
        let leak = |s: String| -> &'static str { Box::leak(s.into_boxed_str()) };
        ok(dir, &with(&["predict", "--model", m, "--input", "test.tsv", "--output", leak(post)]));
    }
    ok(dir, &with(&["ensemble", "--mode", "ua", "--output", "ua.pred", "word.post", "char.post"]));
    ok(dir, &with(&["ensemble", "--mode", "mv", "--output", "mv.pred", "word.post", "char.post"]));
    ok(dir, &with(&["evaluate", "--gold", "test.tsv", "--predictions", "ua.pred", "--name", "ua", "--output", "ua.txt"]));
    ok(dir, &with(&["attention-html", "--model", "word", "--input", "test.tsv", "--output", "att.html", "--limit", "5"]));
    ok(dir, &with(&["baseline", "--kind", "bow", "--input", "train.tsv", "--test", "test.tsv", "--output", "bow.pred"]));
    ok(dir, &with(&["baseline", "--kind", "nbow", "--input", "train.tsv", "--test", "test.tsv", "--embeddings", "emb.txt", "--output", "nbow.pred"]));

    let mut names: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    names
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn fixture_pipeline_is_complete_and_reproducible() {
    let a = setup();
    let first = run_pipeline(a.path());
    for f in ["stats.tsv", "emb.txt", "word.bin", "char.manifest", "word.post", "ua.pred", "mv.pred", "att.html", "bow.pred", "nbow.pred"] {
        assert!(first.iter().any(|(n, _)| n == f), "missing {f}");
    }
    let table = String::from_utf8(first.iter().find(|(n, _)| n == "ua.txt").unwrap().1.clone()).unwrap();
    assert!(table.starts_with("model") && table.contains("Acc") && table.contains("F1"), "{table}");
    let html = String::from_utf8(first.iter().find(|(n, _)| n == "att.html").unwrap().1.clone()).unwrap();
    assert!(html.contains("rgba(220, 40, 40, 1.0000)"));
    let preds = String::from_utf8(first.iter().find(|(n, _)| n == "ua.pred").unwrap().1.clone()).unwrap();
    assert_eq!(preds.lines().count(), 40);

    let b = setup();
    let second = run_pipeline(b.path());
    assert_eq!(first.len(), second.len());
    for ((n1, d1), (n2, d2)) in first.iter().zip(&second) {
        assert_eq!(n1, n2);
        assert!(d1 == d2, "{n1} differs between runs");
    }
}

#[test]
fn ensemble_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let posts = [
        vec![vec![0.7, 0.3], vec![0.2, 0.8], vec![0.5, 0.5]],
        vec![vec![0.4, 0.6], vec![0.6, 0.4], vec![0.3, 0.7]],
    ];
    for (k, p) in posts.iter().enumerate() {
        let f = PosteriorFile {
            ids: vec!["a".into(), "b".into(), "c".into()],
            probs: p.clone(),
        };
        f.save(&dir.path().join(format!("{k}.post"))).unwrap();
    }
    ok(dir.path(), &["ensemble", "--mode", "ua", "--output", "out", "0.post", "1.post"]);
    let got = fs::read_to_string(dir.path().join("out")).unwrap();
    let want: String = ["a", "b", "c"]
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let (c, _) = unweighted_average(&[&posts[0][i], &posts[1][i]]).unwrap();
            format!("{id}\t{c}\n")
        })
        .collect();
    assert_eq!(got, want);
}

#[test]
fn embedding_dimension_mismatch_is_reported() {
    let dir = setup();
    fs::write(dir.path().join("emb.txt"), "2 3\na 0.1 0.2 0.3\nb 0.3 0.2 0.1\n").unwrap();
    let out = irony(dir.path(), &["train", "--level", "word", "--input", "train.tsv", "--embeddings", "emb.txt", "--output", "m"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("300") && err.contains('3'), "{err}");
}

#[test]
fn bad_label_exits_nonzero_with_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.tsv"), "1\t0\tfine\n2\t7\tbad\n").unwrap();
    let out = irony(dir.path(), &["preprocess", "--input", "d.tsv", "--output", "o"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("d.tsv:2"), "{err}");
}

#[test]
fn config_defaults_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = irony(dir.path(), &["config-defaults"]);
    assert!(out.status.success());
    fs::write(dir.path().join("c.cfg"), &out.stdout).unwrap();
    let again = irony(dir.path(), &["--config", "c.cfg", "config-defaults"]);
    assert_eq!(out.stdout, again.stdout);
}
