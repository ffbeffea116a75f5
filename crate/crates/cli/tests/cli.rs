use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn charprobe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charprobe"))
        .current_dir(dir)
        .env("CHARPROBE_THREADS", "1")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = charprobe(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Small deterministic corpus: 200 documents over a few hundred word types.
fn write_corpus(dir: &Path) {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move |n: u64| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state % n
    };
    let words: Vec<String> = (0..400)
        .map(|_| {
            let len = 2 + next(6);
            (0..len).map(|_| (b'a' + next(26) as u8) as char).collect()
        })
        .collect();
    let mut text = String::new();
    for _ in 0..200 {
        let doc: Vec<&str> = (0..50).map(|_| words[next(400) as usize].as_str()).collect();
        text.push_str(&doc.join(" "));
        text.push('\n');
    }
    fs::write(dir.join("corpus.txt"), text).unwrap();
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = charprobe(dir.path(), &["verify-conditions", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = charprobe(dir.path(), &["--seed", "1", "verify-conditions", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_conditions_finds_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["--seed", "11", "verify-conditions", "--alphabet", "4", "--trials", "100000", "--out", "cond"],
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!(row.ends_with(",100000,0"), "{row}");
    }
    assert!(dir.path().join("cond/conditions.csv").exists());
    assert!(dir.path().join("cond/manifest.json").exists());
}

#[test]
fn tcs_tokenization_splits_at_consonant_vowel_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "she enterprise\n").unwrap();
    ok(dir.path(), &["--seed", "1", "tokenize", "--tokenizer", "tcs", "--corpus", "c.txt", "--out", "tok"]);
    let vocab = fs::read_to_string(dir.path().join("tok/vocab.txt")).unwrap();
    for t in ["Ġent", "erp", "ris", "e"] {
        assert!(vocab.lines().any(|l| l == t), "{t} missing from {vocab:?}");
    }
}

#[test]
fn absent_target_letter_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "abc bad cab dab\nfed bead\n").unwrap();
    ok(dir.path(), &["--seed", "1", "tokenize", "--tokenizer", "word", "--corpus", "c.txt", "--out", "tok"]);
    let out = charprobe(dir.path(), &["--seed", "1", "probe-data", "--tokenized", "tok", "--char", "q", "--out", "pd"]);
    assert_eq!(out.status.code(), Some(2));
    let out = charprobe(dir.path(), &["--seed", "1", "probe-data", "--tokenized", "tok", "--char", "7", "--out", "pd"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = charprobe(dir.path(), &["--seed", "1", "train-bpe", "--corpus", "nope.txt", "--vocab-size", "300", "--out", "m"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.txt"));
}

/// tokenize -> transform -> train-emb -> probe-data -> probe, with outputs
/// under `root/name`.
fn recipe(root: &Path, name: &str) {
    let d = |p: &str| format!("{name}/{p}");
    ok(root, &["--seed", "3", "train-bpe", "--corpus", "corpus.txt", "--vocab-size", "500", "--out", &d("bpe")]);
    ok(root, &["--seed", "3", "transform", "--kind", "charpert", "--corpus", "corpus.txt", "--out", &d("cp")]);
    ok(
        root,
        &["--seed", "3", "tokenize", "--tokenizer", "bpe", "--model", &d("bpe"), "--corpus", &d("cp/corpus.txt"), "--out", &d("tok")],
    );
    ok(root, &["--seed", "3", "train-emb", "--tokenized", &d("tok"), "--dim", "16", "--epochs", "1", "--out", &d("emb")]);
    ok(root, &["--seed", "3", "probe-data", "--tokenized", &d("tok"), "--char", "all", "--out", &d("pd")]);
    ok(
        root,
        &[
            "--seed", "3", "probe", "--embeddings", &d("emb/embeddings.cpem"), "--vocab", &d("tok/vocab.txt"),
            "--data", &d("pd"), "--h1", "16", "--h2", "8", "--buckets", "--out", &d("probe"),
        ],
    );
}

#[test]
fn recipe_is_reproducible_and_manifested() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(root);
    recipe(root, "one");
    recipe(root, "two");
    for f in [
        "bpe/merges.txt",
        "cp/corpus.txt",
        "tok/tokens.txt",
        "emb/embeddings.cpem",
        "pd/data_e.tsv",
        "probe/report.csv",
        "probe/buckets.csv",
        "probe/models/model_e.cpmp",
    ] {
        let a = fs::read(root.join("one").join(f)).unwrap();
        let b = fs::read(root.join("two").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("one/probe/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["global_seed"], 3);
    assert!(manifest["inputs"]["one/emb/embeddings.cpem"].is_string());
    assert!(manifest["outputs"]["report.csv"].is_string());
    assert!(manifest["timestamp"].is_string());

    let report = fs::read_to_string(root.join("one/probe/report.csv")).unwrap();
    assert!(report.starts_with("char,correct,total,accuracy\n"));
    assert!(report.lines().last().unwrap().starts_with("micro,"));

    // evaluation-only mode reproduces the combined run
    ok(
        root,
        &[
            "--seed", "3", "probe", "--embeddings", "one/emb/embeddings.cpem", "--vocab", "one/tok/vocab.txt",
            "--data", "one/pd", "--eval", "--models", "one/probe/models", "--h1", "16", "--h2", "8", "--out", "eval",
        ],
    );
    assert_eq!(fs::read_to_string(root.join("eval/report.csv")).unwrap(), report);

    let out = ok(root, &["--seed", "3", "report", "--input", "one=one/probe", "--input", "two=two/probe", "--out", "summary.csv"]);
    let summary = String::from_utf8(out.stdout).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.starts_with("setting,correct,total,accuracy,band_low,band_high,within_chance_band\n"));
}

#[test]
fn embedding_vocab_mismatch_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(root);
    ok(root, &["--seed", "2", "tokenize", "--tokenizer", "word", "--corpus", "corpus.txt", "--out", "w"]);
    ok(root, &["--seed", "2", "tokenize", "--tokenizer", "tcs", "--corpus", "corpus.txt", "--out", "t"]);
    ok(root, &["--seed", "2", "train-emb", "--tokenized", "w", "--dim", "8", "--epochs", "1", "--out", "emb"]);
    ok(root, &["--seed", "2", "probe-data", "--tokenized", "t", "--char", "a", "--out", "pd"]);
    let out = charprobe(
        root,
        &["--seed", "2", "probe", "--embeddings", "emb/embeddings.cpem", "--vocab", "t/vocab.txt", "--data", "pd", "--out", "p"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_boundaries_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(root);
    ok(root, &["--seed", "4", "build-controlled", "--out", "ctl"]);
    ok(
        root,
        &["--seed", "4", "tokenize", "--tokenizer", "controlled", "--model", "ctl", "--corpus", "corpus.txt", "--out", "tok"],
    );
    ok(
        root,
        &["--seed", "4", "analyze-boundaries", "--tokenized", "tok", "--merges", "ctl/merges.txt", "--svg", "--out", "ab"],
    );
    let csv = fs::read_to_string(root.join("ab/boundaries.csv")).unwrap();
    assert!(csv.starts_with("left_char,right_char,merge_rank,frequency\n"));
    assert!(csv.lines().count() > 100);
    let corr = fs::read_to_string(root.join("ab/correlation.csv")).unwrap();
    assert!(corr.starts_with("rho,p_value,pairs,degenerate\n"));
    assert!(fs::read_to_string(root.join("ab/scatter.svg")).unwrap().starts_with("<svg"));
}
