use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use charprobe::analysis::{
    boundary_csv, boundary_pair_stats, chance_band_half_width, correlate_strength_frequency, enumerate_conditions,
    scatter_svg, strength_rows,
};
use charprobe::corpus::{load_corpus, normalize_letters, write_corpus, Corpus, SeedSpec};
use charprobe::embeddings::{train_embeddings, EmbeddingMatrix, SgnsConfig};
use charprobe::probe::{
    predict, probe_context_folds, probe_six_groups, read_checkpoint, split_dataset, train_probe, write_checkpoint,
    EvalCounts, ProbeMlp, TrainConfig,
};
use charprobe::probedata::{build_dataset, filter_vocab, ContextSide, LengthBucket, MatchingMode, ProbeDataset};
use charprobe::tokenizers::{
    build_controlled_tokenizer, read_merges, train_bpe, write_merges, MergeTokenizer, TokenizedCorpus, Tokenizer,
    Vocabulary, WordVocabConfig,
};
use charprobe::transforms::{
    build_wordsub_map, charpert_corpus, collect_word_types, lemmatize_corpus, stem_corpus, token_substitute,
    wordsub_corpus, LemmaMap,
};

use crate::manifest::write_manifest;
use crate::{
    AnalyzeArgs, Command, Failure, ImportEmbArgs, OutArgs, ProbeArgs, ProbeDataArgs, ReportArgs, Side, TokenizeArgs,
    TokenizerKind, TrainBpeArgs, TrainEmbArgs, TransformArgs, TransformKind, VerifyArgs,
};

pub fn run(command: Command, seed: u64) -> Result<(), Failure> {
    match command {
        Command::TrainBpe(a) => train_bpe_cmd(a, seed),
        Command::BuildControlled(a) => build_controlled(a, seed),
        Command::Tokenize(a) => tokenize(a, seed),
        Command::Transform(a) => transform(a, seed),
        Command::ProbeData(a) => probe_data(a, seed),
        Command::TrainEmb(a) => train_emb(a, seed),
        Command::ImportEmb(a) => import_emb(a, seed),
        Command::Probe(a) => probe(a, seed),
        Command::AnalyzeBoundaries(a) => analyze(a, seed),
        Command::VerifyConditions(a) => verify(a, seed),
        Command::Report(a) => report(a, seed),
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn require_input(path: &Path) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("input {} does not exist", path.display())))
    }
}

fn train_bpe_cmd(a: TrainBpeArgs, seed: u64) -> Result<(), Failure> {
    require_input(&a.corpus)?;
    let corpus = load_corpus(&a.corpus)?;
    let (vocab, table) = train_bpe(&corpus, a.vocab_size)?;
    create_dir(&a.out)?;
    vocab.write(a.out.join("vocab.txt"))?;
    write_merges(&table, a.out.join("merges.txt"))?;
    write_manifest(&a.out, seed, &[&a.corpus])
}

fn build_controlled(a: OutArgs, seed: u64) -> Result<(), Failure> {
    let (vocab, table) = build_controlled_tokenizer(&SeedSpec::new(seed, "controlled"))?;
    create_dir(&a.out)?;
    vocab.write(a.out.join("vocab.txt"))?;
    write_merges(&table, a.out.join("merges.txt"))?;
    write_manifest(&a.out, seed, &[])
}

fn tokenize(a: TokenizeArgs, seed: u64) -> Result<(), Failure> {
    require_input(&a.corpus)?;
    let mut corpus = load_corpus(&a.corpus)?;
    if a.normalize {
        corpus = corpus.iter().map(normalize_letters).collect();
    }
    let tokenizer = match a.tokenizer {
        TokenizerKind::Bpe | TokenizerKind::Controlled => {
            let dir = a
                .model
                .as_ref()
                .ok_or_else(|| Failure::Usage("--model is required for bpe and controlled".into()))?;
            require_input(dir)?;
            Tokenizer::Merge(MergeTokenizer::load(dir.join("vocab.txt"), dir.join("merges.txt"))?)
        }
        TokenizerKind::Tcs => Tokenizer::Tcs,
        TokenizerKind::Word => Tokenizer::Word(WordVocabConfig { max_size: a.max_vocab }),
    };
    let tc = tokenizer.tokenize_corpus(&corpus)?;
    tc.write_dir(&a.out)?;
    let mut inputs: Vec<&Path> = vec![&a.corpus];
    if let Some(m) = &a.model {
        inputs.push(m);
    }
    write_manifest(&a.out, seed, &inputs)
}

fn transform(a: TransformArgs, seed: u64) -> Result<(), Failure> {
    let seed_spec = SeedSpec::new(seed, format!("transform/{:?}", a.kind).to_lowercase());
    if a.kind == TransformKind::Toksub {
        let dir = a
            .tokenized
            .as_ref()
            .ok_or_else(|| Failure::Usage("--tokenized is required for toksub".into()))?;
        require_input(dir)?;
        let tc = TokenizedCorpus::read_dir(dir)?;
        token_substitute(&tc, &mut seed_spec.stream(0)).write_dir(&a.out)?;
        return write_manifest(&a.out, seed, &[dir]);
    }
    let path = a
        .corpus
        .as_ref()
        .ok_or_else(|| Failure::Usage("--corpus is required for this transform".into()))?;
    require_input(path)?;
    let corpus = load_corpus(path)?;
    create_dir(&a.out)?;
    let mut inputs: Vec<&Path> = vec![path];
    let out: Corpus = match a.kind {
        TransformKind::Charpert => charpert_corpus(&corpus, &seed_spec),
        TransformKind::Wordsub => {
            let map = build_wordsub_map(collect_word_types(&corpus), &seed_spec)?;
            let mut tsv = String::new();
            for (k, v) in map.pairs() {
                tsv.push_str(&format!("{k}\t{v}\n"));
            }
            write_text(&a.out.join("wordsub_map.tsv"), &tsv)?;
            wordsub_corpus(&corpus, &map)?
        }
        TransformKind::Stem => stem_corpus(&corpus),
        TransformKind::Lemma => {
            let map = match &a.lemmas {
                Some(p) => {
                    require_input(p)?;
                    inputs.push(p);
                    LemmaMap::load(p)?
                }
                None => LemmaMap::builtin(),
            };
            lemmatize_corpus(&corpus, &map)
        }
        TransformKind::Toksub => unreachable!("handled above"),
    };
    write_corpus(&out, a.out.join("corpus.txt"))?;
    write_manifest(&a.out, seed, &inputs)
}

fn parse_targets(target: &str) -> Result<Vec<char>, Failure> {
    if target == "all" {
        return Ok(('a'..='z').collect());
    }
    let mut chars = target.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphabetic() => Ok(vec![c.to_ascii_lowercase()]),
        _ => Err(Failure::Usage(format!("--char must be a letter a..z or `all`, got {target:?}"))),
    }
}

fn probe_data(a: ProbeDataArgs, seed: u64) -> Result<(), Failure> {
    let targets = parse_targets(&a.target)?;
    let mode: MatchingMode = a.mode.parse().map_err(|e: charprobe::Error| Failure::Usage(e.to_string()))?;
    require_input(&a.tokenized)?;
    let tc = TokenizedCorpus::read_dir(&a.tokenized)?;
    let freq = tc.frequencies();
    let ids: Vec<u32> = filter_vocab(&tc.vocab)
        .into_iter()
        .filter(|&id| freq[id as usize] >= a.min_count)
        .collect();
    create_dir(&a.out)?;
    let base = SeedSpec::new(seed, "probe-data");
    for alpha in targets {
        let ds = build_dataset(&tc.vocab, &ids, alpha, mode, &mut base.child(&alpha.to_string()).stream(0))?;
        ds.write_tsv(a.out.join(format!("data_{alpha}.tsv")), seed)?;
    }
    write_manifest(&a.out, seed, &[&a.tokenized])
}

fn train_emb(a: TrainEmbArgs, seed: u64) -> Result<(), Failure> {
    require_input(&a.tokenized)?;
    let tc = TokenizedCorpus::read_dir(&a.tokenized)?;
    let cfg = SgnsConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        subsample: a.subsample,
    };
    let trained = train_embeddings(&tc, &cfg, &mut SeedSpec::new(seed, "sgns").stream(0))?;
    create_dir(&a.out)?;
    trained.matrix.write(a.out.join("embeddings.cpem"))?;
    let mut losses = String::from("epoch,loss\n");
    for (i, l) in trained.epoch_losses.iter().enumerate() {
        losses.push_str(&format!("{},{l:.6}\n", i + 1));
    }
    write_text(&a.out.join("losses.csv"), &losses)?;
    write_manifest(&a.out, seed, &[&a.tokenized])
}

fn import_emb(a: ImportEmbArgs, seed: u64) -> Result<(), Failure> {
    require_input(&a.text)?;
    require_input(&a.vocab)?;
    let vocab = Vocabulary::read(&a.vocab)?;
    let text = fs::read_to_string(&a.text).map_err(|e| Failure::Data(format!("{}: {e}", a.text.display())))?;
    let matrix = EmbeddingMatrix::from_text(&text, &vocab, &a.text)?;
    create_dir(&a.out)?;
    matrix.write(a.out.join("embeddings.cpem"))?;
    write_manifest(&a.out, seed, &[&a.text, &a.vocab])
}

/// Dataset files written by `probe-data`, sorted by letter.
fn dataset_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("data_") && n.ends_with(".tsv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Data(format!("no data_*.tsv files in {}", dir.display())));
    }
    Ok(files)
}

/// Everything one letter contributes to the probe reports.
#[derive(Default)]
struct LetterOutput {
    counts: EvalCounts,
    buckets: Vec<(LengthBucket, EvalCounts)>,
    six: Vec<(String, EvalCounts)>,
    folds: Option<EvalCounts>,
}

fn check_model_dim(model: &ProbeMlp<f32>, emb: &EmbeddingMatrix) -> Result<(), Failure> {
    if model.shape.dim == emb.dim() {
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "checkpoint expects dim {}, embeddings have dim {}",
            model.shape.dim,
            emb.dim()
        )))
    }
}

fn probe_one(
    a: &ProbeArgs,
    emb: &EmbeddingMatrix,
    ds: &ProbeDataset,
    base: &TrainConfig,
    models: &Path,
    seed: &SeedSpec,
) -> Result<LetterOutput, Failure> {
    let alpha = ds.target_char;
    let letter_seed = seed.child(&alpha.to_string());
    let (train, test) = split_dataset(ds, a.test_fraction, &letter_seed.child("split"));
    let mut cfg = base.clone();
    cfg.seed = letter_seed.child("train");
    let checkpoint = models.join(format!("model_{alpha}.cpmp"));
    let model = if a.eval && !a.train {
        let m = read_checkpoint(&checkpoint)?;
        check_model_dim(&m, emb)?;
        m
    } else {
        let m = train_probe(emb, &train, &cfg)?;
        write_checkpoint(&m, &checkpoint)?;
        m
    };
    let mut out = LetterOutput::default();
    if a.train && !a.eval {
        return Ok(out);
    }
    let preds = predict(&model, emb, &test.examples)?;
    out.counts = EvalCounts::from_predictions(alpha, &test.examples, &preds);
    if a.buckets {
        for b in LengthBucket::ALL {
            let (ex, pr): (Vec<_>, Vec<_>) = test
                .examples
                .iter()
                .zip(&preds)
                .filter(|(e, _)| LengthBucket::of_token(&e.token) == b)
                .map(|(e, &p)| (e.clone(), p))
                .unzip();
            out.buckets.push((b, EvalCounts::from_predictions(alpha, &ex, &pr)));
        }
    }
    if a.six_group {
        out.six = probe_six_groups(emb, ds, a.test_fraction, &cfg, &letter_seed.child("six-group"))?
            .into_iter()
            .map(|(g, c)| (g.to_string(), c))
            .collect();
    }
    if let Some(side) = a.context_folds {
        let side = match side {
            Side::Prev => ContextSide::Preceding,
            Side::Next => ContextSide::Following,
        };
        out.folds = Some(probe_context_folds(emb, ds, side, a.folds, &cfg, &letter_seed.child("context-folds"))?);
    }
    Ok(out)
}

fn grouped_csv<K: std::fmt::Display>(rows: &[(char, K, &EvalCounts)], key: &str) -> String {
    let mut csv = format!("char,{key},correct,total,accuracy\n");
    for (c, k, counts) in rows.iter().filter(|r| r.2.total > 0) {
        csv.push_str(&format!("{c},{k},{},{},{:.6}\n", counts.correct, counts.total, counts.accuracy()));
    }
    csv
}

fn probe(a: ProbeArgs, seed: u64) -> Result<(), Failure> {
    if !(0.0..1.0).contains(&a.test_fraction) || a.test_fraction == 0.0 {
        return Err(Failure::Usage("--test-fraction must lie in (0, 1)".into()));
    }
    if a.folds < 2 {
        return Err(Failure::Usage("--folds must be at least 2".into()));
    }
    for p in [&a.embeddings, &a.vocab, &a.data] {
        require_input(p)?;
    }
    let vocab = Vocabulary::read(&a.vocab)?;
    let emb = EmbeddingMatrix::read_for(&a.embeddings, &vocab)?;
    let datasets: Vec<ProbeDataset> = dataset_files(&a.data)?
        .iter()
        .map(|p| ProbeDataset::read_tsv(p).map(|(d, _)| d))
        .collect::<Result<_, _>>()?;
    create_dir(&a.out)?;
    let models = a.models.clone().unwrap_or_else(|| a.out.join("models"));
    if a.eval && !a.train {
        require_input(&models)?;
    } else {
        create_dir(&models)?;
    }
    let mut cfg = TrainConfig::new(SeedSpec::new(seed, "probe"));
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.h1 = a.h1;
    cfg.h2 = a.h2;
    let seed_spec = SeedSpec::new(seed, "probe");
    let outputs: Vec<LetterOutput> = datasets
        .par_iter()
        .map(|ds| probe_one(&a, &emb, ds, &cfg, &models, &seed_spec))
        .collect::<Result<_, _>>()?;

    if !(a.train && !a.eval) {
        let mut all = EvalCounts::default();
        for o in &outputs {
            all.merge(&o.counts);
        }
        write_text(&a.out.join("report.csv"), &all.to_csv())?;
        let letters: Vec<char> = datasets.iter().map(|d| d.target_char).collect();
        if a.buckets {
            let rows: Vec<_> = letters
                .iter()
                .zip(&outputs)
                .flat_map(|(&c, o)| o.buckets.iter().map(move |(b, n)| (c, b.to_string(), n)))
                .collect();
            write_text(&a.out.join("buckets.csv"), &grouped_csv(&rows, "bucket"))?;
        }
        if a.six_group {
            let rows: Vec<_> = letters
                .iter()
                .zip(&outputs)
                .flat_map(|(&c, o)| o.six.iter().map(move |(g, n)| (c, g.clone(), n)))
                .collect();
            write_text(&a.out.join("six_group.csv"), &grouped_csv(&rows, "group"))?;
        }
        if let Some(side) = a.context_folds {
            let mut folds = EvalCounts::default();
            for o in &outputs {
                folds.merge(o.folds.as_ref().expect("fold counts computed"));
            }
            let name = if side == Side::Prev { "context_prev.csv" } else { "context_next.csv" };
            write_text(&a.out.join(name), &folds.to_csv())?;
        }
    }
    write_manifest(&a.out, seed, &[&a.embeddings, &a.vocab, &a.data])
}

fn analyze(a: AnalyzeArgs, seed: u64) -> Result<(), Failure> {
    require_input(&a.tokenized)?;
    require_input(&a.merges)?;
    let tc = TokenizedCorpus::read_dir(&a.tokenized)?;
    let merges = read_merges(&a.merges)?;
    let table = boundary_pair_stats(&tc, a.cross_word);
    create_dir(&a.out)?;
    write_text(&a.out.join("boundaries.csv"), &boundary_csv(&table, &merges))?;
    let corr = correlate_strength_frequency(&table, &merges, a.permutations, &mut SeedSpec::new(seed, "permutation").stream(0))?;
    let p = corr.p_value.map_or_else(String::new, |p| format!("{p:.6}"));
    write_text(
        &a.out.join("correlation.csv"),
        &format!("rho,p_value,pairs,degenerate\n{:.6},{p},{},{}\n", corr.rho, corr.pairs, corr.degenerate),
    )?;
    if a.svg {
        let points: Vec<(f64, f64)> = strength_rows(&table, &merges)
            .into_iter()
            .map(|(_, _, rank, n)| (rank as f64, n as f64))
            .collect();
        let title = format!("boundary frequency vs merge rank (rho = {:.3})", corr.rho);
        write_text(&a.out.join("scatter.svg"), &scatter_svg(&points, &title, "merge rank (later = weaker)", "boundary frequency"))?;
    }
    println!("rho={:.4} p={} pairs={}", corr.rho, if p.is_empty() { "n/a" } else { &p }, corr.pairs);
    write_manifest(&a.out, seed, &[&a.tokenized, &a.merges])
}

fn verify(a: VerifyArgs, seed: u64) -> Result<(), Failure> {
    if !(3..=8).contains(&a.alphabet) {
        return Err(Failure::Usage(format!("--alphabet must be in 3..=8, got {}", a.alphabet)));
    }
    let report = enumerate_conditions(a.alphabet, a.trials, &SeedSpec::new(seed, "conditions"))?;
    let csv = report.to_csv();
    print!("{csv}");
    if let Some(out) = &a.out {
        create_dir(out)?;
        write_text(&out.join("conditions.csv"), &csv)?;
        write_manifest(out, seed, &[])?;
    }
    if report.violations() > 0 {
        return Err(Failure::Data(format!("{} condition violations", report.violations())));
    }
    Ok(())
}

fn micro_row(dir: &Path) -> Result<(u64, u64), Failure> {
    let path = dir.join("report.csv");
    let text = fs::read_to_string(&path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let line = text
        .lines()
        .find(|l| l.starts_with("micro,"))
        .ok_or_else(|| Failure::Data(format!("{}: no micro row", path.display())))?;
    let f: Vec<&str> = line.split(',').collect();
    let parse = |s: &str| s.parse::<u64>().map_err(|_| Failure::Data(format!("{}: bad micro row {line:?}", path.display())));
    match f.as_slice() {
        [_, c, t, _] => Ok((parse(c)?, parse(t)?)),
        _ => Err(Failure::Data(format!("{}: bad micro row {line:?}", path.display()))),
    }
}

fn report(a: ReportArgs, _seed: u64) -> Result<(), Failure> {
    let mut csv = String::from("setting,correct,total,accuracy,band_low,band_high,within_chance_band\n");
    let mut dirs = Vec::new();
    for input in &a.inputs {
        let (label, dir) = input
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--input expects label=DIR, got {input:?}")))?;
        let dir = PathBuf::from(dir);
        require_input(&dir)?;
        let (correct, total) = micro_row(&dir)?;
        if total == 0 {
            return Err(Failure::Data(format!("{label}: empty report")));
        }
        let acc = correct as f64 / total as f64;
        let band = chance_band_half_width(total, 2.576);
        let (low, high) = (0.5 - band, 0.5 + band);
        csv.push_str(&format!("{label},{correct},{total},{acc:.6},{low:.6},{high:.6},{}\n", (low..=high).contains(&acc)));
        dirs.push(dir);
    }
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_text(&a.out, &csv)?;
    print!("{csv}");
    Ok(())
}
