//! Corpus ingestion and the project-wide deterministic random streams.
//!
//! A corpus file is UTF-8 text with one document per LF-terminated line.
//! Every random decision in the toolkit draws from a [`Stream`] derived from a
//! [`SeedSpec`] and an index, so per-document work can run in any order (or in
//! parallel) and still reproduce byte-for-byte.
//!
//! Streams are ChaCha20 (`rand_chacha::ChaCha20Rng`). The 256-bit key is the
//! SHA-256 digest of
//! `"charprobe-stream-v1" || global_seed (u64 LE) || len(label) (u64 LE) || label || index (u64 LE)`.

use std::fs;
use std::hash::Hasher;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A random stream handle. ChaCha20 output is specified independently of
/// platform and word size.
pub type Stream = ChaCha20Rng;

const STREAM_DOMAIN: &[u8] = b"charprobe-stream-v1";

/// An ordered collection of documents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<String>,
}

impl Corpus {
    pub fn new(documents: Vec<String>) -> Self {
        Corpus { documents }
    }

    pub fn doc_count(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(String::as_str)
    }

    /// Total number of characters over all documents.
    pub fn char_count(&self) -> usize {
        self.documents.iter().map(|d| d.chars().count()).sum()
    }

    /// Canonical serialization: every document followed by `\n`.
    pub fn to_file_string(&self) -> String {
        let mut out = String::with_capacity(self.documents.iter().map(|d| d.len() + 1).sum());
        for doc in &self.documents {
            out.push_str(doc);
            out.push('\n');
        }
        out
    }
}

impl From<Vec<String>> for Corpus {
    fn from(documents: Vec<String>) -> Self {
        Corpus::new(documents)
    }
}

impl FromIterator<String> for Corpus {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}

/// Parses corpus bytes. A single trailing `\n` terminates the last document
/// rather than opening a new empty one; an empty input has no documents.
pub fn parse_corpus(bytes: &[u8], path: &Path) -> Result<Corpus> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    if text.is_empty() {
        return Ok(Corpus::default());
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    Ok(Corpus::new(body.split('\n').map(str::to_owned).collect()))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&bytes, path)
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus.to_file_string()).map_err(|e| Error::io(path, e))
}

/// 64-bit FNV-1a checksum, used for vocabulary and manifest hashes.
pub fn checksum64(bytes: &[u8]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub fn file_checksum(path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(checksum64(&bytes))
}

/// Identifies a family of random streams.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub global_seed: u64,
    pub stream_label: String,
}

impl SeedSpec {
    pub fn new(global_seed: u64, stream_label: impl Into<String>) -> Self {
        SeedSpec {
            global_seed,
            stream_label: stream_label.into(),
        }
    }

    /// Same global seed, different label.
    pub fn with_label(&self, label: impl Into<String>) -> Self {
        SeedSpec::new(self.global_seed, label)
    }

    /// Appends `/suffix` to the label.
    pub fn child(&self, suffix: &str) -> Self {
        SeedSpec::new(self.global_seed, format!("{}/{}", self.stream_label, suffix))
    }

    pub fn stream(&self, index: u64) -> Stream {
        derive_stream(self, index)
    }
}

pub fn derive_stream(seed: &SeedSpec, index: u64) -> Stream {
    let label = seed.stream_label.as_bytes();
    let mut hasher = Sha256::new();
    hasher.update(STREAM_DOMAIN);
    hasher.update(seed.global_seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label);
    hasher.update(index.to_le_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(key)
}

/// Lowercases ASCII letters, turns every other character into a space and
/// collapses space runs, leaving only text a controlled tokenizer covers.
pub fn normalize_letters(document: &str) -> String {
    let mut out = String::with_capacity(document.len());
    for c in document.chars() {
        if c.is_ascii_alphabetic() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with(' ') {
            out.push(' ');
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Relative frequencies of English word lengths 1..=12 in running text.
const WORD_LENGTH_WEIGHTS: [u32; 12] = [30, 170, 200, 160, 110, 90, 80, 60, 40, 30, 20, 10];

/// A corpus of random lowercase words, the shape CharPert leaves behind:
/// word lengths follow English running text, letters are uniform, and each
/// document holds 20 to 80 words. Generation stops once `min_chars` is
/// reached. Document `i` draws from `seed.stream(i)`.
pub fn synthetic_corpus(min_chars: usize, seed: &SeedSpec) -> Corpus {
    let lengths = WeightedIndex::new(WORD_LENGTH_WEIGHTS).expect("weights are positive");
    let mut docs = Vec::new();
    let mut total = 0;
    while total < min_chars {
        let mut rng = seed.stream(docs.len() as u64);
        let words = rng.gen_range(20..=80);
        let mut doc = String::new();
        for w in 0..words {
            if w > 0 {
                doc.push(' ');
            }
            for _ in 0..=lengths.sample(&mut rng) {
                doc.push((b'a' + rng.gen_range(0..26u8)) as char);
            }
        }
        total += doc.len();
        docs.push(doc);
    }
    Corpus::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn draws(mut s: Stream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn normalization_keeps_only_letter_words() {
        assert_eq!(normalize_letters("  She said: \"Hi!\"  2x"), "she said hi x");
        assert_eq!(normalize_letters("Ünïcode"), "n code");
        assert_eq!(normalize_letters("..."), "");
    }

    #[test]
    fn synthetic_corpus_shape() {
        let seed = SeedSpec::new(3, "synthetic");
        let c = synthetic_corpus(20_000, &seed);
        assert!(c.char_count() >= 20_000);
        assert_eq!(c, synthetic_corpus(20_000, &seed));
        for doc in c.iter() {
            let words: Vec<&str> = doc.split(' ').collect();
            assert!((20..=80).contains(&words.len()));
            assert!(words.iter().all(|w| (1..=12).contains(&w.len()) && w.bytes().all(|b| b.is_ascii_lowercase())));
        }
    }

    #[test]
    fn two_lines_two_documents() {
        let c = parse_corpus(b"she dreams\nhello\n", Path::new("x")).unwrap();
        assert_eq!(c.doc_count(), 2);
        assert_eq!(c.documents, vec!["she dreams", "hello"]);
        // no trailing newline reads the same
        let c2 = parse_corpus(b"she dreams\nhello", Path::new("x")).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn empty_file_has_no_documents() {
        let c = parse_corpus(b"", Path::new("x")).unwrap();
        assert_eq!(c.doc_count(), 0);
    }

    #[test]
    fn empty_lines_are_empty_documents() {
        let c = parse_corpus(b"a\n\nb\n\n", Path::new("x")).unwrap();
        assert_eq!(c.documents, vec!["a", "", "b", ""]);
        let c = parse_corpus(b"\n", Path::new("x")).unwrap();
        assert_eq!(c.documents, vec![""]);
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = parse_corpus(b"ok\nab\xffcd\n", Path::new("bad.txt")).unwrap_err();
        match err {
            Error::InvalidUtf8 { offset, .. } => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn marker_codepoint_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        let corpus = Corpus::new(vec!["\u{120}".to_string()]);
        write_corpus(&corpus, &path).unwrap();
        let back = load_corpus(&path).unwrap();
        assert_eq!(back, corpus);
        assert_eq!(back.documents[0], "Ġ");
    }

    #[test]
    fn canonical_files_round_trip_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        let raw = "one doc\n\nthird Ġ doc\n";
        fs::write(&path, raw).unwrap();
        let c = load_corpus(&path).unwrap();
        let out = dir.path().join("d.txt");
        write_corpus(&c, &out).unwrap();
        assert_eq!(fs::read_to_string(out).unwrap(), raw);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_corpus("/nonexistent/corpus.txt"), Err(Error::Io { .. })));
    }

    #[test]
    fn streams_are_deterministic() {
        let seed = SeedSpec::new(7, "charpert");
        assert_eq!(draws(derive_stream(&seed, 0), 100), draws(derive_stream(&seed, 0), 100));
    }

    #[test]
    fn streams_differ_by_index_and_label() {
        let seed = SeedSpec::new(7, "charpert");
        let base = draws(derive_stream(&seed, 0), 4);
        assert_ne!(base[0], draws(derive_stream(&seed, 1), 1)[0]);
        assert_ne!(base, draws(derive_stream(&SeedSpec::new(7, "wordsub"), 0), 4));
        assert_ne!(base, draws(derive_stream(&SeedSpec::new(8, "charpert"), 0), 4));
    }

    #[test]
    fn stream_output_is_pinned() {
        // Frozen first draw; changing the derivation breaks reproducibility of
        // every artifact, so it must show up here.
        let mut s = derive_stream(&SeedSpec::new(7, "charpert"), 0);
        let first = s.next_u64();
        let mut again = derive_stream(&SeedSpec::new(7, "charpert"), 0);
        assert_eq!(first, again.next_u64());
        assert_eq!(first, PINNED_FIRST_DRAW);
    }

    // first 8 bytes of the ChaCha20 keystream, computed with an independent implementation
    const PINNED_FIRST_DRAW: u64 = 7_257_620_738_679_828_840;
}
