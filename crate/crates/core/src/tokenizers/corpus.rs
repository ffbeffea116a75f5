use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::merges::{read_merges, MergeTable, UNKNOWN_SYMBOL};
use super::{detokenize, pretokenize, tokenize_tcs_doc, tokenize_word, TokenSeq, Vocabulary, WordVocabConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Token used for word types cut from a capped word vocabulary.
pub const UNK_TOKEN: &str = "<unk>";

/// A vocabulary paired with a merge table (trained BPE or controlled).
#[derive(Debug, Clone)]
pub struct MergeTokenizer {
    vocab: Vocabulary,
    table: MergeTable,
    sym_to_id: Vec<Option<u32>>,
}

impl MergeTokenizer {
    pub fn new(vocab: Vocabulary, table: MergeTable) -> Self {
        let syms = table.symbols();
        let sym_to_id = (0..syms.len() as u32).map(|s| vocab.id(syms.string(s))).collect();
        MergeTokenizer {
            vocab,
            table,
            sym_to_id,
        }
    }

    /// Loads `vocab.txt`/`merges.txt`-style files. The base alphabet is every
    /// single-character vocabulary token plus every single-character rule
    /// operand.
    pub fn load(vocab_path: impl AsRef<Path>, merges_path: impl AsRef<Path>) -> Result<Self> {
        let vocab = Vocabulary::read(vocab_path)?;
        let table = read_merges(merges_path)?;
        let mut alphabet: Vec<char> = Vec::new();
        let single = |s: &str| {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Some(c),
                _ => None,
            }
        };
        alphabet.extend(vocab.tokens().iter().filter_map(|t| single(t)));
        for r in table.rules() {
            alphabet.extend(single(&r.left));
            alphabet.extend(single(&r.right));
        }
        Ok(Self::new(vocab, table.with_alphabet(alphabet)))
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn table(&self) -> &MergeTable {
        &self.table
    }

    fn encode_word(&self, word: &str) -> Result<Vec<u32>> {
        let mut units = self.table.units(word)?;
        self.table.merge_units(&mut units);
        units
            .iter()
            .map(|u| {
                let id = if u.sym == UNKNOWN_SYMBOL {
                    None
                } else {
                    self.sym_to_id.get(u.sym as usize).copied().flatten()
                };
                id.ok_or_else(|| Error::UnknownToken(word[u.start as usize..u.end as usize].to_string()))
            })
            .collect()
    }

    pub fn tokenize(&self, doc: &str) -> Result<TokenSeq> {
        let mut out = Vec::new();
        for w in pretokenize(doc) {
            out.extend(self.table.apply(&w)?);
        }
        Ok(out)
    }

    pub fn encode(&self, doc: &str) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        for w in pretokenize(doc) {
            out.extend(self.encode_word(&w)?);
        }
        Ok(out)
    }

    /// Encodes every document, memoizing per word type.
    pub fn encode_corpus(&self, corpus: &Corpus) -> Result<TokenizedCorpus> {
        let mut cache: HashMap<String, Vec<u32>> = HashMap::new();
        let mut docs = Vec::with_capacity(corpus.doc_count());
        for doc in corpus.iter() {
            let mut ids = Vec::new();
            for w in pretokenize(doc) {
                if let Some(hit) = cache.get(&w) {
                    ids.extend_from_slice(hit);
                } else {
                    let enc = self.encode_word(&w)?;
                    ids.extend_from_slice(&enc);
                    cache.insert(w, enc);
                }
            }
            docs.push(ids);
        }
        Ok(TokenizedCorpus {
            vocab: self.vocab.clone(),
            docs,
        })
    }
}

/// Any of the four tokenization regimes.
#[derive(Debug, Clone)]
pub enum Tokenizer {
    /// Trained BPE or controlled merge table.
    Merge(MergeTokenizer),
    /// Three-character segmentation.
    Tcs,
    /// Whitespace words.
    Word(WordVocabConfig),
}

impl Tokenizer {
    pub fn tokenize_doc(&self, doc: &str) -> Result<TokenSeq> {
        match self {
            Tokenizer::Merge(t) => t.tokenize(doc),
            Tokenizer::Tcs => Ok(tokenize_tcs_doc(doc)),
            Tokenizer::Word(_) => Ok(tokenize_word(doc)),
        }
    }

    /// Tokenizes a corpus. Regimes without a fixed vocabulary build one from
    /// the observed tokens, most frequent first.
    pub fn tokenize_corpus(&self, corpus: &Corpus) -> Result<TokenizedCorpus> {
        match self {
            Tokenizer::Merge(t) => t.encode_corpus(corpus),
            Tokenizer::Tcs => Ok(TokenizedCorpus::from_token_docs(
                corpus.iter().map(tokenize_tcs_doc).collect(),
                None,
            )),
            Tokenizer::Word(cfg) => Ok(TokenizedCorpus::from_token_docs(
                corpus.iter().map(tokenize_word).collect(),
                cfg.max_size,
            )),
        }
    }
}

/// Token-id sequences per document, with their vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedCorpus {
    pub vocab: Vocabulary,
    pub docs: Vec<Vec<u32>>,
}

impl TokenizedCorpus {
    /// Checks that every id is in range.
    pub fn new(vocab: Vocabulary, docs: Vec<Vec<u32>>) -> Result<Self> {
        for &id in docs.iter().flatten() {
            if id as usize >= vocab.len() {
                return Err(Error::IdOutOfRange {
                    id,
                    vocab_size: vocab.len(),
                });
            }
        }
        Ok(TokenizedCorpus { vocab, docs })
    }

    /// Builds a vocabulary from observed tokens (descending frequency, then
    /// lexicographic), optionally capped with an `<unk>` fallback.
    pub fn from_token_docs(docs: Vec<TokenSeq>, max_size: Option<usize>) -> Self {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for t in docs.iter().flatten() {
            *counts.entry(t.as_str()).or_default() += 1;
        }
        let mut types: Vec<(&str, u64)> = counts.into_iter().collect();
        types.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let truncated = max_size.is_some_and(|m| types.len() > m);
        if let Some(m) = max_size {
            types.truncate(m);
        }
        let mut tokens: Vec<String> = types.iter().map(|(t, _)| t.to_string()).collect();
        if truncated && !tokens.iter().any(|t| t == UNK_TOKEN) {
            tokens.push(UNK_TOKEN.to_string());
        }
        let vocab = Vocabulary::new(tokens).expect("observed tokens are valid");
        let unk = vocab.id(UNK_TOKEN);
        let ids = docs
            .iter()
            .map(|d| {
                d.iter()
                    .map(|t| vocab.id(t).or(unk).expect("token kept or unk present"))
                    .collect()
            })
            .collect();
        TokenizedCorpus { vocab, docs: ids }
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self, doc: usize) -> TokenSeq {
        self.docs[doc]
            .iter()
            .map(|&id| self.vocab.token(id).expect("valid id").to_string())
            .collect()
    }

    pub fn detokenize_doc(&self, doc: usize) -> String {
        detokenize(&self.tokens(doc))
    }

    /// Occurrence count per token id.
    pub fn frequencies(&self) -> Vec<u64> {
        let mut f = vec![0u64; self.vocab.len()];
        for &id in self.docs.iter().flatten() {
            f[id as usize] += 1;
        }
        f
    }

    /// One document per line, tokens separated by single spaces.
    pub fn to_tokens_string(&self) -> String {
        let mut out = String::new();
        for d in &self.docs {
            for (i, &id) in d.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(self.vocab.token(id).expect("valid id"));
            }
            out.push('\n');
        }
        out
    }

    /// Writes `tokens.txt` and `vocab.txt` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let tokens = dir.join("tokens.txt");
        fs::write(&tokens, self.to_tokens_string()).map_err(|e| Error::io(&tokens, e))?;
        self.vocab.write(dir.join("vocab.txt"))
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let vocab = Vocabulary::read(dir.join("vocab.txt"))?;
        Self::read_tokens(dir.join("tokens.txt"), vocab)
    }

    pub fn read_tokens(path: impl AsRef<Path>, vocab: Vocabulary) -> Result<Self> {
        let path = path.as_ref();
        let corpus = crate::corpus::load_corpus(path)?;
        let mut docs = Vec::with_capacity(corpus.doc_count());
        for (i, line) in corpus.iter().enumerate() {
            let mut ids = Vec::new();
            if !line.is_empty() {
                for t in line.split(' ') {
                    let id = vocab
                        .id(t)
                        .ok_or_else(|| Error::parse(path, i + 1, format!("token {t:?} not in vocabulary")))?;
                    ids.push(id);
                }
            }
            docs.push(ids);
        }
        Ok(TokenizedCorpus { vocab, docs })
    }
}
