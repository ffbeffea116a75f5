use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../resources/lemmas.tsv");

/// Inflected form to lemma, read from `inflected<TAB>lemma` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaMap {
    mapping: HashMap<String, String>,
}

impl LemmaMap {
    /// The English list shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN, Path::new("lemmas.tsv")).expect("bundled lemma list is well formed")
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut mapping = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (form, lemma) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected inflected<TAB>lemma"))?;
            if form.is_empty() || lemma.is_empty() || lemma.contains('\t') {
                return Err(Error::parse(path, i + 1, "empty field or extra column"));
            }
            if mapping.insert(form.to_string(), lemma.to_string()).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate form {form:?}")));
            }
        }
        Ok(LemmaMap { mapping })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.mapping.get(word).map(String::as_str)
    }
}

pub fn lemmatize<'a>(word: &'a str, map: &'a LemmaMap) -> &'a str {
    map.get(word).unwrap_or(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_entries() {
        let map = LemmaMap::builtin();
        assert!(map.len() > 500);
        assert_eq!(lemmatize("dreams", &map), "dream");
        assert_eq!(lemmatize("walked", &map), "walk");
        assert_eq!(lemmatize("children", &map), "child");
        assert_eq!(lemmatize("qwerty", &map), "qwerty");
    }

    #[test]
    fn rejects_malformed_lines() {
        let p = Path::new("l.tsv");
        assert!(LemmaMap::parse("dreams dream\n", p).is_err());
        assert!(LemmaMap::parse("dreams\t\n", p).is_err());
        assert!(LemmaMap::parse("a\tb\na\tc\n", p).is_err());
        assert_eq!(LemmaMap::parse("a\tb\n\n", p).unwrap().len(), 1);
    }
}
