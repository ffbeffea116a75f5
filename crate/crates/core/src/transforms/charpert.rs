use rand::Rng;

use crate::corpus::{Corpus, SeedSpec};

/// Replaces every ASCII letter with a uniformly random letter of the same
/// case. Everything else, including non-ASCII letters, is left in place.
pub fn charpert<R: Rng + ?Sized>(document: &str, rng: &mut R) -> String {
    document
        .chars()
        .map(|c| {
            if c.is_ascii_lowercase() {
                (b'a' + rng.gen_range(0..26u8)) as char
            } else if c.is_ascii_uppercase() {
                (b'A' + rng.gen_range(0..26u8)) as char
            } else {
                c
            }
        })
        .collect()
}

/// Applies [`charpert`] to every document with the stream
/// `seed.stream(document_index)`.
pub fn charpert_corpus(corpus: &Corpus, seed: &SeedSpec) -> Corpus {
    crate::par_map_indexed(&corpus.documents, |i, doc| charpert(doc, &mut seed.stream(i as u64))).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn preserves_skeleton_and_case() {
        let src = "she dreams she is dreaming.";
        let out = charpert(src, &mut SeedSpec::new(1, "charpert").stream(0));
        assert_eq!(out.len(), src.len());
        for (a, b) in src.chars().zip(out.chars()) {
            if a.is_ascii_alphabetic() {
                assert!(b.is_ascii_lowercase());
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn no_letters_is_identity() {
        assert_eq!(charpert("123 !?", &mut SeedSpec::new(1, "charpert").stream(0)), "123 !?");
    }

    #[test]
    fn uppercase_draws_are_uniform() {
        // chi-square goodness of fit over 10,000 fresh streams, 25 dof;
        // the 0.999 quantile of chi2(25) is 52.62.
        let seed = SeedSpec::new(11, "charpert-uniformity");
        let mut counts = [0u32; 26];
        for i in 0..10_000u64 {
            let out = charpert("A", &mut seed.stream(i));
            let c = out.chars().next().unwrap();
            assert!(c.is_ascii_uppercase());
            counts[(c as u8 - b'A') as usize] += 1;
        }
        let expected = 10_000.0 / 26.0;
        let chi2: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 52.62, "chi2 = {chi2}");
    }

    proptest! {
        #[test]
        fn length_and_non_letters_fixed(s in "\\PC{0,60}", idx in 0u64..1000) {
            let out = charpert(&s, &mut SeedSpec::new(3, "p").stream(idx));
            prop_assert_eq!(out.chars().count(), s.chars().count());
            for (a, b) in s.chars().zip(out.chars()) {
                if a.is_ascii_alphabetic() {
                    prop_assert_eq!(a.is_ascii_uppercase(), b.is_ascii_uppercase());
                    prop_assert!(b.is_ascii_alphabetic());
                } else {
                    prop_assert_eq!(a, b);
                }
            }
        }
    }
}
