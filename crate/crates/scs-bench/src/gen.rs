//! Generator for the bundled training corpus and its frozen vocabulary
//! fixture.
//!
//! The corpus is synthetic prose: pronounceable nonsense words assembled
//! from a fixed syllable inventory, grouped into sentences and paragraphs.
//! It exists to give the language model a stationary character distribution
//! with realistic punctuation, not to mean anything.  Generation is a pure
//! function of the constants below, so the committed file can always be
//! re-derived; the `regenerate_fixtures` test (ignored by default) rewrites
//! it in place and a companion test pins the committed bytes against this
//! generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scs_opt::problems::{Corpus, UNK_SYMBOL};

const CORPUS_SEED: u64 = 0x0005_c5c0;
/// Keep appending paragraphs until the text reaches this many characters.
const TARGET_CHARS: usize = 97_000;

const CONSONANTS: [&str; 16] = [
    "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

fn push_word(out: &mut String, rng: &mut ChaCha8Rng) {
    let syllables = rng.gen_range(2..=4);
    for _ in 0..syllables {
        out.push_str(CONSONANTS[rng.gen_range(0..CONSONANTS.len())]);
        out.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
        if rng.gen_range(0..4) == 0 {
            out.push_str(CONSONANTS[rng.gen_range(0..CONSONANTS.len())]);
        }
    }
}

fn push_sentence(out: &mut String, rng: &mut ChaCha8Rng) {
    let words = rng.gen_range(5..=12);
    for w in 0..words {
        if w > 0 {
            if w + 1 < words && rng.gen_range(0..8) == 0 {
                out.push(',');
            }
            out.push(' ');
        }
        push_word(out, rng);
    }
    out.push('.');
}

/// The full bundled corpus as text.  Lowercase syllabic words, commas,
/// periods, and newline-separated paragraphs: 21 letters plus 4 punctuation
/// and whitespace symbols.
pub fn bundled_corpus_text() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut out = String::with_capacity(TARGET_CHARS + 1024);
    while out.len() < TARGET_CHARS {
        let sentences = rng.gen_range(4..=7);
        for s in 0..sentences {
            if s > 0 {
                out.push(' ');
            }
            push_sentence(&mut out, &mut rng);
        }
        out.push('\n');
    }
    out
}

fn escape_symbol(c: char) -> String {
    match c {
        '\t' => "\\t".into(),
        '\n' => "\\n".into(),
        '\r' => "\\r".into(),
        '\\' => "\\\\".into(),
        other => other.to_string(),
    }
}

/// Renders a corpus's symbol table as the frozen fixture format: two header
/// comments pinning the token and vocabulary counts, then one
/// `symbol TAB id` line per id in id order, with the out-of-vocabulary id
/// rendered as its display name.
pub fn vocab_fixture(corpus: &Corpus) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tokens {}\n", corpus.len()));
    out.push_str(&format!("# vocab {}\n", corpus.vocab_size()));
    for id in 0..corpus.vocab_size() as u32 {
        match corpus.symbol(id) {
            Some(c) => out.push_str(&format!("{}\t{id}\n", escape_symbol(c))),
            None => out.push_str(&format!("{UNK_SYMBOL}\t{id}\n")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(bundled_corpus_text(), bundled_corpus_text());
    }

    #[test]
    fn generated_text_stays_in_the_small_alphabet() {
        let text = bundled_corpus_text();
        assert!(text.len() >= TARGET_CHARS);
        assert!(text.chars().all(|c| c.is_ascii_lowercase() || " .,\n".contains(c)));
        let corpus = Corpus::from_text(&text, 256).unwrap();
        assert!(corpus.vocab_size() <= 32, "got {}", corpus.vocab_size());
    }

    #[test]
    fn fixture_escapes_control_characters() {
        let corpus = Corpus::from_text("a\tb\na", 256).unwrap();
        let fx = vocab_fixture(&corpus);
        assert!(fx.contains("\\t\t"), "tab symbol must be escaped:\n{fx}");
        assert!(fx.contains("\\n\t"), "newline symbol must be escaped:\n{fx}");
        assert!(fx.contains(UNK_SYMBOL));
        assert!(fx.starts_with("# tokens 5\n# vocab 5\n"));
    }

    /// Rewrites the committed fixtures from the generator.  Run after any
    /// change to the generation constants:
    /// `cargo test -p scs-bench regenerate_fixtures -- --ignored`
    #[test]
    #[ignore = "rewrites data/ fixtures in the source tree"]
    fn regenerate_fixtures() {
        let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
        let text = bundled_corpus_text();
        let corpus = Corpus::from_text(&text, 256).unwrap();
        std::fs::write(data.join("corpus.txt"), &text).unwrap();
        std::fs::write(data.join("corpus.vocab"), vocab_fixture(&corpus)).unwrap();
    }

    #[test]
    fn committed_fixtures_match_the_generator() {
        // Plain assert!: on mismatch the 97k-char diff would drown the hint.
        assert!(
            crate::BUNDLED_CORPUS == bundled_corpus_text(),
            "data/corpus.txt is stale; rerun regenerate_fixtures"
        );
        let corpus = Corpus::from_text(crate::BUNDLED_CORPUS, 256).unwrap();
        assert!(
            crate::BUNDLED_VOCAB == vocab_fixture(&corpus),
            "data/corpus.vocab is stale; rerun regenerate_fixtures"
        );
    }
}
