//! Benchmark harness for the optimizer library: seeded training runs that
//! stream JSONL records, loss-curve comparison across runs, and the property
//! verification suites, all shared between the CLI binary and the tests.

pub mod compare;
pub mod config;
pub mod gen;
pub mod records;
pub mod runner;
pub mod suites;

/// Character corpus compiled into the binary so language-model runs need no
/// files on disk.  Regenerated by `gen::bundled_corpus_text`; a test pins the
/// two to each other.
pub const BUNDLED_CORPUS: &str = include_str!("../data/corpus.txt");

/// Vocabulary listing for the bundled corpus, for human inspection.
pub const BUNDLED_VOCAB: &str = include_str!("../data/corpus.vocab");
