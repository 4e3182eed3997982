//! Character-level text ingestion and windowed batching.
//!
//! Tokenization is one id per Unicode scalar value, ranked by frequency with
//! ties broken by the character itself, so a corpus maps to ids purely as a
//! function of its bytes.  An out-of-vocabulary id is always reserved and
//! counts against the vocabulary budget: `max_vocab` is the total id count,
//! not the kept-character count.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sampling::draw_batch_with;
use crate::{Error, Result};

/// Display name for the out-of-vocabulary id in fixtures and reports.
pub const UNK_SYMBOL: &str = "<unk>";

/// A tokenized text with its symbol table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    tokens: Vec<u32>,
    /// id → character; the final id is the out-of-vocabulary bucket.
    chars: Vec<char>,
    ids: BTreeMap<char, u32>,
}

impl Corpus {
    /// Tokenizes `text`, keeping the `max_vocab - 1` most frequent
    /// characters and folding the rest into the reserved last id.
    pub fn from_text(text: &str, max_vocab: usize) -> Result<Corpus> {
        if max_vocab == 0 {
            return Err(Error::InvalidParam {
                name: "max-vocab",
                detail: "vocabulary budget must be at least 1 (the out-of-vocabulary id)".into(),
            });
        }
        let raw: Vec<char> = text.chars().collect();
        if raw.is_empty() {
            return Err(Error::Data {
                detail: "corpus contains no characters".into(),
            });
        }
        let mut counts: BTreeMap<char, u64> = BTreeMap::new();
        for &c in &raw {
            *counts.entry(c).or_insert(0) += 1;
        }
        let mut ranked: Vec<(char, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let kept = ranked.len().min(max_vocab - 1);
        let chars: Vec<char> = ranked[..kept].iter().map(|&(c, _)| c).collect();
        let ids: BTreeMap<char, u32> = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let unk = kept as u32;
        let tokens = raw
            .iter()
            .map(|c| ids.get(c).copied().unwrap_or(unk))
            .collect();
        Ok(Corpus { tokens, chars, ids })
    }

    /// Total ids, including the out-of-vocabulary bucket.
    pub fn vocab_size(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn unk_id(&self) -> u32 {
        self.chars.len() as u32
    }

    /// Token count of the ingested text.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    /// Character for an id; `None` for the out-of-vocabulary id or anything
    /// past it.
    pub fn symbol(&self, id: u32) -> Option<char> {
        self.chars.get(id as usize).copied()
    }

    pub fn id_of(&self, c: char) -> u32 {
        self.ids.get(&c).copied().unwrap_or(self.unk_id())
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        text.chars().map(|c| self.id_of(c)).collect()
    }

    /// Inverse of [`encode`](Corpus::encode) for in-vocabulary ids; the
    /// out-of-vocabulary id renders as U+FFFD.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let v = self.vocab_size() as u32;
        let mut out = String::with_capacity(ids.len());
        for &id in ids {
            if id >= v {
                return Err(Error::Data {
                    detail: format!("token id {id} outside vocabulary of {v}"),
                });
            }
            out.push(self.symbol(id).unwrap_or('\u{FFFD}'));
        }
        Ok(out)
    }

    /// Number of length-`seq_len` windows with a shifted target, i.e. valid
    /// starts `s` with `s + seq_len + 1 ≤ len`.
    pub fn window_count(&self, seq_len: usize) -> usize {
        self.tokens.len().saturating_sub(seq_len)
    }
}

/// Batch geometry plus the seed that fixes which windows are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSpec {
    pub batch: usize,
    pub seq_len: usize,
    pub seed: u64,
}

impl BatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(Error::InvalidParam {
                name: "batch",
                detail: "batch size must be at least 1".into(),
            });
        }
        if self.seq_len == 0 {
            return Err(Error::InvalidParam {
                name: "seq-len",
                detail: "sequence length must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Materializes the windows at `starts`: `x[b][i] = tokens[s_b + i]` and
/// `y` the same shifted one token right, both row-major `(B, seq_len)`.
pub fn make_batch(
    corpus: &Corpus,
    starts: &[usize],
    seq_len: usize,
) -> Result<(Vec<u32>, Vec<u32>)> {
    let limit = corpus.window_count(seq_len);
    if let Some(&bad) = starts.iter().find(|&&s| s >= limit) {
        return Err(Error::Data {
            detail: format!(
                "window start {bad} out of range ({limit} windows of length {seq_len})"
            ),
        });
    }
    let toks = corpus.tokens();
    let mut x = Vec::with_capacity(starts.len() * seq_len);
    let mut y = Vec::with_capacity(starts.len() * seq_len);
    for &s in starts {
        x.extend_from_slice(&toks[s..s + seq_len]);
        y.extend_from_slice(&toks[s + 1..s + seq_len + 1]);
    }
    Ok((x, y))
}

/// Endless seeded stream of window batches over one corpus.
#[derive(Debug)]
pub struct BatchStream<'a> {
    corpus: &'a Corpus,
    spec: BatchSpec,
    rng: ChaCha8Rng,
}

impl BatchStream<'_> {
    /// Draws `batch` window starts uniformly and materializes them.
    /// Returns `(starts, x, y)`.
    pub fn next_batch(&mut self) -> Result<(Vec<usize>, Vec<u32>, Vec<u32>)> {
        let windows = self.corpus.window_count(self.spec.seq_len);
        let starts = draw_batch_with(&mut self.rng, windows, self.spec.batch)?;
        let (x, y) = make_batch(self.corpus, &starts, self.spec.seq_len)?;
        Ok((starts, x, y))
    }
}

/// Seeded batch stream; rejects a corpus too short to form even one window.
pub fn make_batches<'a>(corpus: &'a Corpus, spec: &BatchSpec) -> Result<BatchStream<'a>> {
    spec.validate()?;
    if corpus.window_count(spec.seq_len) == 0 {
        return Err(Error::Data {
            detail: format!(
                "corpus of {} tokens is too short for windows of length {} plus a shifted target",
                corpus.len(),
                spec.seq_len
            ),
        });
    }
    Ok(BatchStream {
        corpus,
        spec: *spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
    })
}
