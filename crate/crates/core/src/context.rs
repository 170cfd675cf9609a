//! Left/right context bigrams around dictionary matches.

use crate::bigram::Context;
use crate::corpus::ArticleSet;
use crate::lexicon::Lexicon;
use crate::ngram::{count_global_bigrams, FreqTable, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ContextPair {
    pub left: Context,
    pub right: Context,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("span {start}+{length} is outside a sequence of length {len}")]
pub struct SpanError {
    pub start: usize,
    pub length: usize,
    pub len: usize,
}

pub fn context_of(seq: &[char], start: usize, length: usize) -> Result<ContextPair, SpanError> {
    let end = start.checked_add(length).filter(|&e| e <= seq.len());
    let end = end.ok_or(SpanError {
        start,
        length,
        len: seq.len(),
    })?;
    Ok(ContextPair {
        left: Context::left_of(seq, start),
        right: Context::right_of(seq, end),
    })
}

#[derive(Clone, Debug)]
pub struct Harvest {
    pub left: FreqTable,
    pub right: FreqTable,
    /// Total dictionary matches, including those whose contexts were both dropped.
    pub matches: usize,
}

/// Records the contexts of every case-sensitive longest match. `<NONE><NONE>`
/// sides are not counted; half-sentinel bigrams are.
///
/// `unigram_type_count` is the corpus-wide distinct character count, shared
/// by all tables for the unseen-type estimate.
pub fn harvest(set: &ArticleSet, lex: &Lexicon, unigram_type_count: u64) -> Harvest {
    let matcher = lex.matcher(false);
    let mut left = FreqTable::new(Position::Left, unigram_type_count);
    let mut right = FreqTable::new(Position::Right, unigram_type_count);
    let mut matches = 0;
    for article in set {
        let seq = article.chars();
        for m in matcher.scan(seq) {
            matches += 1;
            if let Some(b) = Context::left_of(seq, m.start).bigram() {
                left.add(b, 1);
            }
            if let Some(b) = Context::right_of(seq, m.end()).bigram() {
                right.add(b, 1);
            }
        }
    }
    Harvest {
        left,
        right,
        matches,
    }
}

/// Raw global, left and right tables for one lexicon generation.
pub fn training_tables(set: &ArticleSet, lex: &Lexicon) -> (FreqTable, Harvest) {
    let global = count_global_bigrams(set);
    let h = harvest(set, lex, global.unigram_type_count());
    (global, h)
}
