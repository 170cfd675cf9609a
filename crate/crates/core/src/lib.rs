//! Journal-name extraction from news text using only the character bigrams
//! immediately left and right of each name.
//!
//! The pipeline: count corpus bigrams, harvest the contexts around known
//! names, smooth all three tables with Simple Good-Turing, score every
//! substring by its context likelihood ratios, and grow the dictionary from
//! judged top candidates.

pub mod bigram;
pub mod candidate;
pub mod context;
pub mod corpus;
pub mod lexicon;
pub mod ngram;

pub use bigram::{Bigram, Context};
pub use candidate::{
    balanced_parens, enumerate, scan_and_rank, ExtractionString, Models, RankedPool, ScanConfig,
    ScoredCandidate,
};
pub use context::{context_of, harvest, ContextPair};
pub use corpus::{
    filter_articles, parse_corpus, to_char_seq, Article, ArticleSet, ColumnLayout, ParseOptions,
};
pub use lexicon::{longest_match_scan, Lexicon, Match};
pub use ngram::{
    count_global_bigrams, estimate_n0, sgt_smooth, smooth_table, FreqTable, SmoothedTable,
    SmoothingConfig, Spectrum,
};
pub mod bootstrap;
pub mod checkpoint;
pub mod evaluator;
pub mod synth;
