//! Candidate enumeration, likelihood-ratio scoring and top-N selection.
//!
//! Every substring of admissible length is a candidate. Its score is the
//! geometric mean of two likelihood ratios, one per side:
//! `P(context | next to a known name) / P(context | anywhere)`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bigram::Context;
use crate::corpus::{Article, ArticleSet};
use crate::lexicon::Lexicon;
use crate::ngram::{smooth_table, SmoothedTable, SmoothingConfig, SmoothingError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionString {
    pub text: String,
    pub left: Context,
    pub right: Context,
    pub article_id: String,
    pub start: usize,
}

/// All `(head, length)` substrings of the body with their boundary-coded contexts.
pub fn enumerate(
    article: &Article,
    min_len: usize,
    max_len: usize,
) -> impl Iterator<Item = ExtractionString> + '_ {
    let seq = article.chars();
    let n = seq.len();
    let heads = if min_len == 0 || n < min_len {
        0
    } else {
        n - min_len + 1
    };
    (0..heads).flat_map(move |h| {
        let longest = max_len.min(n - h);
        (min_len..=longest).map(move |len| ExtractionString {
            text: seq[h..h + len].iter().collect(),
            left: Context::left_of(seq, h),
            right: Context::right_of(seq, h + len),
            article_id: article.id().to_string(),
            start: h,
        })
    })
}

const PAIRS: [(char, char); 4] = [('「', '」'), ('『', '』'), ('（', '）'), ('(', ')')];

/// Per-pair bracket depth, fed one character at a time.
#[derive(Clone, Copy, Debug, Default)]
struct ParenTracker {
    depth: [i32; 4],
    broken: bool,
}

impl ParenTracker {
    fn push(&mut self, c: char) {
        for (i, (open, close)) in PAIRS.iter().enumerate() {
            if c == *open {
                self.depth[i] += 1;
            } else if c == *close {
                self.depth[i] -= 1;
                if self.depth[i] < 0 {
                    self.broken = true;
                }
            }
        }
    }

    fn balanced(&self) -> bool {
        !self.broken && self.depth == [0; 4]
    }
}

/// True when every 「」『』（）() opener is closed, in order, within `text`.
pub fn balanced_parens(text: &str) -> bool {
    let mut t = ParenTracker::default();
    text.chars().for_each(|c| t.push(c));
    t.balanced()
}

/// The three smoothed tables a lexicon generation is scored against.
#[derive(Clone, Debug)]
pub struct Models {
    pub global: SmoothedTable,
    pub left: SmoothedTable,
    pub right: SmoothedTable,
    /// Dictionary matches found while harvesting.
    pub matches: usize,
}

impl Models {
    pub fn build(
        set: &ArticleSet,
        lex: &Lexicon,
        smoothing: &SmoothingConfig,
    ) -> Result<Self, SmoothingError> {
        let (global, harvest) = crate::context::training_tables(set, lex);
        Ok(Models {
            global: smooth_table(&global, smoothing)?,
            left: smooth_table(&harvest.left, smoothing)?,
            right: smooth_table(&harvest.right, smoothing)?,
            matches: harvest.matches,
        })
    }

    pub fn ln_ratio_left(&self, ctx: &Context) -> f64 {
        ln_ratio(ctx, &self.left, &self.global)
    }

    pub fn ln_ratio_right(&self, ctx: &Context) -> f64 {
        ln_ratio(ctx, &self.right, &self.global)
    }

    pub fn score(&self, ext: &ExtractionString) -> f64 {
        score(ext, &self.global, &self.left, &self.right)
    }
}

/// `ln(P_side(ctx) / P_global(ctx))`; zero (a neutral ratio) for `<NONE><NONE>`.
fn ln_ratio(ctx: &Context, side: &SmoothedTable, global: &SmoothedTable) -> f64 {
    match ctx {
        Context::Bigram(b) => side.ln_prob(b) - global.ln_prob(b),
        Context::Missing => 0.0,
    }
}

fn combine(ln_left: f64, ln_right: f64) -> f64 {
    (0.5 * (ln_left + ln_right)).exp()
}

/// `sqrt(LR_left * LR_right)`, evaluated in log space.
pub fn score(
    ext: &ExtractionString,
    global: &SmoothedTable,
    left: &SmoothedTable,
    right: &SmoothedTable,
) -> f64 {
    combine(
        ln_ratio(&ext.left, left, global),
        ln_ratio(&ext.right, right, global),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub text: String,
    pub score: f64,
    pub left: Context,
    pub right: Context,
    pub article_id: String,
    pub offset: usize,
}

/// Score descending, then text, then earliest provenance.
pub fn rank_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.text.cmp(&b.text))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub top_n: usize,
    /// Skip candidates with an unmatched 「」『』（）() character.
    pub paren_filter: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            min_len: 2,
            max_len: 50,
            top_n: 2000,
            paren_filter: true,
        }
    }
}

pub const POOL_HEADER: &str = "rank\tscore\tleft\ttext\tright\tarticle_id\toffset";

/// `rank \t score \t left \t text \t right \t article_id \t offset` under a
/// header line. Scores use the shortest form that parses back exactly.
pub fn ranked_tsv<'a>(items: impl IntoIterator<Item = &'a ScoredCandidate>) -> String {
    use std::fmt::Write as _;
    let mut out = String::from(POOL_HEADER);
    out.push('\n');
    for (i, c) in items.into_iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            c.score,
            c.left,
            c.text,
            c.right,
            c.article_id,
            c.offset
        );
    }
    out
}

/// Top-N candidates, unique by text, sorted by [`rank_order`].
#[derive(Clone, Debug, PartialEq)]
pub struct RankedPool {
    pub capacity: usize,
    pub items: Vec<ScoredCandidate>,
}

impl RankedPool {
    pub fn to_tsv(&self) -> String {
        ranked_tsv(&self.items)
    }
}

/// Best occurrence of one text. Ties keep the earliest occurrence.
#[derive(Clone, Copy, Debug)]
struct Best {
    score: f64,
    article: usize,
    start: usize,
    len: usize,
}

/// Result of one scoring pass over the corpus.
#[derive(Debug)]
pub(crate) struct ScanOutcome {
    pub new: Vec<ScoredCandidate>,
    /// Best occurrence of each tracked text that was seen at all.
    pub tracked: HashMap<String, ScoredCandidate>,
}

fn materialize(set: &ArticleSet, text: &str, b: &Best) -> ScoredCandidate {
    let article = &set.articles()[b.article];
    let seq = article.chars();
    ScoredCandidate {
        text: text.to_string(),
        score: b.score,
        left: Context::left_of(seq, b.start),
        right: Context::right_of(seq, b.start + b.len),
        article_id: article.id().to_string(),
        offset: b.start,
    }
}

fn offer<'a>(map: &mut HashMap<&'a str, Best>, text: &'a str, cand: Best) {
    map.entry(text)
        .and_modify(|b| {
            if cand.score > b.score {
                *b = cand;
            }
        })
        .or_insert(cand);
}

/// Drops entries that can no longer reach the top `n`: anything scoring
/// below the current n-th best. Returns the new threshold.
fn compact(map: &mut HashMap<&str, Best>, n: usize) -> f64 {
    let mut scores: Vec<f64> = map.values().map(|b| b.score).collect();
    let (_, nth, _) = scores.select_nth_unstable_by(n - 1, |a, b| b.total_cmp(a));
    let threshold = *nth;
    map.retain(|_, b| b.score >= threshold);
    threshold
}

/// Scores every admissible occurrence. Texts in `lex` are skipped; texts in
/// `tracked` get their best occurrence reported separately and never compete
/// for the `top_n` new slots.
pub(crate) fn scan_with(
    set: &ArticleSet,
    lex: &Lexicon,
    models: &Models,
    cfg: &ScanConfig,
    tracked: &HashSet<String>,
) -> ScanOutcome {
    let n = cfg.top_n;
    let cap = (8 * n).max(4096);
    let mut best: HashMap<&str, Best> = HashMap::new();
    let mut tracked_best: HashMap<&str, Best> = HashMap::new();
    let mut threshold = f64::NEG_INFINITY;

    if cfg.min_len >= 1 && cfg.min_len <= cfg.max_len {
        for (ai, article) in set.articles().iter().enumerate() {
            let seq = article.chars();
            let body = article.body();
            let len = seq.len();
            if len < cfg.min_len {
                continue;
            }
            let bytes: Vec<usize> = body
                .char_indices()
                .map(|(i, _)| i)
                .chain(std::iter::once(body.len()))
                .collect();
            let left: Vec<f64> = (0..len)
                .map(|h| models.ln_ratio_left(&Context::left_of(seq, h)))
                .collect();
            let right: Vec<f64> = (0..=len)
                .map(|e| models.ln_ratio_right(&Context::right_of(seq, e)))
                .collect();

            for h in 0..=len - cfg.min_len {
                let mut parens = ParenTracker::default();
                seq[h..h + cfg.min_len - 1]
                    .iter()
                    .for_each(|&c| parens.push(c));
                let longest = cfg.max_len.min(len - h);
                for l in cfg.min_len..=longest {
                    parens.push(seq[h + l - 1]);
                    if cfg.paren_filter && !parens.balanced() {
                        continue;
                    }
                    let s = combine(left[h], right[h + l]);
                    let cand = Best {
                        score: s,
                        article: ai,
                        start: h,
                        len: l,
                    };
                    let text = &body[bytes[h]..bytes[h + l]];
                    if tracked.contains(text) {
                        offer(&mut tracked_best, text, cand);
                        continue;
                    }
                    if n == 0 || s < threshold || lex.contains(text) {
                        continue;
                    }
                    offer(&mut best, text, cand);
                    if best.len() > cap {
                        threshold = compact(&mut best, n);
                    }
                }
            }
        }
    }

    let mut new: Vec<ScoredCandidate> = best.iter().map(|(t, b)| materialize(set, t, b)).collect();
    new.sort_by(rank_order);
    new.truncate(n);

    let tracked = tracked_best
        .iter()
        .map(|(t, b)| (t.to_string(), materialize(set, t, b)))
        .collect();
    ScanOutcome { new, tracked }
}

/// Scores all candidates outside the lexicon and keeps the best `top_n` texts.
pub fn scan_and_rank(
    set: &ArticleSet,
    lex: &Lexicon,
    models: &Models,
    cfg: &ScanConfig,
) -> RankedPool {
    RankedPool {
        capacity: cfg.top_n,
        items: scan_with(set, lex, models, cfg, &HashSet::new()).new,
    }
}
