//! The extraction loop: retrain on the current dictionary, scan, judge,
//! and fold accepted names back into the dictionary.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bigram::Context;
use crate::candidate::{
    rank_order, ranked_tsv, scan_with, Models, ScanConfig, ScoredCandidate, POOL_HEADER,
};
use crate::corpus::ArticleSet;
use crate::evaluator::{compute_metrics, AnswerSet, EvalError, Metrics};
use crate::lexicon::{Lexicon, LexiconError};
use crate::ngram::{SmoothingConfig, SmoothingError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pending,
    Accept,
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pending => "PENDING",
            Verdict::Accept => "ACCEPT",
            Verdict::Reject => "REJECT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown verdict {0:?}")]
pub struct ParseVerdictError(pub String);

impl FromStr for Verdict {
    type Err = ParseVerdictError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PENDING" => Ok(Verdict::Pending),
            "ACCEPT" => Ok(Verdict::Accept),
            "REJECT" => Ok(Verdict::Reject),
            _ => Err(ParseVerdictError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JudgeError {
    #[error("judge unavailable: {0}")]
    Unavailable(String),
    #[error("judge returned {got} verdicts for {expected} items")]
    Mismatch { expected: usize, got: usize },
}

/// Decides candidates in batches. Implementations may leave items `Pending`.
pub trait Judge {
    fn judge(&mut self, items: &[&PoolItem]) -> Result<Vec<Verdict>, JudgeError>;
}

/// Accepts exactly the texts in a fixed answer set.
#[derive(Clone, Debug)]
pub struct OracleJudge {
    answers: AnswerSet,
}

impl OracleJudge {
    pub fn new(answers: AnswerSet) -> Self {
        OracleJudge { answers }
    }
}

impl Judge for OracleJudge {
    fn judge(&mut self, items: &[&PoolItem]) -> Result<Vec<Verdict>, JudgeError> {
        Ok(items
            .iter()
            .map(|i| {
                if self.answers.contains(&i.candidate.text) {
                    Verdict::Accept
                } else {
                    Verdict::Reject
                }
            })
            .collect())
    }
}

pub fn headless_judge(answers: AnswerSet) -> OracleJudge {
    OracleJudge::new(answers)
}

/// Leaves everything pending; verdicts arrive later from a person.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeferredJudge;

impl Judge for DeferredJudge {
    fn judge(&mut self, items: &[&PoolItem]) -> Result<Vec<Verdict>, JudgeError> {
        Ok(vec![Verdict::Pending; items.len()])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolItem {
    pub candidate: ScoredCandidate,
    /// Iteration (1-based) that first extracted this text.
    pub iteration: u32,
}

/// Every candidate extracted so far, unique by text.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidatePool {
    items: BTreeMap<String, PoolItem>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<&PoolItem> {
        self.items.get(text)
    }

    pub fn contains(&self, text: &str) -> bool {
        self.items.contains_key(text)
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn insert(&mut self, item: PoolItem) {
        self.items.insert(item.candidate.text.clone(), item);
    }

    /// Replaces the stored occurrence when `cand` scores strictly higher.
    pub fn overwrite_if_higher(&mut self, cand: ScoredCandidate) -> bool {
        match self.items.get_mut(&cand.text) {
            Some(item) if cand.score > item.candidate.score => {
                item.candidate = cand;
                true
            }
            _ => false,
        }
    }

    /// Items in rank order.
    pub fn ranked(&self) -> Vec<&PoolItem> {
        let mut v: Vec<&PoolItem> = self.items.values().collect();
        v.sort_by(|a, b| rank_order(&a.candidate, &b.candidate));
        v
    }

    /// Ranked TSV export; see [`ranked_tsv`].
    pub fn to_tsv(&self) -> String {
        ranked_tsv(self.ranked().into_iter().map(|i| &i.candidate))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("pool TSV line {line}: {reason}")]
pub struct PoolParseError {
    pub line: usize,
    pub reason: String,
}

/// Reads a pool TSV back into ranked candidates.
pub fn parse_pool_tsv(text: &str) -> Result<Vec<ScoredCandidate>, PoolParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line == POOL_HEADER {
            continue;
        }
        let err = |reason: String| PoolParseError {
            line: i + 1,
            reason,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let ctx = |s: &str| Context::from_str(s).map_err(|e| err(e.to_string()));
        out.push(ScoredCandidate {
            score: f[1]
                .parse()
                .map_err(|_| err(format!("bad score {:?}", f[1])))?,
            left: ctx(f[2])?,
            text: f[3].to_string(),
            right: ctx(f[4])?,
            article_id: f[5].to_string(),
            offset: f[6]
                .parse()
                .map_err(|_| err(format!("bad offset {:?}", f[6])))?,
        });
    }
    Ok(out)
}

/// Which pool items count as "matching candidates" for recall.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallBasis {
    #[default]
    AllPool,
    AcceptedOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub iterations: u32,
    pub scan: ScanConfig,
    pub smoothing: SmoothingConfig,
    /// Apply the parenthesis filter only from the second iteration on.
    pub paren_filter_from_second: bool,
    pub recall_basis: RecallBasis,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            iterations: 2,
            scan: ScanConfig::default(),
            smoothing: SmoothingConfig::default(),
            paren_filter_from_second: false,
            recall_basis: RecallBasis::AllPool,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub metrics: Metrics,
    pub pool_size: usize,
    pub new_candidates: usize,
    pub rescored: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub pending: usize,
    pub lexicon_size: usize,
    pub dictionary_matches: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub text: String,
    pub from: Verdict,
    pub to: Verdict,
    pub unix_time: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum BootstrapError {
    #[error("dictionary is empty")]
    EmptyLexicon,
    #[error(transparent)]
    Smoothing(#[from] SmoothingError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Metrics(#[from] EvalError),
    #[error("iteration {iteration} stopped before judging finished: {source}")]
    Judge {
        iteration: u32,
        #[source]
        source: JudgeError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JudgmentError {
    #[error("{0:?} is not in the candidate pool")]
    NotInPool(String),
    #[error("{text:?} is already {current}; pass override to change it")]
    Conflict { text: String, current: Verdict },
    #[error("{0:?} is already in the dictionary")]
    AlreadyInLexicon(String),
    #[error("a verdict cannot be reset to PENDING")]
    ResetToPending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgmentChange {
    Unchanged,
    Recorded,
    Overridden,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapState {
    pub iteration: u32,
    pub seeds: BTreeSet<String>,
    pub lexicon: Lexicon,
    pub pool: CandidatePool,
    pub judgments: BTreeMap<String, Verdict>,
    pub history: Vec<IterationRecord>,
    pub audit: Vec<AuditEntry>,
}

impl BootstrapState {
    pub fn new(seeds: Lexicon) -> Self {
        BootstrapState {
            iteration: 0,
            seeds: seeds.iter().map(String::from).collect(),
            lexicon: seeds,
            pool: CandidatePool::default(),
            judgments: BTreeMap::new(),
            history: Vec::new(),
            audit: Vec::new(),
        }
    }

    pub fn verdict(&self, text: &str) -> Verdict {
        self.judgments
            .get(text)
            .copied()
            .unwrap_or(Verdict::Pending)
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.pool
            .texts()
            .filter(|t| self.verdict(t) == verdict)
            .count()
    }

    /// Records one verdict. Repeating the current verdict is a no-op; changing
    /// a decided verdict needs `allow_override` and leaves an audit entry.
    pub fn record_judgment(
        &mut self,
        text: &str,
        verdict: Verdict,
        allow_override: bool,
    ) -> Result<JudgmentChange, JudgmentError> {
        if !self.pool.contains(text) {
            return Err(JudgmentError::NotInPool(text.to_string()));
        }
        let current = self.verdict(text);
        if current == verdict {
            return Ok(JudgmentChange::Unchanged);
        }
        if verdict == Verdict::Pending {
            return Err(JudgmentError::ResetToPending);
        }
        if current == Verdict::Pending {
            self.judgments.insert(text.to_string(), verdict);
            return Ok(JudgmentChange::Recorded);
        }
        if !allow_override {
            return Err(JudgmentError::Conflict {
                text: text.to_string(),
                current,
            });
        }
        if self.lexicon.contains(text) {
            return Err(JudgmentError::AlreadyInLexicon(text.to_string()));
        }
        let unix_time = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.audit.push(AuditEntry {
            seq: self.audit.len() as u64 + 1,
            text: text.to_string(),
            from: current,
            to: verdict,
            unix_time,
        });
        self.judgments.insert(text.to_string(), verdict);
        Ok(JudgmentChange::Overridden)
    }

    /// Accepted pool texts not yet in the dictionary.
    fn unabsorbed(&self) -> Vec<String> {
        self.pool
            .texts()
            .filter(|t| self.verdict(t) == Verdict::Accept && !self.lexicon.contains(t))
            .map(String::from)
            .collect()
    }

    fn absorb_accepted(&mut self) -> Result<usize, LexiconError> {
        let names = self.unabsorbed();
        if !names.is_empty() {
            self.lexicon.add_entries(&names)?;
        }
        Ok(names.len())
    }

    /// Cumulative metrics over the pool. Precision counts judged items only.
    pub fn metrics(
        &self,
        answers: Option<&AnswerSet>,
        basis: RecallBasis,
    ) -> Result<Metrics, EvalError> {
        let accepted = self.count(Verdict::Accept);
        let judged = accepted + self.count(Verdict::Reject);
        let (matching, answer_size) = match answers {
            Some(a) => {
                let matching = self
                    .pool
                    .texts()
                    .filter(|t| basis == RecallBasis::AllPool || self.verdict(t) == Verdict::Accept)
                    .filter(|t| a.contains(t))
                    .count();
                (matching, a.len())
            }
            None => (0, 0),
        };
        compute_metrics(accepted, judged, matching, answer_size)
    }

    /// One round: retrain on the dictionary, scan, merge into the pool,
    /// judge new items, grow the dictionary, record metrics.
    ///
    /// On a judge failure the merged pool is kept with unjudged items left
    /// pending, the iteration counter does not advance, and the call can be
    /// repeated.
    pub fn run_iteration(
        &mut self,
        corpus: &ArticleSet,
        judge: &mut dyn Judge,
        cfg: &BootstrapConfig,
        answers: Option<&AnswerSet>,
    ) -> Result<&IterationRecord, BootstrapError> {
        if self.lexicon.is_empty() {
            return Err(BootstrapError::EmptyLexicon);
        }
        let this_iteration = self.iteration + 1;
        let mut warnings = Vec::new();

        // A previous attempt at this round got as far as merging its scan
        // before the judge failed; only the judging is repeated.
        let resumed = self
            .pool
            .items
            .values()
            .any(|i| i.iteration == this_iteration);
        if resumed {
            warnings.push("resumed after an interrupted judging step".into());
        } else {
            // Verdicts given since the last round (e.g. by a person) count first.
            self.absorb_accepted()?;
        }

        let models = Models::build(corpus, &self.lexicon, &cfg.smoothing)?;
        if models.matches == 0 {
            warnings
                .push("no dictionary entry occurs in the corpus; context tables are empty".into());
        }

        let mut scan = cfg.scan;
        if cfg.paren_filter_from_second && this_iteration < 2 {
            scan.paren_filter = false;
        }
        let mut rescored = 0;
        let new_candidates;
        if resumed {
            new_candidates = self
                .pool
                .items
                .values()
                .filter(|i| i.iteration == this_iteration)
                .count();
        } else {
            let tracked: HashSet<String> = self
                .pool
                .texts()
                .filter(|t| !self.lexicon.contains(t))
                .map(String::from)
                .collect();
            let outcome = scan_with(corpus, &self.lexicon, &models, &scan, &tracked);
            let mut tracked_hits: Vec<ScoredCandidate> = outcome.tracked.into_values().collect();
            tracked_hits.sort_by(|a, b| a.text.cmp(&b.text));
            for cand in tracked_hits {
                rescored += usize::from(self.pool.overwrite_if_higher(cand));
            }
            new_candidates = outcome.new.len();
            for cand in outcome.new {
                self.pool.insert(PoolItem {
                    candidate: cand,
                    iteration: this_iteration,
                });
            }
        }

        let undecided: Vec<&PoolItem> = self
            .pool
            .ranked()
            .into_iter()
            .filter(|i| self.verdict(&i.candidate.text) == Verdict::Pending)
            .collect();
        let verdicts = judge.judge(&undecided).and_then(|v| {
            if v.len() == undecided.len() {
                Ok(v)
            } else {
                Err(JudgeError::Mismatch {
                    expected: undecided.len(),
                    got: v.len(),
                })
            }
        });
        let verdicts = match verdicts {
            Ok(v) => v,
            Err(source) => {
                return Err(BootstrapError::Judge {
                    iteration: this_iteration,
                    source,
                })
            }
        };
        let decided: Vec<(String, Verdict)> = undecided
            .iter()
            .zip(verdicts)
            .filter(|(_, v)| *v != Verdict::Pending)
            .map(|(i, v)| (i.candidate.text.clone(), v))
            .collect();
        self.judgments.extend(decided);

        self.absorb_accepted()?;

        let record = IterationRecord {
            iteration: this_iteration,
            metrics: self.metrics(answers, cfg.recall_basis)?,
            pool_size: self.pool.len(),
            new_candidates,
            rescored,
            accepted: self.count(Verdict::Accept),
            rejected: self.count(Verdict::Reject),
            pending: self.count(Verdict::Pending),
            lexicon_size: self.lexicon.len(),
            dictionary_matches: models.matches,
            warnings,
        };
        self.history.push(record);
        self.iteration = this_iteration;
        Ok(self.history.last().expect("just pushed"))
    }
}

/// Per-iteration cumulative metrics, one column per iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<IterationRecord>,
}

impl Report {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric");
        for r in &self.rows {
            let _ = write!(out, "\t{}", r.iteration);
        }
        out.push('\n');
        type Cell = fn(&IterationRecord) -> String;
        let lines: [(&str, Cell); 9] = [
            ("precision", |r| format!("{:.6}", r.metrics.precision)),
            ("recall", |r| format!("{:.6}", r.metrics.recall)),
            ("f_measure", |r| format!("{:.6}", r.metrics.f_measure)),
            ("extracted_journal_names", |r| {
                r.metrics.judged_correct.to_string()
            }),
            ("judged_candidates", |r| r.metrics.extracted.to_string()),
            ("matching_candidates", |r| r.metrics.matching.to_string()),
            ("answer_size", |r| r.metrics.answer_size.to_string()),
            ("pool_size", |r| r.pool_size.to_string()),
            ("dictionary_size", |r| r.lexicon_size.to_string()),
        ];
        for (name, cell) in lines {
            out.push_str(name);
            for r in &self.rows {
                out.push('\t');
                out.push_str(&cell(r));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `cfg.iterations` rounds from a fresh state.
pub fn run_bootstrap(
    corpus: &ArticleSet,
    seeds: Lexicon,
    judge: &mut dyn Judge,
    cfg: &BootstrapConfig,
    answers: Option<&AnswerSet>,
) -> Result<(BootstrapState, Report), BootstrapError> {
    let mut state = BootstrapState::new(seeds);
    for _ in 0..cfg.iterations {
        state.run_iteration(corpus, judge, cfg, answers)?;
    }
    let report = Report {
        rows: state.history.clone(),
    };
    Ok((state, report))
}
