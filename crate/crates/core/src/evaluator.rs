//! Cumulative precision / recall / F-measure and answer-list construction.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::ArticleSet;
use crate::lexicon::{fold_char, LongestMatcher};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("judged_correct ({correct}) exceeds extracted ({extracted})")]
    CorrectExceedsExtracted { correct: usize, extracted: usize },
    #[error("matching ({matching}) exceeds answer size ({answers})")]
    MatchingExceedsAnswers { matching: usize, answers: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub judged_correct: usize,
    pub extracted: usize,
    pub matching: usize,
    pub answer_size: usize,
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(
    judged_correct: usize,
    extracted: usize,
    matching: usize,
    answer_size: usize,
) -> Result<Metrics, EvalError> {
    if judged_correct > extracted {
        return Err(EvalError::CorrectExceedsExtracted {
            correct: judged_correct,
            extracted,
        });
    }
    if matching > answer_size {
        return Err(EvalError::MatchingExceedsAnswers {
            matching,
            answers: answer_size,
        });
    }
    let precision = ratio(judged_correct, extracted);
    let recall = ratio(matching, answer_size);
    Ok(Metrics {
        precision,
        recall,
        f_measure: f_measure(precision, recall),
        judged_correct,
        extracted,
        matching,
        answer_size,
    })
}

fn fold(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

/// Correct answer data. Membership optionally ignores case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    names: BTreeSet<String>,
    keys: HashSet<String>,
    case_insensitive: bool,
}

impl AnswerSet {
    pub fn new<I, S>(names: I, case_insensitive: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        let keys = names
            .iter()
            .map(|n| if case_insensitive { fold(n) } else { n.clone() })
            .collect();
        AnswerSet {
            names,
            keys,
            case_insensitive,
        }
    }

    /// One name per non-empty trimmed line.
    pub fn from_lines(text: &str, case_insensitive: bool) -> Self {
        AnswerSet::new(
            text.lines().map(str::trim).filter(|l| !l.is_empty()),
            case_insensitive,
        )
    }

    pub fn contains(&self, text: &str) -> bool {
        if self.case_insensitive {
            self.keys.contains(&fold(text))
        } else {
            self.keys.contains(text)
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn to_file_string(&self) -> String {
        self.names.iter().map(|n| format!("{n}\n")).collect()
    }
}

pub const DEFAULT_MIN_ANSWER_LEN: usize = 10;

/// Filters an external journal list down to usable answer data: names found
/// in the corpus by case-insensitive longest-match retrieval, minus stoplisted
/// nouns, minus names shorter than `min_len` characters.
pub fn build_answer_list(
    journal_list: &[String],
    corpus: &ArticleSet,
    noun_stoplist: &HashSet<String>,
    min_len: usize,
) -> AnswerSet {
    let matcher = LongestMatcher::new(journal_list.iter().map(String::as_str), true);
    let mut found = BTreeSet::new();
    for article in corpus {
        for m in matcher.scan(article.chars()) {
            found.insert(m.entry);
        }
    }
    let names = found
        .into_iter()
        .filter(|n| !noun_stoplist.contains(n))
        .filter(|n| n.chars().count() >= min_len);
    AnswerSet::new(names, false)
}

/// Distinct texts that are in the answer set.
pub fn match_pool<'a>(texts: impl IntoIterator<Item = &'a str>, answers: &AnswerSet) -> usize {
    texts
        .into_iter()
        .collect::<HashSet<_>>()
        .into_iter()
        .filter(|t| answers.contains(t))
        .count()
}
