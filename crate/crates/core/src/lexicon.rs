//! The journal-name dictionary and its greedy longest-match scanner.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("dictionary has no entries")]
    Empty,
    #[error("dictionary entries must be non-empty")]
    EmptyEntry,
    #[error("dictionary entry {0:?} contains a line break")]
    LineBreak(String),
}

/// The names seeded by default: two journals in five notations each.
pub const DEFAULT_SEEDS: [&str; 10] = [
    "Scientific Reports",
    "サイエンティフィック・リポーツ",
    "サイエンティフィック・リポーツ（Scientific Reports）",
    "サイエンティフィックリポーツ",
    "サイエンティフィックリポーツ（Scientific Reports）",
    "PLOS ONE",
    "プロス・ワン",
    "プロス・ワン（PLOS ONE）",
    "プロスワン",
    "プロスワン（PLOS ONE）",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: BTreeSet<String>,
    generation: u64,
}

impl Lexicon {
    /// One entry per non-empty trimmed line; duplicates collapse.
    pub fn load<I, S>(lines: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: BTreeSet<String> = lines
            .into_iter()
            .map(|l| l.as_ref().trim().to_string())
            .filter(|l| !l.is_empty())
            .collect();
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        Ok(Lexicon {
            entries,
            generation: 0,
        })
    }

    /// Same entries, with the revision counter set (used when restoring).
    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    pub fn default_seeds() -> Self {
        Lexicon::load(DEFAULT_SEEDS).expect("seed list is non-empty")
    }

    /// Adds a batch of names verbatim. The whole batch is rejected if any
    /// name is invalid; otherwise the generation is bumped once.
    pub fn add_entries<I, S>(&mut self, names: I) -> Result<(), LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let names: Vec<String> = names.into_iter().map(|n| n.as_ref().to_string()).collect();
        for n in &names {
            if n.is_empty() {
                return Err(LexiconError::EmptyEntry);
            }
            if n.contains(['\n', '\r']) {
                return Err(LexiconError::LineBreak(n.clone()));
            }
        }
        self.entries.extend(names);
        self.generation += 1;
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Dictionary file contents: one name per line, sorted.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(e);
            out.push('\n');
        }
        out
    }

    pub fn matcher(&self, case_insensitive: bool) -> LongestMatcher {
        LongestMatcher::new(self.iter(), case_insensitive)
    }
}

/// A dictionary hit inside a character sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub start: usize,
    pub length: usize,
    /// The dictionary form, which may differ in case from the text.
    pub entry: String,
}

impl Match {
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

/// Simple case fold: single-character lowercase mappings only, so folded
/// text keeps its length.
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

#[derive(Default, Debug, Clone)]
struct Node {
    children: HashMap<char, usize>,
    entry: Option<usize>,
}

/// Character trie answering leftmost-longest, non-overlapping scans.
#[derive(Debug, Clone)]
pub struct LongestMatcher {
    nodes: Vec<Node>,
    entries: Vec<String>,
    case_insensitive: bool,
}

impl LongestMatcher {
    pub fn new<'a>(entries: impl IntoIterator<Item = &'a str>, case_insensitive: bool) -> Self {
        let mut m = LongestMatcher {
            nodes: vec![Node::default()],
            entries: Vec::new(),
            case_insensitive,
        };
        for e in entries {
            if e.is_empty() {
                continue;
            }
            let mut node = 0;
            for c in e.chars() {
                let c = m.key(c);
                node = match m.nodes[node].children.get(&c) {
                    Some(&next) => next,
                    None => {
                        m.nodes.push(Node::default());
                        let next = m.nodes.len() - 1;
                        m.nodes[node].children.insert(c, next);
                        next
                    }
                };
            }
            // Under case folding two entries can share a path; the first (smallest) wins.
            if m.nodes[node].entry.is_none() {
                m.entries.push(e.to_string());
                m.nodes[node].entry = Some(m.entries.len() - 1);
            }
        }
        m
    }

    fn key(&self, c: char) -> char {
        if self.case_insensitive {
            fold_char(c)
        } else {
            c
        }
    }

    /// Longest entry starting at `start`: `(length, entry index)`.
    fn longest_at(&self, seq: &[char], start: usize) -> Option<(usize, usize)> {
        let mut node = 0;
        let mut best = None;
        for (i, &c) in seq[start..].iter().enumerate() {
            match self.nodes[node].children.get(&self.key(c)) {
                Some(&next) => node = next,
                None => break,
            }
            if let Some(e) = self.nodes[node].entry {
                best = Some((i + 1, e));
            }
        }
        best
    }

    pub fn scan(&self, seq: &[char]) -> Vec<Match> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < seq.len() {
            match self.longest_at(seq, pos) {
                Some((length, e)) => {
                    out.push(Match {
                        start: pos,
                        length,
                        entry: self.entries[e].clone(),
                    });
                    pos += length;
                }
                None => pos += 1,
            }
        }
        out
    }

    /// True when any entry occurs anywhere in `seq`.
    pub fn occurs_in(&self, seq: &[char]) -> bool {
        (0..seq.len()).any(|p| self.longest_at(seq, p).is_some())
    }
}

pub fn longest_match_scan(seq: &[char], lex: &Lexicon, case_insensitive: bool) -> Vec<Match> {
    lex.matcher(case_insensitive).scan(seq)
}
