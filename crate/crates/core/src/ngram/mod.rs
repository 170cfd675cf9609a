//! Bigram frequency tables and their Good-Turing smoothed counterparts.

mod sgt;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

pub use sgt::{
    fit_log_log, sgt_smooth, turing_estimate, z_transform, GoodTuring, LogLogFit, SmoothingError,
    SWITCH_CONFIDENCE,
};

use crate::bigram::Bigram;
use crate::corpus::ArticleSet;

/// Where a table's bigrams were observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Position {
    Global,
    Left,
    Right,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Global => "GLOBAL",
            Position::Left => "LEFT",
            Position::Right => "RIGHT",
        })
    }
}

/// Raw bigram counts. Zero counts are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqTable {
    counts: HashMap<Bigram, u64>,
    position: Position,
    unigram_type_count: u64,
}

impl FreqTable {
    pub fn new(position: Position, unigram_type_count: u64) -> Self {
        FreqTable {
            counts: HashMap::new(),
            position,
            unigram_type_count,
        }
    }

    pub fn add(&mut self, bigram: Bigram, n: u64) {
        if n > 0 {
            *self.counts.entry(bigram).or_default() += n;
        }
    }

    pub fn merge(&mut self, other: &FreqTable) {
        for (b, n) in &other.counts {
            self.add(*b, *n);
        }
    }

    pub fn count(&self, bigram: &Bigram) -> u64 {
        self.counts.get(bigram).copied().unwrap_or(0)
    }

    pub fn position(&self) -> Position {
        self.position
    }

    /// Distinct characters in the whole corpus (shared by all positions).
    pub fn unigram_type_count(&self) -> u64 {
        self.unigram_type_count
    }

    pub fn types(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bigram, &u64)> {
        self.counts.iter()
    }
}

/// Counts every overlapping bigram of every body. Bigrams never cross articles.
pub fn count_global_bigrams(set: &ArticleSet) -> FreqTable {
    let mut chars = HashSet::new();
    let mut counts: HashMap<Bigram, u64> = HashMap::new();
    for article in set {
        let seq = article.chars();
        chars.extend(seq.iter().copied());
        for w in seq.windows(2) {
            *counts.entry(Bigram::new(w[0], w[1])).or_default() += 1;
        }
    }
    FreqTable {
        counts,
        position: Position::Global,
        unigram_type_count: chars.len() as u64,
    }
}

/// Unseen bigram types: `V^2 - observed`, floored at 1.
pub fn estimate_n0(unigram_type_count: u64, observed_bigram_types: u64) -> u64 {
    unigram_type_count
        .saturating_mul(unigram_type_count)
        .saturating_sub(observed_bigram_types)
        .max(1)
}

/// Frequency of frequencies: `r -> N_r`, plus the unseen-type estimate `N_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    n_of_r: BTreeMap<u64, u64>,
    n0: u64,
}

impl Spectrum {
    pub fn of(table: &FreqTable) -> Self {
        let mut n_of_r = BTreeMap::new();
        for &r in table.counts.values() {
            *n_of_r.entry(r).or_default() += 1;
        }
        Spectrum {
            n_of_r,
            n0: estimate_n0(table.unigram_type_count, table.types() as u64),
        }
    }

    /// Builds a spectrum from `(r, N_r)` pairs; pairs with `r = 0` or `N_r = 0` are ignored.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>, n0: u64) -> Self {
        let mut n_of_r = BTreeMap::new();
        for (r, n) in pairs {
            if r > 0 && n > 0 {
                *n_of_r.entry(r).or_default() += n;
            }
        }
        Spectrum {
            n_of_r,
            n0: n0.max(1),
        }
    }

    pub fn n(&self, r: u64) -> u64 {
        self.n_of_r.get(&r).copied().unwrap_or(0)
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    /// `(r, N_r)` in ascending `r`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.n_of_r.iter().map(|(r, n)| (*r, *n))
    }

    pub fn types(&self) -> u64 {
        self.n_of_r.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_of_r.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    /// Stand-in for `N_1` when a table has no singletons, so the unseen
    /// types still share a small mass `ε` while observed counts stay raw.
    /// `None` turns that case into an error.
    pub fallback_epsilon: Option<f64>,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            fallback_epsilon: Some(0.5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    SimpleGoodTuring,
    /// No singletons: raw counts, unseen types share `ε` in total.
    PseudoSingletons(f64),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::SimpleGoodTuring => f.write_str("sgt"),
            Method::PseudoSingletons(e) => write!(f, "pseudo-n1-{e}"),
        }
    }
}

/// Corrected counts and the probability model derived from them.
///
/// `prob(b) = corrected(b) / total_mass`, where `total_mass` also includes
/// `n0` unseen types at `gt_zero` each, so the distribution sums to one.
#[derive(Clone, Debug)]
pub struct SmoothedTable {
    raw: FreqTable,
    by_count: BTreeMap<u64, f64>,
    gt_zero: f64,
    n0: u64,
    total_mass: f64,
    method: Method,
}

impl SmoothedTable {
    pub fn position(&self) -> Position {
        self.raw.position
    }

    pub fn raw(&self) -> &FreqTable {
        &self.raw
    }

    pub fn corrected(&self, bigram: &Bigram) -> f64 {
        match self.raw.counts.get(bigram) {
            Some(r) => self.by_count[r],
            None => self.gt_zero,
        }
    }

    pub fn corrected_for_count(&self, r: u64) -> Option<f64> {
        if r == 0 {
            Some(self.gt_zero)
        } else {
            self.by_count.get(&r).copied()
        }
    }

    pub fn prob(&self, bigram: &Bigram) -> f64 {
        self.corrected(bigram) / self.total_mass
    }

    pub fn ln_prob(&self, bigram: &Bigram) -> f64 {
        self.corrected(bigram).ln() - self.total_mass.ln()
    }

    pub fn prob_unseen(&self) -> f64 {
        self.gt_zero / self.total_mass
    }

    pub fn gt_zero(&self) -> f64 {
        self.gt_zero
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Header line with the table parameters, then one sorted row per bigram:
    /// `bigram \t raw_count \t corrected \t prob`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "#position={}\tn0={}\tgt_zero={}\ttotal_mass={}\tmethod={}",
            self.raw.position, self.n0, self.gt_zero, self.total_mass, self.method
        );
        let mut rows: Vec<(&Bigram, &u64)> = self.raw.counts.iter().collect();
        rows.sort();
        for (b, r) in rows {
            let c = self.by_count[r];
            let _ = writeln!(out, "{b}\t{r}\t{c}\t{}", c / self.total_mass);
        }
        out
    }
}

pub fn smooth_table(
    table: &FreqTable,
    config: &SmoothingConfig,
) -> Result<SmoothedTable, SmoothingError> {
    let spectrum = Spectrum::of(table);
    let (by_count, gt_zero, method) = match sgt_smooth(&spectrum) {
        Ok(gt) => (gt.estimates, gt.gt_zero, Method::SimpleGoodTuring),
        Err(e) => {
            let eps = config.fallback_epsilon.ok_or(e)?;
            let by_count = spectrum.iter().map(|(r, _)| (r, r as f64)).collect();
            (
                by_count,
                eps / spectrum.n0() as f64,
                Method::PseudoSingletons(eps),
            )
        }
    };
    let seen: f64 = spectrum.iter().map(|(r, n)| n as f64 * by_count[&r]).sum();
    let total_mass = seen + spectrum.n0() as f64 * gt_zero;
    Ok(SmoothedTable {
        raw: table.clone(),
        by_count,
        gt_zero,
        n0: spectrum.n0(),
        total_mass,
        method,
    })
}
