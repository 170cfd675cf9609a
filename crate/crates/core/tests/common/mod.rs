//! Reference implementations used by the integration tests. They are
//! written from the definitions, share no code with the library, and favour
//! obviousness over speed.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Spec = BTreeMap<u64, u64>;

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Per-count corrected frequencies plus the unseen estimate, or `None` when
/// there are no singletons.
#[derive(Debug, Clone)]
pub struct OracleGt {
    pub by_count: BTreeMap<u64, f64>,
    pub gt_zero: f64,
    pub total_mass: f64,
}

impl OracleGt {
    pub fn prob(&self, r: u64) -> f64 {
        let c = if r == 0 {
            self.gt_zero
        } else {
            self.by_count[&r]
        };
        c / self.total_mass
    }
}

/// Gale and Sampson's Simple Good-Turing with exact rationals wherever the
/// procedure is rational: averaging transform, Turing estimates, and the
/// switch test (compared in squared form, so no square root is taken).
pub fn sgt_oracle(spec: &Spec, n0: u64) -> Option<OracleGt> {
    let n1 = spec.get(&1).copied().unwrap_or(0);
    if n1 == 0 {
        return None;
    }
    let rs: Vec<u64> = spec.keys().copied().collect();

    // Z_r = N_r / (0.5 (t - q))
    let mut zs = Vec::new();
    for (i, &r) in rs.iter().enumerate() {
        let q = if i == 0 { 0 } else { rs[i - 1] };
        let t = if i + 1 < rs.len() {
            rs[i + 1]
        } else {
            2 * r - q
        };
        let z = rat(2 * spec[&r]) / rat(t - q);
        zs.push((r, z));
    }

    // Ordinary least squares on (ln r, ln Z) from raw sums.
    let slope = if zs.len() < 2 {
        -1.0
    } else {
        let n = zs.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (r, z) in &zs {
            let x = (*r as f64).ln();
            let y = z.to_f64().unwrap().ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };

    let mut by_count = BTreeMap::new();
    let mut use_regression = false;
    // 1.96^2
    let crit = BigRational::new(BigInt::from(38416), BigInt::from(10000));
    for &r in &rs {
        let rr = r as f64;
        let y = (rr + 1.0) * ((rr + 1.0) / rr).powf(slope);
        let next = spec.get(&(r + 1)).copied().unwrap_or(0);
        if !use_regression && next == 0 {
            use_regression = true;
        }
        if !use_regression {
            let nr = rat(spec[&r]);
            let nn = rat(next);
            let x = rat(r + 1) * &nn / &nr;
            let yq = BigRational::from_float(y).unwrap();
            let diff = (&x - &yq).abs();
            let var = rat((r + 1) * (r + 1)) * &nn / (&nr * &nr) * (rat(1) + &nn / &nr);
            if &diff * &diff <= &crit * var {
                use_regression = true;
            } else {
                by_count.insert(r, x.to_f64().unwrap());
                continue;
            }
        }
        by_count.insert(r, y);
    }

    let gt_zero = (rat(n1) / rat(n0)).to_f64().unwrap();
    let mut total = BigRational::zero();
    for (r, c) in &by_count {
        total += rat(spec[r]) * BigRational::from_float(*c).unwrap();
    }
    total += rat(n1);
    Some(OracleGt {
        by_count,
        gt_zero,
        total_mass: total.to_f64().unwrap(),
    })
}

/// Every integer partition of `n`, as spectra (count -> number of types).
pub fn partitions(n: u64) -> Vec<Spec> {
    fn go(rem: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Spec>) {
        if rem == 0 {
            let mut s = Spec::new();
            for &p in cur.iter() {
                *s.entry(p).or_default() += 1;
            }
            out.push(s);
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            go(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Context codes: `None` is the missing-character sentinel, and a side with
/// no characters at all is `(None, None)`.
pub type Side = (Option<char>, Option<char>);

pub fn left_side(seq: &[char], start: usize) -> Side {
    match start {
        0 => (None, None),
        1 => (None, Some(seq[0])),
        _ => (Some(seq[start - 2]), Some(seq[start - 1])),
    }
}

pub fn right_side(seq: &[char], end: usize) -> Side {
    let n = seq.len();
    if end >= n {
        (None, None)
    } else if end + 1 == n {
        (Some(seq[end]), None)
    } else {
        (Some(seq[end]), Some(seq[end + 1]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleExtraction {
    pub start: usize,
    pub text: String,
    pub left: Side,
    pub right: Side,
}

pub fn enumerate_oracle(seq: &[char], lmin: usize, lmax: usize) -> Vec<OracleExtraction> {
    let mut out = Vec::new();
    for start in 0..seq.len() {
        for end in start + 1..=seq.len() {
            let len = end - start;
            if len >= lmin && len <= lmax {
                out.push(OracleExtraction {
                    start,
                    text: seq[start..end].iter().collect(),
                    left: left_side(seq, start),
                    right: right_side(seq, end),
                });
            }
        }
    }
    out.sort();
    out
}

/// Leftmost-longest, non-overlapping, by trying every entry at every position.
pub fn longest_match_oracle(seq: &[char], entries: &[String]) -> Vec<(usize, usize, String)> {
    let entries: Vec<Vec<char>> = entries.iter().map(|e| e.chars().collect()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let best = entries
            .iter()
            .filter(|e| !e.is_empty() && seq[i..].starts_with(e))
            .max_by_key(|e| e.len());
        match best {
            Some(e) => {
                out.push((i, e.len(), e.iter().collect()));
                i += e.len();
            }
            None => i += 1,
        }
    }
    out
}

pub struct OracleTable {
    pub counts: HashMap<Side, u64>,
    pub v: u64,
}

impl OracleTable {
    pub fn spectrum(&self) -> (Spec, u64) {
        let mut s = Spec::new();
        for &c in self.counts.values() {
            *s.entry(c).or_default() += 1;
        }
        let n0 = (self.v * self.v)
            .saturating_sub(self.counts.len() as u64)
            .max(1);
        (s, n0)
    }

    /// Smoothed probability; tables with no singletons use raw counts and
    /// let the unseen types share `eps` in total.
    pub fn prob(&self, side: &Side, eps: f64) -> f64 {
        let (spec, n0) = self.spectrum();
        let r = self.counts.get(side).copied().unwrap_or(0);
        match sgt_oracle(&spec, n0) {
            Some(gt) => gt.prob(r),
            None => {
                let total: u64 = self.counts.values().sum();
                let mass = total as f64 + eps;
                if r == 0 {
                    eps / n0 as f64 / mass
                } else {
                    r as f64 / mass
                }
            }
        }
    }
}

/// The three tables from scratch: corpus bigrams, and the contexts of
/// leftmost-longest dictionary matches (fully missing sides dropped).
pub fn oracle_tables(bodies: &[&str], lexicon: &[String]) -> [OracleTable; 3] {
    let mut chars = std::collections::HashSet::new();
    let mut global = HashMap::new();
    let mut left = HashMap::new();
    let mut right = HashMap::new();
    for body in bodies {
        let seq: Vec<char> = body.chars().collect();
        chars.extend(seq.iter().copied());
        for w in seq.windows(2) {
            *global.entry((Some(w[0]), Some(w[1]))).or_default() += 1;
        }
        for (start, len, _) in longest_match_oracle(&seq, lexicon) {
            let l = left_side(&seq, start);
            let r = right_side(&seq, start + len);
            if l != (None, None) {
                *left.entry(l).or_default() += 1;
            }
            if r != (None, None) {
                *right.entry(r).or_default() += 1;
            }
        }
    }
    let v = chars.len() as u64;
    [
        OracleTable { counts: global, v },
        OracleTable { counts: left, v },
        OracleTable { counts: right, v },
    ]
}

/// Geometric mean of the two side likelihood ratios; a fully missing side is neutral.
pub fn score_oracle(tables: &[OracleTable; 3], left: &Side, right: &Side, eps: f64) -> f64 {
    let [g, l, r] = tables;
    let lr = |side: &Side, t: &OracleTable| {
        if *side == (None, None) {
            1.0
        } else {
            t.prob(side, eps) / g.prob(side, eps)
        }
    };
    (lr(left, l) * lr(right, r)).sqrt()
}

/// Ground-truth metric definitions.
pub fn f_oracle(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
