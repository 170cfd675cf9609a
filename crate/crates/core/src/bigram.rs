//! Character bigrams and the boundary sentinel used for context features.
//!
//! A slot holding `None` is the `<NONE>` code: a position past the edge of an
//! article. It lives outside the `char` value space, so a sentinel bigram can
//! never collide with a bigram of real text.

use std::fmt;
use std::str::FromStr;

/// Literal rendering of the boundary sentinel in every text format.
pub const NONE_TOKEN: &str = "<NONE>";

/// Two consecutive character slots. At most one slot may be the sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bigram(Option<char>, Option<char>);

impl Bigram {
    pub fn new(first: char, second: char) -> Self {
        Bigram(Some(first), Some(second))
    }

    /// `<NONE>` followed by `c`: a left context one character from the article start.
    pub fn leading_edge(c: char) -> Self {
        Bigram(None, Some(c))
    }

    /// `c` followed by `<NONE>`: a right context one character from the article end.
    pub fn trailing_edge(c: char) -> Self {
        Bigram(Some(c), None)
    }

    pub fn first(&self) -> Option<char> {
        self.0
    }

    pub fn second(&self) -> Option<char> {
        self.1
    }

    pub fn has_sentinel(&self) -> bool {
        self.0.is_none() || self.1.is_none()
    }
}

fn write_slot(f: &mut fmt::Formatter<'_>, slot: Option<char>) -> fmt::Result {
    match slot {
        Some(c) => write!(f, "{c}"),
        None => f.write_str(NONE_TOKEN),
    }
}

impl fmt::Display for Bigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_slot(f, self.0)?;
        write_slot(f, self.1)
    }
}

/// One side of an extraction string: a bigram, or `<NONE><NONE>` when the
/// span touches the article boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    Bigram(Bigram),
    Missing,
}

impl Context {
    pub fn bigram(&self) -> Option<Bigram> {
        match self {
            Context::Bigram(b) => Some(*b),
            Context::Missing => None,
        }
    }

    /// Left context of the span starting at `start`.
    pub fn left_of(seq: &[char], start: usize) -> Context {
        match start {
            0 => Context::Missing,
            1 => Context::Bigram(Bigram::leading_edge(seq[0])),
            s => Context::Bigram(Bigram::new(seq[s - 2], seq[s - 1])),
        }
    }

    /// Right context of the span ending (exclusively) at `end`.
    pub fn right_of(seq: &[char], end: usize) -> Context {
        match seq.len() - end {
            0 => Context::Missing,
            1 => Context::Bigram(Bigram::trailing_edge(seq[end])),
            _ => Context::Bigram(Bigram::new(seq[end], seq[end + 1])),
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Context::Bigram(b) => b.fmt(f),
            Context::Missing => write!(f, "{NONE_TOKEN}{NONE_TOKEN}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a context bigram: {0:?}")]
pub struct ParseContextError(pub String);

impl FromStr for Context {
    type Err = ParseContextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseContextError(s.to_string());
        let chars: Vec<char> = s.chars().collect();
        // A real bigram is exactly two characters; sentinel forms are longer.
        if chars.len() == 2 {
            return Ok(Context::Bigram(Bigram::new(chars[0], chars[1])));
        }
        if let Some(rest) = s.strip_prefix(NONE_TOKEN) {
            if rest == NONE_TOKEN {
                return Ok(Context::Missing);
            }
            let mut it = rest.chars();
            return match (it.next(), it.next()) {
                (Some(c), None) => Ok(Context::Bigram(Bigram::leading_edge(c))),
                _ => Err(err()),
            };
        }
        if let Some(head) = s.strip_suffix(NONE_TOKEN) {
            let mut it = head.chars();
            return match (it.next(), it.next()) {
                (Some(c), None) => Ok(Context::Bigram(Bigram::trailing_edge(c))),
                _ => Err(err()),
            };
        }
        Err(err())
    }
}

impl serde::Serialize for Context {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Context {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
