//! Tab-delimited article corpora.
//!
//! Each line is one article. Only the body column takes part in modeling; the
//! other columns ride along in [`Article::meta`] so a parsed set serializes
//! back to the same bytes.

use std::collections::HashSet;
use std::io::Read;

use unicode_normalization::UnicodeNormalization;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: expected at least {expected} tab-separated fields, found {found}")]
    TooFewColumns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: duplicate article id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },
    #[error("column layout has no column named {0:?}")]
    MissingColumn(String),
    #[error("at least one filter term is required")]
    NoFilterTerms,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Decodes UTF-8 bytes into Unicode scalar values.
pub fn to_char_seq(bytes: &[u8]) -> Result<Vec<char>, CorpusError> {
    std::str::from_utf8(bytes)
        .map(|s| s.chars().collect())
        .map_err(|e| CorpusError::Decode {
            offset: e.valid_up_to(),
        })
}

/// Column names by position, plus which columns hold the body and the id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnLayout {
    names: Vec<String>,
    body: usize,
    id: usize,
}

impl Default for ColumnLayout {
    /// url, title, body, posting date, news id, field id.
    fn default() -> Self {
        ColumnLayout {
            names: ["url", "title", "body", "date", "news_id", "field_id"]
                .map(String::from)
                .to_vec(),
            body: 2,
            id: 4,
        }
    }
}

impl ColumnLayout {
    pub fn new(names: Vec<String>, body: &str, id: &str) -> Result<Self, CorpusError> {
        let find = |n: &str| {
            names
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| CorpusError::MissingColumn(n.to_string()))
        };
        let body = find(body)?;
        let id = find(id)?;
        Ok(ColumnLayout { names, body, id })
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, idx: usize) -> String {
        self.names
            .get(idx)
            .cloned()
            .unwrap_or_else(|| format!("col{idx}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Article {
    id: String,
    body: String,
    chars: Vec<char>,
    /// Every non-body column in input order.
    meta: Vec<(String, String)>,
}

impl Article {
    /// Builds an article with no extra columns.
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        Article {
            id: id.into(),
            chars: body.chars().collect(),
            body,
            meta: Vec::new(),
        }
    }

    /// Appends a non-body column; columns are written back in call order.
    pub fn with_meta(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.push((name.into(), value.into()));
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn meta(&self, name: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArticleSet {
    layout: ColumnLayout,
    articles: Vec<Article>,
}

impl ArticleSet {
    /// Builds a set from in-memory articles. Ids must be unique.
    pub fn from_articles(articles: Vec<Article>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, a) in articles.iter().enumerate() {
            if !seen.insert(a.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    line: i + 1,
                    id: a.id.clone(),
                });
            }
        }
        Ok(ArticleSet {
            layout: ColumnLayout::default(),
            articles,
        })
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Article> {
        self.articles.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    /// Writes one TSV line per article in the set's column layout.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for a in &self.articles {
            let mut meta = a.meta.iter();
            let width = a.meta.len() + 1;
            for col in 0..width {
                if col > 0 {
                    out.push('\t');
                }
                if col == self.layout.body {
                    out.push_str(&a.body);
                } else if let Some((_, v)) = meta.next() {
                    out.push_str(v);
                }
            }
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a ArticleSet {
    type Item = &'a Article;
    type IntoIter = std::slice::Iter<'a, Article>;

    fn into_iter(self) -> Self::IntoIter {
        self.articles.iter()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
    /// Apply NFC normalization to bodies. Off by default: it changes bigram identities.
    pub nfc: bool,
}

#[derive(Debug)]
pub struct Parsed {
    pub set: ArticleSet,
    /// Problems found in lenient mode, in line order.
    pub diagnostics: Vec<CorpusError>,
}

/// Parses a TSV corpus. Empty lines are ignored; a trailing `\r` is stripped.
pub fn parse_corpus<R: Read>(
    mut input: R,
    layout: &ColumnLayout,
    opts: &ParseOptions,
) -> Result<Parsed, CorpusError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;

    let mut articles = Vec::new();
    let mut diagnostics = Vec::new();
    let mut ids = HashSet::new();
    let mut line_start = 0usize;

    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line_no = idx + 1;
        let offset = line_start;
        line_start += raw.len() + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }

        let fail = |e: CorpusError, diags: &mut Vec<CorpusError>| {
            if opts.strict {
                Err(e)
            } else {
                diags.push(e);
                Ok(())
            }
        };

        let line = match std::str::from_utf8(raw) {
            Ok(l) => l,
            Err(e) => {
                let err = CorpusError::Decode {
                    offset: offset + e.valid_up_to(),
                };
                fail(err, &mut diagnostics)?;
                continue;
            }
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < layout.width() {
            let err = CorpusError::TooFewColumns {
                line: line_no,
                expected: layout.width(),
                found: fields.len(),
            };
            fail(err, &mut diagnostics)?;
            continue;
        }

        let mut id = fields[layout.id].to_string();
        if !ids.insert(id.clone()) {
            fail(
                CorpusError::DuplicateId {
                    line: line_no,
                    id: id.clone(),
                },
                &mut diagnostics,
            )?;
            // Lenient mode keeps the article under a line-qualified id.
            id = format!("{id}@{line_no}");
            ids.insert(id.clone());
        }

        let body = if opts.nfc {
            fields[layout.body].nfc().collect()
        } else {
            fields[layout.body].to_string()
        };
        let meta = fields
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != layout.body)
            .map(|(i, v)| (layout.name(i), v.to_string()))
            .collect();
        articles.push(Article {
            id,
            chars: body.chars().collect(),
            body,
            meta,
        });
    }

    Ok(Parsed {
        set: ArticleSet {
            layout: layout.clone(),
            articles,
        },
        diagnostics,
    })
}

/// Keeps the articles whose body contains at least one of `terms`.
pub fn filter_articles(set: &ArticleSet, terms: &[String]) -> Result<ArticleSet, CorpusError> {
    let terms: Vec<&str> = terms
        .iter()
        .map(String::as_str)
        .filter(|t| !t.is_empty())
        .collect();
    if terms.is_empty() {
        return Err(CorpusError::NoFilterTerms);
    }
    Ok(ArticleSet {
        layout: set.layout.clone(),
        articles: set
            .articles
            .iter()
            .filter(|a| terms.iter().any(|t| a.body.contains(t)))
            .cloned()
            .collect(),
    })
}

/// The search condition used to build the news corpus: 学誌 OR 論文誌 OR 学術誌.
pub fn default_filter_terms() -> Vec<String> {
    ["学誌", "論文誌", "学術誌"].map(String::from).to_vec()
}
