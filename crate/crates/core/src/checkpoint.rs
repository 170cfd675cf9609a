//! Durable snapshot of a bootstrap session.
//!
//! The file is line oriented: a version line, then sections introduced by
//! `@name count` and holding `count` lines each, then `@end`. Each payload
//! line is one JSON value. A missing `@end` means the file was truncated.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    AuditEntry, BootstrapConfig, BootstrapState, CandidatePool, IterationRecord, PoolItem, Verdict,
};
use crate::lexicon::Lexicon;

pub const MAGIC: &str = "journex-checkpoint 1";

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Meta {
    iteration: u32,
    lexicon_generation: u64,
}

fn section<T: Serialize>(out: &mut String, name: &str, items: impl ExactSizeIterator<Item = T>) {
    out.push_str(&format!("@{name} {}\n", items.len()));
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("checkpoint values serialize"));
        out.push('\n');
    }
}

/// Renders the whole session as checkpoint text.
pub fn to_string(config: &BootstrapConfig, state: &BootstrapState) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    section(&mut out, "config", std::iter::once(config));
    let meta = Meta {
        iteration: state.iteration,
        lexicon_generation: state.lexicon.generation(),
    };
    section(&mut out, "meta", std::iter::once(&meta));
    section(&mut out, "seeds", state.seeds.iter());
    let lex: Vec<&str> = state.lexicon.iter().collect();
    section(&mut out, "lexicon", lex.iter());
    let pool = state.pool.ranked();
    section(&mut out, "pool", pool.iter());
    section(&mut out, "judgments", state.judgments.iter());
    section(&mut out, "history", state.history.iter());
    section(&mut out, "audit", state.audit.iter());
    out.push_str("@end\n");
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn corrupt(line: usize, reason: impl Into<String>) -> CheckpointError {
        CheckpointError::Corrupt {
            line,
            reason: reason.into(),
        }
    }

    fn next(&mut self) -> Result<(usize, &'a str), CheckpointError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Self::corrupt(0, "unexpected end of file"))
    }

    fn section<T: DeserializeOwned>(&mut self, name: &str) -> Result<Vec<T>, CheckpointError> {
        let (n, header) = self.next()?;
        let count = header
            .strip_prefix('@')
            .and_then(|h| h.strip_prefix(name))
            .and_then(|h| h.strip_prefix(' '))
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or_else(|| {
                Self::corrupt(n, format!("expected section @{name}, found {header:?}"))
            })?;
        let mut items = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let (n, line) = self.next()?;
            let item = serde_json::from_str(line).map_err(|e| Self::corrupt(n, e.to_string()))?;
            items.push(item);
        }
        Ok(items)
    }

    fn one<T: DeserializeOwned>(&mut self, name: &str) -> Result<T, CheckpointError> {
        let mut v = self.section(name)?;
        match v.len() {
            1 => Ok(v.remove(0)),
            k => Err(Self::corrupt(
                0,
                format!("section @{name} must hold 1 line, holds {k}"),
            )),
        }
    }
}

/// Parses checkpoint text.
pub fn parse(text: &str) -> Result<(BootstrapConfig, BootstrapState), CheckpointError> {
    let mut r = Reader {
        lines: text.lines().enumerate(),
    };
    let (_, magic) = r.next()?;
    if magic != MAGIC {
        return Err(Reader::corrupt(1, format!("unsupported header {magic:?}")));
    }
    let config: BootstrapConfig = r.one("config")?;
    let meta: Meta = r.one("meta")?;
    let seeds: Vec<String> = r.section("seeds")?;
    let lexicon: Vec<String> = r.section("lexicon")?;
    let pool: Vec<PoolItem> = r.section("pool")?;
    let judgments: Vec<(String, Verdict)> = r.section("judgments")?;
    let history: Vec<IterationRecord> = r.section("history")?;
    let audit: Vec<AuditEntry> = r.section("audit")?;
    match r.next() {
        Ok((_, "@end")) => {}
        Ok((n, other)) => {
            return Err(Reader::corrupt(
                n,
                format!("expected @end, found {other:?}"),
            ))
        }
        Err(_) => return Err(Reader::corrupt(0, "truncated: missing @end")),
    }

    let lexicon = Lexicon::load(&lexicon)
        .map_err(|e| Reader::corrupt(0, format!("lexicon: {e}")))?
        .with_generation(meta.lexicon_generation);
    let mut cpool = CandidatePool::default();
    for item in pool {
        cpool.insert(item);
    }
    for (text, _) in &judgments {
        if !cpool.contains(text) {
            return Err(Reader::corrupt(
                0,
                format!("judgment for {text:?} which is not in the pool"),
            ));
        }
    }
    let state = BootstrapState {
        iteration: meta.iteration,
        seeds: seeds.into_iter().collect(),
        lexicon,
        pool: cpool,
        judgments: judgments.into_iter().collect(),
        history,
        audit,
    };
    Ok((config, state))
}

/// Writes atomically: a sibling temp file is synced, then renamed over `path`.
pub fn save(
    path: &Path,
    config: &BootstrapConfig,
    state: &BootstrapState,
) -> Result<(), CheckpointError> {
    let text = to_string(config, state);
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(BootstrapConfig, BootstrapState), CheckpointError> {
    parse(&fs::read_to_string(path)?)
}
