use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use journex_core::bootstrap::{
    parse_pool_tsv, BootstrapConfig, BootstrapState, DeferredJudge, IterationRecord, Judge,
    JudgeError, OracleJudge, PoolItem, RecallBasis, Report, Verdict,
};
use journex_core::checkpoint;
use journex_core::evaluator::{
    build_answer_list, compute_metrics, AnswerSet, DEFAULT_MIN_ANSWER_LEN,
};
use journex_core::synth::{generate, SynthConfig};
use journex_core::{
    filter_articles, parse_corpus, scan_and_rank, ArticleSet, ColumnLayout, Lexicon, Models,
    ParseOptions, ScanConfig, SmoothingConfig,
};

#[derive(Parser)]
#[command(
    name = "journex",
    version,
    about = "Extract journal names from news text by bigram context"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a raw TSV corpus, keep articles mentioning journal terms.
    Ingest(IngestArgs),
    /// One training and extraction pass with a fixed dictionary.
    Scan(ScanArgs),
    /// Alternate training, extraction and judging.
    Bootstrap(BootstrapArgs),
    /// Cumulative precision, recall and F-measure for pool files.
    Eval(EvalArgs),
    /// Build an answer list from an external journal list.
    Answers(AnswersArgs),
    /// Serve the review API over a checkpoint.
    Serve(ServeArgs),
    /// Write a synthetic corpus with planted journal names.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Comma-separated terms an article body must contain.
    #[arg(long, value_delimiter = ',')]
    filter_terms: Option<Vec<String>>,
    /// Keep every article.
    #[arg(long, conflicts_with = "filter_terms")]
    no_filter: bool,
    /// Fail on the first malformed line.
    #[arg(long)]
    strict: bool,
    /// Normalize bodies to NFC.
    #[arg(long)]
    nfc: bool,
}

#[derive(Args, Clone, Copy)]
struct ScanOpts {
    #[arg(long, default_value_t = 2)]
    lmin: usize,
    #[arg(long, default_value_t = 50)]
    lmax: usize,
    #[arg(long, default_value_t = 2000)]
    top: usize,
    /// Keep candidates with unmatched brackets.
    #[arg(long)]
    no_paren_filter: bool,
}

impl ScanOpts {
    fn config(&self) -> Result<ScanConfig> {
        if self.lmin == 0 || self.lmin > self.lmax {
            bail!(
                "need 1 <= --lmin <= --lmax, got {} and {}",
                self.lmin,
                self.lmax
            );
        }
        Ok(ScanConfig {
            min_len: self.lmin,
            max_len: self.lmax,
            top_n: self.top,
            paren_filter: !self.no_paren_filter,
        })
    }
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Also write the smoothed GLOBAL, LEFT and RIGHT tables here.
    #[arg(long)]
    tables_dir: Option<PathBuf>,
    #[command(flatten)]
    scan: ScanOpts,
}

#[derive(Args)]
struct BootstrapArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Seed dictionary, one name per line. Not needed when resuming.
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    iterations: u32,
    /// `oracle:ANSWERS_FILE`, `service:URL`, or `deferred`.
    #[arg(long, default_value = "deferred")]
    judge: String,
    /// Saved after every iteration; resumed from when it exists.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    pool_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Answer set for recall; defaults to the oracle judge's answers.
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Apply the bracket filter only from the second iteration.
    #[arg(long)]
    paren_from_second: bool,
    /// Count recall matches over the whole pool or accepted items only.
    #[arg(long, default_value = "all-pool", value_parser = ["all-pool", "accepted-only"])]
    recall_basis: String,
    #[command(flatten)]
    scan: ScanOpts,
}

#[derive(Args)]
struct EvalArgs {
    /// Pool TSV per iteration, in order; metrics are cumulative.
    #[arg(long, required = true)]
    pool: Vec<PathBuf>,
    #[arg(long)]
    answers: PathBuf,
    /// `text \t verdict` lines; without it the answer set is the judge.
    #[arg(long)]
    judgments: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AnswersArgs {
    /// External journal list, one name per line.
    #[arg(long)]
    names: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Common nouns to drop, one per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_ANSWER_LEN)]
    min_len: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Static UI bundle served at `/`.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    /// Create a fresh checkpoint from these seeds if `--state` is missing.
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[command(flatten)]
    scan: ScanOpts,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    articles: usize,
    #[arg(long, default_value_t = 60)]
    names: usize,
    #[arg(long, default_value_t = 5)]
    seed_names: usize,
    #[arg(long)]
    corpus_out: PathBuf,
    #[arg(long)]
    names_out: Option<PathBuf>,
    #[arg(long)]
    seeds_out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_corpus(path: &Path) -> Result<ArticleSet> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let parsed = parse_corpus(
        std::io::BufReader::new(file),
        &ColumnLayout::default(),
        &ParseOptions::default(),
    )
    .with_context(|| format!("parsing {}", path.display()))?;
    for d in &parsed.diagnostics {
        eprintln!("warning: {}: {d}", path.display());
    }
    Ok(parsed.set)
}

fn load_lexicon(path: &Path) -> Result<Lexicon> {
    Lexicon::load(read(path)?.lines()).with_context(|| format!("dictionary {}", path.display()))
}

fn load_answers(path: &Path) -> Result<AnswerSet> {
    Ok(AnswerSet::from_lines(&read(path)?, false))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let file =
        fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let opts = ParseOptions {
        strict: a.strict,
        nfc: a.nfc,
    };
    let parsed = parse_corpus(
        std::io::BufReader::new(file),
        &ColumnLayout::default(),
        &opts,
    )?;
    for d in &parsed.diagnostics {
        eprintln!("warning: {d}");
    }
    let set = if a.no_filter {
        parsed.set
    } else {
        let terms = a
            .filter_terms
            .unwrap_or_else(journex_core::corpus::default_filter_terms);
        filter_articles(&parsed.set, &terms)?
    };
    write(&a.output, &set.to_tsv())?;
    eprintln!(
        "{} articles kept, {} lines skipped",
        set.len(),
        parsed.diagnostics.len()
    );
    Ok(())
}

fn scan(a: ScanArgs) -> Result<()> {
    let cfg = a.scan.config()?;
    let corpus = load_corpus(&a.corpus)?;
    let lex = load_lexicon(&a.seeds)?;
    let models = Models::build(&corpus, &lex, &SmoothingConfig::default())?;
    if models.matches == 0 {
        eprintln!("warning: no dictionary entry occurs in the corpus");
    }
    if let Some(dir) = &a.tables_dir {
        fs::create_dir_all(dir)?;
        write(&dir.join("global.tsv"), &models.global.to_tsv())?;
        write(&dir.join("left.tsv"), &models.left.to_tsv())?;
        write(&dir.join("right.tsv"), &models.right.to_tsv())?;
    }
    let pool = scan_and_rank(&corpus, &lex, &models, &cfg);
    write(&a.output, &pool.to_tsv())?;
    eprintln!("{} candidates written", pool.items.len());
    Ok(())
}

/// Reads verdicts recorded by a running review service.
struct ServiceJudge {
    url: String,
    client: reqwest::blocking::Client,
}

#[derive(serde::Deserialize)]
struct RemoteJudgment {
    text: String,
    verdict: Verdict,
}

impl Judge for ServiceJudge {
    fn judge(&mut self, items: &[&PoolItem]) -> std::result::Result<Vec<Verdict>, JudgeError> {
        let url = format!("{}/api/judgments", self.url.trim_end_matches('/'));
        let remote: Vec<RemoteJudgment> = self
            .client
            .get(&url)
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| JudgeError::Unavailable(e.to_string()))?;
        let known: HashMap<String, Verdict> =
            remote.into_iter().map(|j| (j.text, j.verdict)).collect();
        Ok(items
            .iter()
            .map(|i| {
                known
                    .get(&i.candidate.text)
                    .copied()
                    .unwrap_or(Verdict::Pending)
            })
            .collect())
    }
}

fn make_judge(spec: &str) -> Result<(Box<dyn Judge>, Option<AnswerSet>)> {
    if spec == "deferred" {
        return Ok((Box::new(DeferredJudge), None));
    }
    if let Some(path) = spec.strip_prefix("oracle:") {
        let answers = load_answers(Path::new(path))?;
        return Ok((Box::new(OracleJudge::new(answers.clone())), Some(answers)));
    }
    if let Some(url) = spec.strip_prefix("service:") {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(30))
            .build()?;
        return Ok((
            Box::new(ServiceJudge {
                url: url.to_string(),
                client,
            }),
            None,
        ));
    }
    bail!("--judge must be oracle:FILE, service:URL or deferred, got {spec:?}")
}

fn bootstrap(a: BootstrapArgs) -> Result<()> {
    if a.iterations == 0 {
        bail!("--iterations must be at least 1");
    }
    let corpus = load_corpus(&a.corpus)?;
    let (mut judge, oracle_answers) = make_judge(&a.judge)?;
    let answers = match &a.answers {
        Some(p) => Some(load_answers(p)?),
        None => oracle_answers,
    };
    let resume = a.checkpoint.as_deref().filter(|p| p.exists());
    let (cfg, mut state) = match resume {
        Some(path) => {
            let (cfg, state) = checkpoint::load(path)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            eprintln!("resuming at iteration {}", state.iteration);
            (cfg, state)
        }
        None => {
            let seeds = a
                .seeds
                .as_deref()
                .context("--seeds is required for a new run")?;
            let cfg = BootstrapConfig {
                iterations: a.iterations,
                scan: a.scan.config()?,
                smoothing: SmoothingConfig::default(),
                paren_filter_from_second: a.paren_from_second,
                recall_basis: match a.recall_basis.as_str() {
                    "accepted-only" => RecallBasis::AcceptedOnly,
                    _ => RecallBasis::AllPool,
                },
            };
            (cfg, BootstrapState::new(load_lexicon(seeds)?))
        }
    };
    while state.iteration < a.iterations {
        let result = state
            .run_iteration(&corpus, judge.as_mut(), &cfg, answers.as_ref())
            .map(|_| ());
        // Saved on failure too: the merged pool and pending items are kept.
        if let Some(path) = &a.checkpoint {
            checkpoint::save(path, &cfg, &state)?;
        }
        result?;
        let record = state.history.last().expect("iteration recorded");
        for w in &record.warnings {
            eprintln!("warning: iteration {}: {w}", record.iteration);
        }
        eprintln!(
            "iteration {}: pool {}, accepted {}, pending {}, dictionary {}",
            record.iteration,
            record.pool_size,
            record.accepted,
            record.pending,
            record.lexicon_size
        );
    }
    if let Some(p) = &a.pool_out {
        write(p, &state.pool.to_tsv())?;
    }
    let report = Report {
        rows: state.history.clone(),
    };
    match &a.report_out {
        Some(p) => write(p, &report.to_tsv())?,
        None => print!("{}", report.to_tsv()),
    }
    Ok(())
}

fn parse_judgments(text: &str) -> Result<HashMap<String, Verdict>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (t, v) = line
            .rsplit_once('\t')
            .with_context(|| format!("judgments line {}: expected text<TAB>verdict", i + 1))?;
        out.insert(t.to_string(), v.trim().parse()?);
    }
    Ok(out)
}

fn eval(a: EvalArgs) -> Result<()> {
    let answers = load_answers(&a.answers)?;
    let judgments = match &a.judgments {
        Some(p) => Some(parse_judgments(&read(p)?)?),
        None => None,
    };
    let mut seen: HashSet<String> = HashSet::new();
    let mut rows = Vec::new();
    for (i, path) in a.pool.iter().enumerate() {
        let items =
            parse_pool_tsv(&read(path)?).with_context(|| format!("pool {}", path.display()))?;
        seen.extend(items.into_iter().map(|c| c.text));
        let verdict = |t: &str| match &judgments {
            Some(j) => j.get(t).copied().unwrap_or(Verdict::Pending),
            None if answers.contains(t) => Verdict::Accept,
            None => Verdict::Reject,
        };
        let mut tally: BTreeMap<Verdict, usize> = BTreeMap::new();
        for t in &seen {
            *tally.entry(verdict(t)).or_default() += 1;
        }
        let accepted = tally.get(&Verdict::Accept).copied().unwrap_or(0);
        let rejected = tally.get(&Verdict::Reject).copied().unwrap_or(0);
        let matching = seen.iter().filter(|t| answers.contains(t)).count();
        let metrics = compute_metrics(accepted, accepted + rejected, matching, answers.len())?;
        rows.push(IterationRecord {
            iteration: i as u32 + 1,
            metrics,
            pool_size: seen.len(),
            new_candidates: 0,
            rescored: 0,
            accepted,
            rejected,
            pending: tally.get(&Verdict::Pending).copied().unwrap_or(0),
            lexicon_size: 0,
            dictionary_matches: 0,
            warnings: Vec::new(),
        });
    }
    let report = Report { rows };
    match &a.report {
        Some(p) => write(p, &report.to_tsv())?,
        None => print!("{}", report.to_tsv()),
    }
    Ok(())
}

fn answers(a: AnswersArgs) -> Result<()> {
    let names: Vec<String> = read(&a.names)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let stop: HashSet<String> = match &a.stoplist {
        Some(p) => read(p)?
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect(),
        None => HashSet::new(),
    };
    let corpus = load_corpus(&a.corpus)?;
    let set = build_answer_list(&names, &corpus, &stop, a.min_len);
    write(&a.output, &set.to_file_string())?;
    eprintln!("{} of {} names kept", set.len(), names.len());
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    if !a.state.exists() {
        let seeds = a.seeds.as_deref().with_context(|| {
            format!(
                "{} does not exist; pass --seeds to create it",
                a.state.display()
            )
        })?;
        let cfg = BootstrapConfig {
            scan: a.scan.config()?,
            ..BootstrapConfig::default()
        };
        checkpoint::save(&a.state, &cfg, &BootstrapState::new(load_lexicon(seeds)?))?;
    }
    let answers = a.answers.as_deref().map(load_answers).transpose()?;
    let svc = journex_review::ReviewService::open(&a.state, corpus, answers)
        .with_context(|| format!("refusing to start: checkpoint {}", a.state.display()))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(journex_review::serve(
        svc,
        SocketAddr::new(a.host, a.port),
        a.ui_dir,
    ))?;
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    if a.seed_names > a.names {
        bail!("--seed-names cannot exceed --names");
    }
    let s = generate(&SynthConfig {
        seed: a.seed,
        articles: a.articles,
        names: a.names,
        seed_names: a.seed_names,
        ..SynthConfig::default()
    });
    write(&a.corpus_out, &s.to_tsv())?;
    if let Some(p) = &a.names_out {
        write(p, &(s.names.join("\n") + "\n"))?;
    }
    if let Some(p) = &a.seeds_out {
        write(p, &(s.seeds.join("\n") + "\n"))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().cmd {
        Cmd::Ingest(a) => ingest(a),
        Cmd::Scan(a) => scan(a),
        Cmd::Bootstrap(a) => bootstrap(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Answers(a) => answers(a),
        Cmd::Serve(a) => serve(a),
        Cmd::Synth(a) => synth(a),
    }
}
