//! HTTP service over a bootstrap checkpoint: list candidates, record
//! verdicts, run the next iteration, and read metrics and the dictionary.
//!
//! Every mutation is written to the checkpoint before it is acknowledged.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use journex_core::bootstrap::{
    BootstrapConfig, BootstrapState, DeferredJudge, IterationRecord, JudgmentChange, JudgmentError,
    Verdict,
};
use journex_core::checkpoint::{self, CheckpointError};
use journex_core::evaluator::AnswerSet;
use journex_core::{ArticleSet, Context};

pub const SNIPPET_RADIUS: usize = 20;

struct Session {
    config: BootstrapConfig,
    state: BootstrapState,
    running: bool,
    last_error: Option<String>,
}

/// Shared service state.
pub struct ReviewService {
    corpus: Arc<ArticleSet>,
    answers: Option<Arc<AnswerSet>>,
    path: PathBuf,
    session: RwLock<Session>,
    /// Serializes checkpoint writes so the file always holds the newest state.
    writer: Mutex<()>,
}

impl ReviewService {
    /// Loads the checkpoint; a corrupt or missing file is an error.
    pub fn open(
        path: impl Into<PathBuf>,
        corpus: ArticleSet,
        answers: Option<AnswerSet>,
    ) -> Result<Arc<Self>, CheckpointError> {
        let path = path.into();
        let (config, state) = checkpoint::load(&path)?;
        Ok(Arc::new(ReviewService {
            corpus: Arc::new(corpus),
            answers: answers.map(Arc::new),
            path,
            session: RwLock::new(Session {
                config,
                state,
                running: false,
                last_error: None,
            }),
            writer: Mutex::new(()),
        }))
    }

    pub fn checkpoint_path(&self) -> &Path {
        &self.path
    }

    pub async fn snapshot(&self) -> BootstrapState {
        self.session.read().await.state.clone()
    }

    pub async fn is_running(&self) -> bool {
        self.session.read().await.running
    }

    async fn persist(&self, text: String) -> Result<(), ApiError> {
        let _w = self.writer.lock().await;
        let path = self.path.clone();
        tokio::task::spawn_blocking(move || write_atomic(&path, &text))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))?
            .map_err(|e| ApiError::internal(format!("checkpoint write failed: {e}")))
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy())
            .unwrap_or_default()
    ));
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(text.as_bytes())?;
    f.sync_all()?;
    std::fs::rename(tmp, path)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ReviewItem {
    pub rank: usize,
    pub score: f64,
    pub text: String,
    pub left: Context,
    pub right: Context,
    pub snippet: String,
    /// Character offset of `text` inside `snippet`.
    pub snippet_offset: usize,
    pub article_id: String,
    pub offset: usize,
    pub iteration: u32,
    pub verdict: Verdict,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct StatusView {
    pub iteration: u32,
    pub pool_size: usize,
    pub pending: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub lexicon_size: usize,
    pub lexicon_generation: u64,
    pub running: bool,
    pub last_error: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
pub struct CandidateQuery {
    pub status: Option<String>,
    pub iteration: Option<u32>,
    pub offset: Option<usize>,
    pub limit: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct CandidatePage {
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub items: Vec<ReviewItem>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct JudgmentRequest {
    pub text: String,
    pub verdict: String,
    #[serde(default, rename = "override")]
    pub allow_override: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct JudgmentResponse {
    pub text: String,
    pub verdict: Verdict,
    pub changed: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct JudgmentEntry {
    pub text: String,
    pub verdict: Verdict,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct MetricsView {
    pub iteration: u32,
    pub history: Vec<IterationRecord>,
}

#[derive(Deserialize, Debug, Default)]
pub struct DictionaryQuery {
    pub format: Option<String>,
}

const PLACEHOLDER: &str = "<!doctype html><meta charset=utf-8><title>journex review</title>\
<p>No UI bundle configured. The JSON API is under <code>/api/</code>.</p>";

/// Routes for the API plus static files from `ui_dir` at `/`.
pub fn router(svc: Arc<ReviewService>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/status", get(status))
        .route("/api/candidates", get(candidates))
        .route("/api/judgments", get(list_judgments).post(post_judgment))
        .route("/api/iterations", post(start_iteration))
        .route("/api/metrics", get(metrics))
        .route("/api/dictionary", get(dictionary))
        .route("/api/pool.tsv", get(pool_tsv))
        .with_state(svc);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(
    svc: Arc<ReviewService>,
    addr: SocketAddr,
    ui_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(
        "review service listening on http://{}",
        listener.local_addr()?
    );
    axum::serve(listener, router(svc, ui_dir.as_deref()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn status(State(svc): State<Arc<ReviewService>>) -> Json<StatusView> {
    let s = svc.session.read().await;
    Json(StatusView {
        iteration: s.state.iteration,
        pool_size: s.state.pool.len(),
        pending: s.state.count(Verdict::Pending),
        accepted: s.state.count(Verdict::Accept),
        rejected: s.state.count(Verdict::Reject),
        lexicon_size: s.state.lexicon.len(),
        lexicon_generation: s.state.lexicon.generation(),
        running: s.running,
        last_error: s.last_error.clone(),
    })
}

/// `±SNIPPET_RADIUS` characters around the occurrence, and where it starts.
pub fn snippet(
    corpus: &ArticleSet,
    article_id: &str,
    offset: usize,
    len: usize,
) -> (String, usize) {
    let Some(a) = corpus.get(article_id) else {
        return (String::new(), 0);
    };
    let chars = a.chars();
    let from = offset.saturating_sub(SNIPPET_RADIUS).min(chars.len());
    let to = (offset + len + SNIPPET_RADIUS).min(chars.len());
    (chars[from..to].iter().collect(), offset - from)
}

async fn candidates(
    State(svc): State<Arc<ReviewService>>,
    Query(q): Query<CandidateQuery>,
) -> Result<Json<CandidatePage>, ApiError> {
    let wanted = match q.status.as_deref() {
        None | Some("all") | Some("") => None,
        Some(s) => Some(
            s.parse::<Verdict>()
                .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?,
        ),
    };
    let offset = q.offset.unwrap_or(0);
    let limit = q.limit.unwrap_or(50).min(5000);
    let s = svc.session.read().await;
    let matching: Vec<(usize, &journex_core::bootstrap::PoolItem)> = s
        .state
        .pool
        .ranked()
        .into_iter()
        .enumerate()
        .filter(|(_, i)| wanted.is_none_or(|v| s.state.verdict(&i.candidate.text) == v))
        .filter(|(_, i)| q.iteration.is_none_or(|it| i.iteration == it))
        .collect();
    let items = matching
        .iter()
        .skip(offset)
        .take(limit)
        .map(|(rank, item)| {
            let c = &item.candidate;
            let (snip, at) = snippet(&svc.corpus, &c.article_id, c.offset, c.text.chars().count());
            ReviewItem {
                rank: rank + 1,
                score: c.score,
                text: c.text.clone(),
                left: c.left,
                right: c.right,
                snippet: snip,
                snippet_offset: at,
                article_id: c.article_id.clone(),
                offset: c.offset,
                iteration: item.iteration,
                verdict: s.state.verdict(&c.text),
            }
        })
        .collect();
    Ok(Json(CandidatePage {
        total: matching.len(),
        offset,
        limit,
        items,
    }))
}

async fn list_judgments(State(svc): State<Arc<ReviewService>>) -> Json<Vec<JudgmentEntry>> {
    let s = svc.session.read().await;
    Json(
        s.state
            .judgments
            .iter()
            .map(|(t, v)| JudgmentEntry {
                text: t.clone(),
                verdict: *v,
            })
            .collect(),
    )
}

async fn post_judgment(
    State(svc): State<Arc<ReviewService>>,
    Json(req): Json<JudgmentRequest>,
) -> Result<Json<JudgmentResponse>, ApiError> {
    let verdict: Verdict =
        req.verdict
            .parse()
            .map_err(|e: journex_core::bootstrap::ParseVerdictError| {
                ApiError::new(StatusCode::BAD_REQUEST, e.to_string())
            })?;
    let mut s = svc.session.write().await;
    if s.running {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "an iteration is running; judgments are locked",
        ));
    }
    let previous = s.state.judgments.get(&req.text).copied();
    let audit_len = s.state.audit.len();
    let change = s
        .state
        .record_judgment(&req.text, verdict, req.allow_override)
        .map_err(|e| {
            let status = match e {
                JudgmentError::NotInPool(_) => StatusCode::NOT_FOUND,
                JudgmentError::Conflict { .. } | JudgmentError::AlreadyInLexicon(_) => {
                    StatusCode::CONFLICT
                }
                JudgmentError::ResetToPending => StatusCode::BAD_REQUEST,
            };
            ApiError::new(status, e.to_string())
        })?;
    if change != JudgmentChange::Unchanged {
        let text = checkpoint::to_string(&s.config, &s.state);
        if let Err(e) = svc.persist(text).await {
            match previous {
                Some(v) => s.state.judgments.insert(req.text.clone(), v),
                None => s.state.judgments.remove(&req.text),
            };
            s.state.audit.truncate(audit_len);
            return Err(e);
        }
    }
    Ok(Json(JudgmentResponse {
        text: req.text,
        verdict,
        changed: change != JudgmentChange::Unchanged,
    }))
}

async fn start_iteration(
    State(svc): State<Arc<ReviewService>>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let (config, mut state) = {
        let mut s = svc.session.write().await;
        if s.running {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "an iteration is already running",
            ));
        }
        s.running = true;
        s.last_error = None;
        (s.config, s.state.clone())
    };
    let next = state.iteration + 1;
    let job = svc.clone();
    tokio::spawn(async move {
        let corpus = job.corpus.clone();
        let answers = job.answers.clone();
        let result = tokio::task::spawn_blocking(move || {
            let outcome = state
                .run_iteration(&corpus, &mut DeferredJudge, &config, answers.as_deref())
                .map(|_| ());
            (state, outcome)
        })
        .await;
        let mut s = job.session.write().await;
        match result {
            Ok((state, Ok(()))) => {
                let text = checkpoint::to_string(&s.config, &state);
                match job.persist(text).await {
                    Ok(()) => s.state = state,
                    Err(e) => s.last_error = Some(e.message),
                }
            }
            Ok((_, Err(e))) => s.last_error = Some(e.to_string()),
            Err(e) => s.last_error = Some(format!("iteration task failed: {e}")),
        }
        s.running = false;
    });
    Ok((
        StatusCode::ACCEPTED,
        Json(serde_json::json!({ "iteration": next })),
    ))
}

async fn metrics(State(svc): State<Arc<ReviewService>>) -> Json<MetricsView> {
    let s = svc.session.read().await;
    Json(MetricsView {
        iteration: s.state.iteration,
        history: s.state.history.clone(),
    })
}

async fn dictionary(
    State(svc): State<Arc<ReviewService>>,
    Query(q): Query<DictionaryQuery>,
) -> Response {
    let s = svc.session.read().await;
    if q.format.as_deref() == Some("text") {
        return (
            [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
            s.state.lexicon.to_file_string(),
        )
            .into_response();
    }
    Json(serde_json::json!({
        "generation": s.state.lexicon.generation(),
        "entries": s.state.lexicon.iter().collect::<Vec<_>>(),
    }))
    .into_response()
}

async fn pool_tsv(State(svc): State<Arc<ReviewService>>) -> Response {
    let s = svc.session.read().await;
    (
        [(
            header::CONTENT_TYPE,
            "text/tab-separated-values; charset=utf-8",
        )],
        s.state.pool.to_tsv(),
    )
        .into_response()
}
