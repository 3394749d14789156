//! Annotation server. Reads `manifest.jsonl` and `media/<id>.mp4` under the
//! data directory. Posted annotations go to `annotations.jsonl` (an overlay,
//! last write per video wins) and every write is appended to `audit.jsonl`.
//! The manifest and split files are never modified.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rebound_core::data::AnnotationStatus;
use rebound_core::formats::manifest::{self, ManifestRecord};
use rebound_core::{Annotation, ClassLabel, Flags, Manifest, ManifestEntry};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::io::AsyncWriteExt;
use tokio::sync::RwLock;

use crate::range::{parse_range, RangeOutcome};

pub const OVERLAY_FILE: &str = "annotations.jsonl";
pub const AUDIT_FILE: &str = "audit.jsonl";
pub const MAX_PAGE_SIZE: usize = 500;

pub struct AppState {
    data_dir: PathBuf,
    manifest: Manifest,
    overlay: RwLock<BTreeMap<String, Annotation>>,
}

/// Body of `POST /api/annotations`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationPost {
    pub video_id: String,
    #[serde(default)]
    pub label: Option<ClassLabel>,
    #[serde(default)]
    pub event_frame: Option<u32>,
    #[serde(default)]
    pub flags: Flags,
}

#[derive(Serialize, Deserialize)]
struct AuditEntry {
    at: String,
    video_id: String,
    previous: Option<Annotation>,
    stored: Annotation,
}

fn error(status: StatusCode, message: impl ToString) -> Response {
    (status, Json(json!({ "error": message.to_string() }))).into_response()
}

fn status_name(a: Option<&Annotation>) -> &'static str {
    match a.map(Annotation::status) {
        Some(AnnotationStatus::Valid) => "annotated",
        Some(AnnotationStatus::ClassOnly) => "class_only",
        Some(AnnotationStatus::Excluded) => "excluded",
        None => "unannotated",
    }
}

/// Parses an overlay file, keeping the last record per video.
pub fn parse_overlay(text: &str, manifest: &Manifest) -> Result<BTreeMap<String, Annotation>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let a: Annotation = serde_json::from_str(line).map_err(|e| format!("{OVERLAY_FILE} line {}: {e}", i + 1))?;
        let entry = manifest.get(&a.video_id).ok_or_else(|| format!("{OVERLAY_FILE} line {}: unknown video {:?}", i + 1, a.video_id))?;
        a.check(&entry.meta).map_err(|e| format!("{OVERLAY_FILE} line {}: {e}", i + 1))?;
        out.insert(a.video_id.clone(), a);
    }
    Ok(out)
}

impl AppState {
    pub fn load(data_dir: &Path) -> Result<Self, String> {
        let manifest = manifest::read(data_dir.join("manifest.jsonl")).map_err(|e| e.to_string())?;
        let overlay = match std::fs::read_to_string(data_dir.join(OVERLAY_FILE)) {
            Ok(text) => parse_overlay(&text, &manifest)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(format!("{OVERLAY_FILE}: {e}")),
        };
        Ok(AppState { data_dir: data_dir.to_path_buf(), manifest, overlay: RwLock::new(overlay) })
    }

    fn effective<'a>(&'a self, overlay: &'a BTreeMap<String, Annotation>, entry: &'a ManifestEntry) -> Option<&'a Annotation> {
        overlay.get(&entry.meta.id).or(entry.annotation.as_ref())
    }

    fn record(&self, overlay: &BTreeMap<String, Annotation>, entry: &ManifestEntry) -> ManifestRecord {
        let mut e = entry.clone();
        e.annotation = self.effective(overlay, entry).cloned();
        ManifestRecord::from_entry(&e)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/videos", get(list_videos))
        .route("/api/videos/{id}", get(get_video))
        .route("/api/annotations", post(post_annotation))
        .route("/api/progress", get(progress))
        .route("/media/{id}", get(media))
        .with_state(state)
}

async fn list_videos(State(st): State<Arc<AppState>>, Query(q): Query<HashMap<String, String>>) -> Response {
    let parse = |key: &str, default: usize| -> Result<usize, Response> {
        match q.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| error(StatusCode::BAD_REQUEST, format!("{key} must be a positive integer"))),
        }
    };
    let (page, per_page) = match (parse("page", 1), parse("per_page", 50)) {
        (Ok(p), Ok(n)) => (p, n.min(MAX_PAGE_SIZE)),
        (Err(r), _) | (_, Err(r)) => return r,
    };
    let overlay = st.overlay.read().await;
    let items: Vec<_> = st
        .manifest
        .entries()
        .iter()
        .skip((page - 1).saturating_mul(per_page))
        .take(per_page)
        .map(|e| {
            json!({
                "id": e.meta.id,
                "fps": e.meta.fps,
                "num_frames": e.meta.num_frames,
                "status": status_name(st.effective(&overlay, e)),
            })
        })
        .collect();
    Json(json!({ "page": page, "per_page": per_page, "total": st.manifest.len(), "items": items })).into_response()
}

async fn get_video(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(entry) = st.manifest.get(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown video {id:?}"));
    };
    let overlay = st.overlay.read().await;
    Json(st.record(&overlay, entry)).into_response()
}

async fn progress(State(st): State<Arc<AppState>>) -> Response {
    let overlay = st.overlay.read().await;
    let mut counts: BTreeMap<&str, usize> = ["annotated", "class_only", "excluded", "unannotated"].into_iter().map(|k| (k, 0)).collect();
    for e in st.manifest.entries() {
        *counts.get_mut(status_name(st.effective(&overlay, e))).expect("known status") += 1;
    }
    Json(json!({
        "total": st.manifest.len(),
        "annotated": counts["annotated"],
        "class_only": counts["class_only"],
        "excluded": counts["excluded"],
        "unannotated": counts["unannotated"],
    }))
    .into_response()
}

async fn append_line(path: &Path, line: &str) -> io::Result<()> {
    let mut f = tokio::fs::OpenOptions::new().create(true).append(true).open(path).await?;
    f.write_all(line.as_bytes()).await?;
    f.write_all(b"\n").await?;
    f.flush().await
}

async fn post_annotation(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    let post: AnnotationPost = match serde_json::from_slice(&body) {
        Ok(p) => p,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e),
    };
    let Some(entry) = st.manifest.get(&post.video_id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown video {:?}", post.video_id));
    };
    let ann = Annotation { video_id: post.video_id, label: post.label, event_frame: post.event_frame, flags: post.flags };
    if let Err(e) = ann.check(&entry.meta) {
        return error(StatusCode::UNPROCESSABLE_ENTITY, e);
    }
    // One writer at a time keeps the overlay file and the in-memory map in the same order.
    let mut overlay = st.overlay.write().await;
    let previous = st.effective(&overlay, entry).cloned();
    let line = serde_json::to_string(&ann).expect("annotation serializes");
    if let Err(e) = append_line(&st.data_dir.join(OVERLAY_FILE), &line).await {
        return error(StatusCode::INTERNAL_SERVER_ERROR, e);
    }
    let audit = AuditEntry {
        at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        video_id: ann.video_id.clone(),
        previous,
        stored: ann.clone(),
    };
    if let Err(e) = append_line(&st.data_dir.join(AUDIT_FILE), &serde_json::to_string(&audit).expect("audit serializes")).await {
        return error(StatusCode::INTERNAL_SERVER_ERROR, e);
    }
    overlay.insert(ann.video_id.clone(), ann);
    Json(st.record(&overlay, entry)).into_response()
}

async fn media(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, headers: HeaderMap) -> Response {
    // Only manifest ids map to files, so the id can never escape media/.
    if !st.manifest.contains(&id) {
        return error(StatusCode::NOT_FOUND, format!("unknown video {id:?}"));
    }
    let path = st.data_dir.join("media").join(format!("{id}.mp4"));
    let data = match tokio::fs::read(&path).await {
        Ok(d) => d,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return error(StatusCode::NOT_FOUND, format!("no media for {id:?}")),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e),
    };
    let len = data.len() as u64;
    let range = headers.get(header::RANGE).and_then(|v| v.to_str().ok()).map_or(RangeOutcome::Full, |h| parse_range(h, len));
    let base = Response::builder().header(header::ACCEPT_RANGES, "bytes").header(header::CONTENT_TYPE, "video/mp4");
    let resp = match range {
        RangeOutcome::Full => base.status(StatusCode::OK).header(header::CONTENT_LENGTH, len).body(Body::from(data)),
        RangeOutcome::Partial { start, end } => {
            let slice = data[start as usize..=end as usize].to_vec();
            base.status(StatusCode::PARTIAL_CONTENT)
                .header(header::CONTENT_RANGE, format!("bytes {start}-{end}/{len}"))
                .header(header::CONTENT_LENGTH, slice.len())
                .body(Body::from(slice))
        }
        RangeOutcome::Unsatisfiable => base
            .status(StatusCode::RANGE_NOT_SATISFIABLE)
            .header(header::CONTENT_RANGE, format!("bytes */{len}"))
            .body(Body::empty()),
    };
    resp.expect("static headers are valid")
}

pub async fn serve(data_dir: &Path, port: u16) -> Result<(), crate::error::CliError> {
    use crate::error::CliError;
    let state = AppState::load(data_dir).map_err(CliError::validation)?;
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError::io(Path::new(&addr.to_string()), e))?;
    eprintln!("serving {} on http://{addr}", data_dir.display());
    axum::serve(listener, router(Arc::new(state))).await.map_err(|e| CliError::io(data_dir, e))
}
