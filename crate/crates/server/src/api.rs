use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, patch, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use audiolabel_core::annotations::{
    is_valid_username, summarize, write_summary_csv, Label, LabelChanges, SummaryFilter,
};
use audiolabel_core::audio_io::{self, AudioClip};
use audiolabel_core::dsp::{self, Extent, FilterMode, SelectionBox, StftParams, WindowFn};
use audiolabel_core::project::{display_name, ClassEntry, ClassGroup, ClassList, SiteMetadata};
use audiolabel_core::render::{self, list_palettes};

use crate::error::ApiError;
use crate::range::serve_bytes;
use crate::session::{Session, Settings};
use crate::{AppState, USER_HEADER};

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

pub(crate) fn routes() -> Router<Arc<AppState>> {
    Router::new()
        .route("/api/files", get(list_files))
        .route("/api/files/{file}/segments/{index}/spectrogram", get(spectrogram))
        .route("/api/files/{file}/segments/{index}/audio", get(segment_audio))
        .route("/api/files/{file}/segments/{index}/filter", post(filter_audio))
        .route("/api/files/{file}/labels", get(list_labels).post(create_label))
        .route("/api/files/{file}/metadata", get(file_metadata))
        .route("/api/audio/{token}", get(filtered_audio))
        .route("/api/labels/export", get(export_labels))
        .route("/api/labels/{id}", patch(edit_label).delete(delete_label))
        .route("/api/summary", get(summary))
        .route("/api/sites", get(list_sites))
        .route(
            "/api/classes",
            get(get_classes).post(add_class).delete(remove_class_query),
        )
        .route("/api/classes/{name}", delete(remove_class_path))
        .route("/api/palettes", get(palettes))
        .route("/api/session", get(get_session).put(put_session))
}

/// Caller identity from `X-Username`; `None` when the header is absent.
pub(crate) struct User(pub Option<String>);

impl<S: Send + Sync> FromRequestParts<S> for User {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        let Some(raw) = parts.headers.get(USER_HEADER) else {
            return Ok(User(None));
        };
        let name = raw.to_str().unwrap_or("").trim();
        if !is_valid_username(name) {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_username",
                "X-Username must match [A-Za-z0-9_-]{1,64}",
            )
            .with_field("X-Username"));
        }
        Ok(User(Some(name.to_string())))
    }
}

impl User {
    fn as_deref(&self) -> Option<&str> {
        self.0.as_deref()
    }

    fn key(&self) -> String {
        self.0.clone().unwrap_or_else(|| "tmp".into())
    }
}

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "body".into());
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", msg).with_field(field)
    })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn session_of(state: &AppState, user: &User) -> Session {
    let mut sessions = state.sessions.lock().unwrap_or_else(|e| e.into_inner());
    sessions
        .entry(user.key())
        .or_insert_with(|| {
            Session::new(
                user.0.clone(),
                state.project.species.site_names().next().map(str::to_string),
                state.config.clip_seconds,
            )
        })
        .clone()
}

fn update_session(state: &AppState, user: &User, f: impl FnOnce(&mut Session)) -> Session {
    let current = session_of(state, user);
    let mut sessions = state.sessions.lock().unwrap_or_else(|e| e.into_inner());
    let entry = sessions.entry(user.key()).or_insert(current);
    f(entry);
    entry.clone()
}

fn audio_file(state: &AppState, name: &str) -> ApiResult<std::path::PathBuf> {
    state
        .project
        .audio_path(name)
        .filter(|p| p.is_file())
        .ok_or_else(|| ApiError::not_found("file_not_found", format!("no audio file named {name:?}")))
}

fn read_file(state: &AppState, name: &str) -> ApiResult<Vec<u8>> {
    let path = audio_file(state, name)?;
    std::fs::read(&path).map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- files

#[derive(Debug, Serialize)]
struct FileEntry {
    file_name: String,
    n_labels: usize,
    duration_s: Option<f64>,
    n_segments: usize,
}

async fn list_files(State(state): Shared, user: User) -> ApiResult<Json<Vec<FileEntry>>> {
    let audio_dir = state.project.audio_dir();
    if !audio_dir.is_dir() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "audio_dir_missing",
            format!(
                "audio folder {} does not exist; create it and add RECORDER_YYYYMMDD_HHMMSS.wav files",
                audio_dir.display()
            ),
        ));
    }
    let clip_seconds = session_of(&state, &user).settings.clip_seconds;
    blocking(move || {
        let names = state
            .project
            .audio_files()
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let labels = state.store.labels(user.as_deref())?;
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let info = std::fs::read(audio_dir.join(&name))
                .ok()
                .and_then(|b| audio_io::wav_info(&b).ok());
            out.push(FileEntry {
                n_labels: labels.iter().filter(|l| l.file_name == name).count(),
                duration_s: info.as_ref().map(|i| i.duration_s()),
                n_segments: info
                    .map(|i| audio_io::n_segments(i.n_frames, i.sample_rate_hz, clip_seconds))
                    .unwrap_or(0),
                file_name: name,
            });
        }
        Ok(Json(out))
    })
    .await
}

type QueryPairs = Query<Vec<(String, String)>>;

fn query_map(pairs: &[(String, String)]) -> HashMap<&str, &str> {
    pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect()
}

fn parse_opt<T: std::str::FromStr>(q: &HashMap<&str, &str>, key: &str) -> ApiResult<Option<T>> {
    match q.get(key) {
        None | Some(&"") => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| ApiError::invalid(key, format!("cannot parse {key}={v:?}"))),
    }
}

fn parse_bool(q: &HashMap<&str, &str>, key: &str) -> ApiResult<bool> {
    match q.get(key).copied() {
        None | Some("") | Some("0") | Some("false") => Ok(false),
        Some("1") | Some("true") => Ok(true),
        Some(v) => Err(ApiError::invalid(key, format!("expected true or false, got {v:?}"))),
    }
}

/// Parses `t0,t1,f0,f1`.
fn parse_zoom(raw: &str) -> ApiResult<SelectionBox> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| ApiError::invalid("zoom", "expected t_min,t_max,f_min,f_max"))?;
    let [t0, t1, f0, f1] = parts[..] else {
        return Err(ApiError::invalid("zoom", "expected t_min,t_max,f_min,f_max"));
    };
    SelectionBox::new(t0, t1, f0, f1).map_err(|e| ApiError::invalid("zoom", e.to_string()))
}

/// STFT parameters from `window`, `overlap` and `window_fn` query keys over
/// the session's values.
fn stft_from_query(q: &HashMap<&str, &str>, base: &Settings) -> ApiResult<StftParams> {
    let window_size = parse_opt(q, "window")?.unwrap_or(base.window_size);
    let overlap_fraction = parse_opt(q, "overlap")?.unwrap_or(base.overlap);
    let window_fn = match q.get("window_fn") {
        Some(v) if !v.is_empty() => {
            WindowFn::parse(v).ok_or_else(|| ApiError::invalid("window_fn", format!("unknown window {v:?}")))?
        }
        _ => base.window_fn,
    };
    let p = StftParams {
        window_size,
        overlap_fraction,
        window_fn,
    };
    p.validate()?;
    Ok(p)
}

fn load_segment(state: &AppState, file: &str, index: usize, settings: &Settings, gain_db: f64) -> ApiResult<(AudioClip, Vec<u8>)> {
    let bytes = read_file(state, file)?;
    let clip = audio_io::decode_wav(&bytes)?;
    let seg = audio_io::segment(&clip, index, settings.clip_seconds)?;
    let seg = if gain_db == 0.0 {
        seg
    } else {
        audio_io::apply_gain(&seg, gain_db)?
    };
    Ok((seg, bytes))
}

fn extent_headers(headers: &mut HeaderMap, e: &Extent) {
    for (name, v) in [
        ("x-extent-t0", e.t0_s),
        ("x-extent-t1", e.t1_s),
        ("x-extent-f0", e.f0_hz),
        ("x-extent-f1", e.f1_hz),
    ] {
        headers.insert(name, HeaderValue::from_str(&v.to_string()).expect("numeric header"));
    }
}

async fn spectrogram(
    State(state): Shared,
    user: User,
    Path((file, index)): Path<(String, usize)>,
    Query(pairs): QueryPairs,
    req_headers: HeaderMap,
) -> ApiResult<Response> {
    let settings = session_of(&state, &user).settings;
    let q = query_map(&pairs);
    let stft_params = stft_from_query(&q, &settings)?;
    let mut render_params = settings.render_params();
    if let Some(p) = q.get("palette").filter(|p| !p.is_empty()) {
        render_params.palette = p.to_string();
    }
    if let Some(f) = parse_opt(&q, "floor_db")? {
        render_params.contrast_floor_db = f;
    }
    if let Some(w) = parse_opt(&q, "width")? {
        render_params.width_px = w;
    }
    if let Some(h) = parse_opt(&q, "height")? {
        render_params.height_px = h;
    }
    render_params.validate()?;
    let zoom = match q.get("zoom").filter(|z| !z.is_empty()) {
        Some(z) => Some(parse_zoom(z)?),
        None => None,
    };
    let gain_db: f64 = parse_opt(&q, "gain_db")?.unwrap_or(settings.gain_db);
    let noise_reduce = parse_bool(&q, "noise_reduce")?;

    let canonical = format!(
        "{file}|{index}|{}|{stft_params:?}|{render_params:?}|{zoom:?}|{gain_db}|{noise_reduce}",
        settings.clip_seconds
    );
    let if_none_match = req_headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);

    blocking(move || {
        let (seg, bytes) = load_segment(&state, &file, index, &settings, gain_db)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let etag: String = digest[..16].iter().map(|b| format!("{b:02x}")).collect();
        let etag = format!("\"{etag}\"");
        let mut headers = HeaderMap::new();
        headers.insert(header::ETAG, HeaderValue::from_str(&etag).expect("hex etag"));
        headers.insert(header::CACHE_CONTROL, HeaderValue::from_static("no-cache"));

        let (png, extent) = match zoom {
            Some(z) => {
                let img = render::zoom_recompute_with(&seg, &z, &stft_params, &render_params, noise_reduce)
                    .map_err(|e| {
                        let mut err = ApiError::from(e);
                        if err.field.as_deref() == Some("box") {
                            err.field = Some("zoom".into());
                        }
                        err
                    })?;
                (img.png, img.raster.extent)
            }
            None => {
                let mut spec = dsp::stft(&seg, &stft_params)?;
                if noise_reduce {
                    spec = dsp::noise_reduce(&spec);
                }
                let db = dsp::to_db(&spec, render_params.contrast_floor_db)?;
                let raster = render::rasterize(&db, &render_params)?;
                (raster.to_png()?, raster.extent)
            }
        };
        extent_headers(&mut headers, &extent);
        if if_none_match.as_deref() == Some(etag.as_str()) {
            return Ok((StatusCode::NOT_MODIFIED, headers).into_response());
        }
        headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
        Ok((StatusCode::OK, headers, png).into_response())
    })
    .await
}

async fn segment_audio(
    State(state): Shared,
    user: User,
    Path((file, index)): Path<(String, usize)>,
    Query(pairs): QueryPairs,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let settings = session_of(&state, &user).settings;
    let q = query_map(&pairs);
    let gain_db: f64 = parse_opt(&q, "gain_db")?.unwrap_or(settings.gain_db);
    let wav = blocking(move || {
        let (seg, _) = load_segment(&state, &file, index, &settings, gain_db)?;
        Ok(audio_io::encode_wav(&seg))
    })
    .await?;
    Ok(serve_bytes(&headers, Bytes::from(wav), "audio/wav"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterRequest {
    #[serde(rename = "box")]
    bbox: Option<SelectionBox>,
    f_range: Option<[f64; 2]>,
    #[serde(default)]
    mode: FilterMode,
    #[serde(default)]
    noise_reduce: bool,
    gain_db: Option<f64>,
    window: Option<usize>,
    overlap: Option<f64>,
    window_fn: Option<WindowFn>,
}

#[derive(Debug, Serialize)]
struct FilterResponse {
    token: String,
    audio_url: String,
}

async fn filter_audio(
    State(state): Shared,
    user: User,
    Path((file, index)): Path<(String, usize)>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: FilterRequest = parse_json(&body)?;
    match (&req.bbox, &req.f_range, req.noise_reduce) {
        (Some(_), Some(_), _) => {
            return Err(ApiError::invalid("box", "give either box or f_range, not both"));
        }
        (None, None, false) => {
            return Err(ApiError::invalid("box", "give box, f_range or noise_reduce"));
        }
        _ => {}
    }
    let settings = session_of(&state, &user).settings;
    let stft_params = StftParams {
        window_size: req.window.unwrap_or(settings.window_size),
        overlap_fraction: req.overlap.unwrap_or(settings.overlap),
        window_fn: req.window_fn.unwrap_or(settings.window_fn),
    };
    stft_params.validate()?;
    let gain_db = req.gain_db.unwrap_or(settings.gain_db);

    let state2 = Arc::clone(&state);
    let wav = blocking(move || {
        let (seg, _) = load_segment(&state2, &file, index, &settings, gain_db)?;
        let mut spec = dsp::stft(&seg, &stft_params)?;
        if req.noise_reduce {
            spec = dsp::noise_reduce(&spec);
        }
        if let Some(b) = &req.bbox {
            spec = dsp::box_filter(&spec, b, req.mode)?;
        } else if let Some([f0, f1]) = req.f_range {
            spec = dsp::band_filter(&spec, f0, f1, req.mode).map_err(|e| {
                let mut err = ApiError::from(e);
                err.field = Some("f_range".into());
                err
            })?;
        }
        let out = dsp::istft(&spec)?;
        Ok(audio_io::encode_wav(&out))
    })
    .await?;

    let token = state
        .cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(Bytes::from(wav), Instant::now());
    let resp = FilterResponse {
        audio_url: format!("/api/audio/{token}"),
        token,
    };
    Ok((StatusCode::CREATED, Json(resp)).into_response())
}

async fn filtered_audio(State(state): Shared, Path(token): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let wav = state
        .cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(&token, Instant::now())
        .ok_or_else(|| ApiError::new(StatusCode::GONE, "audio_expired", "filtered audio expired or unknown"))?;
    Ok(serve_bytes(&headers, wav, "audio/wav"))
}

// ---------------------------------------------------------------- labels

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewLabel {
    t_min_s: f64,
    t_max_s: f64,
    f_min_hz: f64,
    f_max_hz: f64,
    class_name: String,
    confidence_pct: Option<i64>,
    call_type: Option<String>,
    notes: Option<String>,
    /// Accept a class outside the caller's current class list.
    #[serde(default)]
    external: bool,
}

async fn list_labels(State(state): Shared, user: User, Path(file): Path<String>) -> ApiResult<Json<Vec<Label>>> {
    audio_file(&state, &file)?;
    Ok(Json(state.store.list_labels(user.as_deref(), &file)?))
}

fn current_class_list(state: &AppState, session: &Session) -> Option<ClassList> {
    let site = session.selected_site.as_deref()?;
    state.project.class_list(site, &session.custom_classes).ok()
}

async fn create_label(
    State(state): Shared,
    user: User,
    Path(file): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: NewLabel = parse_json(&body)?;
    audio_file(&state, &file)?;
    let session = session_of(&state, &user);
    if !req.external {
        if let Some(list) = current_class_list(&state, &session) {
            if !list.contains(&req.class_name) {
                return Err(ApiError::invalid(
                    "class_name",
                    format!(
                        "{:?} is not in the class list for {}; add it or set external",
                        req.class_name, list.site
                    ),
                ));
            }
        }
    }
    let confidence_pct = match req.confidence_pct {
        None => 100,
        Some(c) => u8::try_from(c)
            .ok()
            .filter(|c| *c <= 100)
            .ok_or_else(|| ApiError::invalid("confidence_pct", format!("must lie in 0..=100, got {c}")))?,
    };
    let bbox = SelectionBox {
        t_min_s: req.t_min_s,
        t_max_s: req.t_max_s,
        f_min_hz: req.f_min_hz,
        f_max_hz: req.f_max_hz,
    };
    let mut label = Label::new(&file, bbox, &req.class_name, &user.key());
    label.confidence_pct = confidence_pct;
    label.call_type = req.call_type;
    label.notes = req.notes;
    let store_user = user.0.clone();
    let state2 = Arc::clone(&state);
    let saved = blocking(move || {
        let id = state2.store.save_label(store_user.as_deref(), label)?;
        Ok(state2.store.get_label(store_user.as_deref(), &id)?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(saved)).into_response())
}

async fn edit_label(State(state): Shared, user: User, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Label>> {
    let changes: LabelChanges = serde_json::from_slice(&body).map_err(|e| {
        let msg = e.to_string();
        let immutable = ["id", "created_at", "labeller", "file_name"]
            .into_iter()
            .find(|f| msg.contains(&format!("`{f}`")));
        match immutable {
            Some(f) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "immutable_field", msg).with_field(f),
            None => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", msg),
        }
    })?;
    let edited = blocking(move || Ok(state.store.edit_label(user.as_deref(), &id, &changes)?)).await?;
    Ok(Json(edited))
}

async fn delete_label(State(state): Shared, user: User, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || Ok(state.store.delete_label(user.as_deref(), &id)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn export_labels(State(state): Shared, user: User) -> ApiResult<Response> {
    let csv = state.store.export_all(user.as_deref())?;
    let disposition = format!("attachment; filename=\"labels_{}.csv\"", user.key());
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("text/csv; charset=utf-8")),
            (
                header::CONTENT_DISPOSITION,
                HeaderValue::from_str(&disposition).expect("validated username"),
            ),
        ],
        csv,
    )
        .into_response())
}

/// `?file=<substring>&class=<name>` (class may repeat or be comma-separated)
/// `&format=csv|json`.
async fn summary(State(state): Shared, user: User, Query(pairs): QueryPairs) -> ApiResult<Response> {
    let mut filter = SummaryFilter::default();
    let mut csv = false;
    for (k, v) in &pairs {
        match k.as_str() {
            "file" if !v.is_empty() => filter.file_pattern = Some(v.clone()),
            "class" if !v.is_empty() => filter
                .classes
                .get_or_insert_with(Vec::new)
                .extend(v.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty())),
            "format" => match v.as_str() {
                "csv" => csv = true,
                "json" | "" => csv = false,
                _ => return Err(ApiError::invalid("format", "expected csv or json")),
            },
            _ => {}
        }
    }
    let known = state.project.audio_files().unwrap_or_default();
    let rows = summarize(&state.store.labels(user.as_deref())?, &known, &filter);
    if csv {
        Ok((
            [(header::CONTENT_TYPE, HeaderValue::from_static("text/csv; charset=utf-8"))],
            write_summary_csv(&rows),
        )
            .into_response())
    } else {
        Ok(Json(rows).into_response())
    }
}

#[derive(Debug, Serialize)]
struct MetadataResponse {
    file_name: String,
    recorder_name: Option<String>,
    /// `YYYY-MM-DDTHH:MM:SS`, local to the recorder.
    recorded_at: Option<String>,
    start_offset_s: f64,
    filename_parsed: bool,
    /// False when the recorder is not in the location list; `site` is then null.
    available: bool,
    site: Option<SiteMetadata>,
}

async fn file_metadata(State(state): Shared, Path(file): Path<String>) -> ApiResult<Json<MetadataResponse>> {
    audio_file(&state, &file)?;
    let (parsed, meta) = state.project.metadata(&file);
    Ok(Json(MetadataResponse {
        file_name: parsed.file_name,
        recorder_name: parsed.recorder_name,
        recorded_at: meta.recorded_at.map(|d| d.format("%Y-%m-%dT%H:%M:%S").to_string()),
        start_offset_s: parsed.start_offset_s,
        filename_parsed: !parsed.metadata_unavailable,
        available: meta.site.is_some(),
        site: meta.site,
    }))
}

// ---------------------------------------------------------------- config

#[derive(Debug, Serialize)]
struct SiteEntry {
    name: String,
    n_species: usize,
}

async fn list_sites(State(state): Shared) -> Json<Vec<SiteEntry>> {
    let species = &state.project.species;
    Json(
        species
            .site_names()
            .map(|s| SiteEntry {
                name: s.to_string(),
                n_species: species.species(s).map_or(0, |v| v.len()),
            })
            .collect(),
    )
}

#[derive(Debug, Serialize)]
struct ClassView {
    name: String,
    group: ClassGroup,
    color: &'static str,
    display_name: String,
}

#[derive(Debug, Serialize)]
struct ClassesResponse {
    site: String,
    use_bto_codes: bool,
    classes: Vec<ClassView>,
}

fn classes_view(state: &AppState, list: &ClassList, use_codes: bool) -> ClassesResponse {
    ClassesResponse {
        site: list.site.clone(),
        use_bto_codes: use_codes,
        classes: list
            .entries()
            .into_iter()
            .map(|ClassEntry { name, group }| ClassView {
                display_name: display_name(&name, &state.project.bto, use_codes),
                color: group.color(),
                group,
                name,
            })
            .collect(),
    }
}

fn resolve_site(state: &AppState, session: &Session, requested: Option<&str>) -> ApiResult<String> {
    match requested.filter(|s| !s.is_empty()) {
        Some(s) => Ok(s.to_string()),
        None => session
            .selected_site
            .clone()
            .or_else(|| state.project.species.site_names().next().map(str::to_string))
            .ok_or_else(|| ApiError::not_found("site_not_found", "no sites configured")),
    }
}

/// `?site=` (defaults to the session's site) `&bto=true|false` (defaults to
/// the session's setting).
async fn get_classes(State(state): Shared, user: User, Query(pairs): QueryPairs) -> ApiResult<Json<ClassesResponse>> {
    let q = query_map(&pairs);
    let session = session_of(&state, &user);
    let site = resolve_site(&state, &session, q.get("site").copied())?;
    let use_codes = match q.get("bto") {
        Some(_) => parse_bool(&q, "bto")?,
        None => session.settings.use_bto_codes,
    };
    let list = state.project.class_list(&site, &session.custom_classes)?;
    Ok(Json(classes_view(&state, &list, use_codes)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassRequest {
    name: String,
    site: Option<String>,
}

async fn add_class(State(state): Shared, user: User, body: Bytes) -> ApiResult<Response> {
    let req: ClassRequest = parse_json(&body)?;
    let session = session_of(&state, &user);
    let site = resolve_site(&state, &session, req.site.as_deref())?;
    let list = state.project.class_list(&site, &session.custom_classes)?;
    let updated = list.add_class(&req.name)?;
    let session = update_session(&state, &user, |s| s.custom_classes = updated.custom.clone());
    let view = classes_view(&state, &updated, session.settings.use_bto_codes);
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

fn remove_class(state: &AppState, user: &User, name: &str, site: Option<&str>) -> ApiResult<Json<ClassesResponse>> {
    let session = session_of(state, user);
    let site = resolve_site(state, &session, site)?;
    let list = state.project.class_list(&site, &session.custom_classes)?;
    let updated = list.remove_class(name)?;
    let session = update_session(state, user, |s| s.custom_classes = updated.custom.clone());
    Ok(Json(classes_view(state, &updated, session.settings.use_bto_codes)))
}

async fn remove_class_query(State(state): Shared, user: User, Query(pairs): QueryPairs) -> ApiResult<Json<ClassesResponse>> {
    let q = query_map(&pairs);
    let name = q
        .get("name")
        .ok_or_else(|| ApiError::invalid("name", "missing class name"))?;
    remove_class(&state, &user, name, q.get("site").copied())
}

async fn remove_class_path(
    State(state): Shared,
    user: User,
    Path(name): Path<String>,
    Query(pairs): QueryPairs,
) -> ApiResult<Json<ClassesResponse>> {
    let q = query_map(&pairs);
    remove_class(&state, &user, &name, q.get("site").copied())
}

async fn palettes() -> Json<Vec<&'static str>> {
    Json(list_palettes())
}

// ---------------------------------------------------------------- session

#[derive(Debug, Serialize)]
struct SessionView {
    #[serde(flatten)]
    session: Session,
    classes: Option<ClassesResponse>,
}

fn session_view(state: &AppState, session: Session) -> SessionView {
    let classes = current_class_list(state, &session).map(|l| classes_view(state, &l, session.settings.use_bto_codes));
    SessionView { session, classes }
}

async fn get_session(State(state): Shared, user: User) -> Json<SessionView> {
    let s = session_of(&state, &user);
    Json(session_view(&state, s))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionUpdate {
    selected_site: Option<String>,
    /// Partial settings; omitted keys keep their current values.
    settings: Option<serde_json::Map<String, serde_json::Value>>,
}

async fn put_session(State(state): Shared, user: User, body: Bytes) -> ApiResult<Json<SessionView>> {
    let req: SessionUpdate = parse_json(&body)?;
    let current = session_of(&state, &user);
    if let Some(site) = &req.selected_site {
        if state.project.species.species(site).is_none() {
            return Err(ApiError::not_found("site_not_found", format!("unknown site {site:?}")).with_field("selected_site"));
        }
    }
    let settings = match req.settings {
        None => current.settings.clone(),
        Some(patch) => {
            let mut merged = match serde_json::to_value(&current.settings) {
                Ok(serde_json::Value::Object(m)) => m,
                _ => return Err(ApiError::internal("settings serialization")),
            };
            merged.extend(patch);
            let s: Settings = serde_json::from_value(serde_json::Value::Object(merged)).map_err(|e| {
                let msg = e.to_string();
                let field = msg.split('`').nth(1).unwrap_or("settings").to_string();
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", msg).with_field(field)
            })?;
            s.validate()?;
            s
        }
    };
    let updated = update_session(&state, &user, |s| {
        if let Some(site) = req.selected_site {
            s.selected_site = Some(site);
        }
        s.settings = settings;
    });
    Ok(Json(session_view(&state, updated)))
}
