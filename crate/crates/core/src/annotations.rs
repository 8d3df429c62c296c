//! Bounding-box labels persisted as one CSV file per user.
//!
//! Layout: `<labels dir>/labels_<username>.csv`, or `labels_tmp.csv` when no
//! user is given. Every mutation rewrites the user's file through a temporary
//! file and an atomic rename, under a per-user lock. Times and frequencies are
//! stored with three decimals; labels are quantized to that precision before
//! they are written so the in-memory and on-disk values agree.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::SelectionBox;

pub const CSV_HEADER: [&str; 12] = [
    "id",
    "created_at",
    "file_name",
    "t_min_s",
    "t_max_s",
    "f_min_hz",
    "f_max_hz",
    "class_name",
    "confidence_pct",
    "labeller",
    "call_type",
    "notes",
];

const TMP_USER: &str = "tmp";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },
    #[error("label {0} not found")]
    NotFound(String),
    #[error("field {0} cannot be edited")]
    ImmutableField(&'static str),
    #[error("invalid username {0:?}: expected 1-64 of [A-Za-z0-9_-]")]
    InvalidUser(String),
    #[error("malformed label file {path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn invalid(field: &'static str, message: impl Into<String>) -> AnnotationError {
    AnnotationError::Validation {
        field,
        message: message.into(),
    }
}

/// True for names matching `[A-Za-z0-9_-]{1,64}`.
pub fn is_valid_username(name: &str) -> bool {
    (1..=64).contains(&name.len())
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub file_name: String,
    #[serde(flatten)]
    pub bbox: SelectionBox,
    pub class_name: String,
    pub confidence_pct: u8,
    pub labeller: String,
    pub call_type: Option<String>,
    pub notes: Option<String>,
}

impl Label {
    /// A label with full confidence, no id yet, stamped now.
    pub fn new(file_name: &str, bbox: SelectionBox, class_name: &str, labeller: &str) -> Self {
        Label {
            id: String::new(),
            created_at: Utc::now().trunc_subsecs(0),
            file_name: file_name.to_string(),
            bbox,
            class_name: class_name.to_string(),
            confidence_pct: 100,
            labeller: labeller.to_string(),
            call_type: None,
            notes: None,
        }
    }

    /// Rounds to the stored precision and trims optional text fields.
    pub fn normalized(mut self) -> Self {
        self.created_at = self.created_at.trunc_subsecs(0);
        self.bbox = SelectionBox {
            t_min_s: round3(self.bbox.t_min_s),
            t_max_s: round3(self.bbox.t_max_s),
            f_min_hz: round3(self.bbox.f_min_hz),
            f_max_hz: round3(self.bbox.f_max_hz),
        };
        self.class_name = self.class_name.trim().to_string();
        let blank_to_none = |v: Option<String>| v.filter(|s| !s.is_empty());
        self.call_type = blank_to_none(self.call_type);
        self.notes = blank_to_none(self.notes);
        self
    }

    pub fn validate(&self) -> Result<(), AnnotationError> {
        let b = &self.bbox;
        for (field, v) in [
            ("t_min_s", b.t_min_s),
            ("t_max_s", b.t_max_s),
            ("f_min_hz", b.f_min_hz),
            ("f_max_hz", b.f_max_hz),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        if b.t_min_s < 0.0 {
            return Err(invalid("t_min_s", "must be non-negative"));
        }
        if b.t_max_s <= b.t_min_s {
            return Err(invalid("t_max_s", "must be greater than t_min_s"));
        }
        if b.f_min_hz < 0.0 {
            return Err(invalid("f_min_hz", "must be non-negative"));
        }
        if b.f_max_hz <= b.f_min_hz {
            return Err(invalid("f_max_hz", "must be greater than f_min_hz"));
        }
        if self.class_name.trim().is_empty() {
            return Err(invalid("class_name", "must not be empty"));
        }
        if self.confidence_pct > 100 {
            return Err(invalid("confidence_pct", "must lie in 0..=100"));
        }
        if self.file_name.is_empty() {
            return Err(invalid("file_name", "must not be empty"));
        }
        Ok(())
    }

    fn to_record(&self) -> [String; 12] {
        [
            self.id.clone(),
            self.created_at.format(TIMESTAMP_FORMAT).to_string(),
            self.file_name.clone(),
            format!("{:.3}", self.bbox.t_min_s),
            format!("{:.3}", self.bbox.t_max_s),
            format!("{:.3}", self.bbox.f_min_hz),
            format!("{:.3}", self.bbox.f_max_hz),
            self.class_name.clone(),
            self.confidence_pct.to_string(),
            self.labeller.clone(),
            self.call_type.clone().unwrap_or_default(),
            self.notes.clone().unwrap_or_default(),
        ]
    }

    fn from_fields(id: String, f: &[&str]) -> Result<Label, String> {
        let num = |i: usize, name: &str| -> Result<f64, String> {
            f[i].trim().parse::<f64>().map_err(|_| format!("{name}: not a number: {:?}", f[i]))
        };
        let created_at = DateTime::parse_from_rfc3339(f[0].trim())
            .map_err(|e| format!("created_at: {e}"))?
            .with_timezone(&Utc);
        let confidence_pct = f[7]
            .trim()
            .parse::<u8>()
            .map_err(|_| format!("confidence_pct: not an integer: {:?}", f[7]))?;
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        Ok(Label {
            id,
            created_at,
            file_name: f[1].to_string(),
            bbox: SelectionBox {
                t_min_s: num(2, "t_min_s")?,
                t_max_s: num(3, "t_max_s")?,
                f_min_hz: num(4, "f_min_hz")?,
                f_max_hz: num(5, "f_max_hz")?,
            },
            class_name: f[6].to_string(),
            confidence_pct,
            labeller: f[8].to_string(),
            call_type: opt(f[9]),
            notes: opt(f[10]),
        })
    }
}

/// Partial update. Only box bounds, class, confidence, call type and notes
/// are editable; setting any of the remaining fields is rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelChanges {
    pub t_min_s: Option<f64>,
    pub t_max_s: Option<f64>,
    pub f_min_hz: Option<f64>,
    pub f_max_hz: Option<f64>,
    pub class_name: Option<String>,
    pub confidence_pct: Option<i64>,
    /// Empty string clears the field.
    pub call_type: Option<String>,
    /// Empty string clears the field.
    pub notes: Option<String>,
    pub id: Option<serde::de::IgnoredAny>,
    pub created_at: Option<serde::de::IgnoredAny>,
    pub labeller: Option<serde::de::IgnoredAny>,
    pub file_name: Option<serde::de::IgnoredAny>,
}

impl LabelChanges {
    fn apply(&self, label: &Label) -> Result<Label, AnnotationError> {
        for (present, field) in [
            (self.id.is_some(), "id"),
            (self.created_at.is_some(), "created_at"),
            (self.labeller.is_some(), "labeller"),
            (self.file_name.is_some(), "file_name"),
        ] {
            if present {
                return Err(AnnotationError::ImmutableField(field));
            }
        }
        let mut out = label.clone();
        if let Some(v) = self.t_min_s {
            out.bbox.t_min_s = v;
        }
        if let Some(v) = self.t_max_s {
            out.bbox.t_max_s = v;
        }
        if let Some(v) = self.f_min_hz {
            out.bbox.f_min_hz = v;
        }
        if let Some(v) = self.f_max_hz {
            out.bbox.f_max_hz = v;
        }
        if let Some(c) = &self.class_name {
            out.class_name = c.clone();
        }
        if let Some(c) = self.confidence_pct {
            out.confidence_pct = u8::try_from(c)
                .ok()
                .filter(|c| *c <= 100)
                .ok_or_else(|| invalid("confidence_pct", format!("must lie in 0..=100, got {c}")))?;
        }
        if let Some(c) = &self.call_type {
            out.call_type = Some(c.clone());
        }
        if let Some(n) = &self.notes {
            out.notes = Some(n.clone());
        }
        let out = out.normalized();
        out.validate()?;
        Ok(out)
    }
}

/// Serializes labels with the header row; byte-stable for equal input.
pub fn write_labels_csv(labels: &[Label]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to a Vec cannot fail");
    for l in labels {
        w.write_record(l.to_record()).expect("writing to a Vec cannot fail");
    }
    w.into_inner().expect("flushing a Vec cannot fail")
}

/// Parses a label file. A UTF-8 BOM is skipped. Files without a header row
/// are read positionally: twelve columns in [`CSV_HEADER`] order, or eleven
/// columns without the id (ids are then derived from the row number).
pub fn read_labels_csv(bytes: &[u8]) -> Result<Vec<Label>, String> {
    let bytes = crate::strip_bom(bytes);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if row == 0 && rec.get(0).map(str::trim) == Some("id") {
            continue;
        }
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let fields: Vec<&str> = rec.iter().collect();
        let label = match fields.len() {
            12 => Label::from_fields(fields[0].to_string(), &fields[1..]),
            11 => Label::from_fields(format!("row-{}", row + 1), &fields),
            n => Err(format!("expected 12 columns, found {n}")),
        }
        .map_err(|e| format!("row {}: {e}", row + 1))?;
        labels.push(label);
    }
    Ok(labels)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    // Persist the rename itself; not every platform can open a directory.
    if let Some(dir) = path.parent() {
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SummaryFilter {
    /// Case-insensitive substring of the file name.
    pub file_pattern: Option<String>,
    /// Case-insensitive class names to keep; `None` keeps every class.
    pub classes: Option<Vec<String>>,
}

impl SummaryFilter {
    fn file_matches(&self, file: &str) -> bool {
        self.file_pattern
            .as_ref()
            .is_none_or(|p| file.to_lowercase().contains(&p.to_lowercase()))
    }

    fn class_matches(&self, class: &str) -> bool {
        let key = class.trim().to_lowercase();
        self.classes
            .as_ref()
            .is_none_or(|set| set.iter().any(|c| c.trim().to_lowercase() == key))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SummaryRow {
    pub file_name: String,
    pub class_name: String,
    pub count: usize,
}

/// Per-file, per-class label counts. Files from `known_files` without any
/// matching label appear once with an empty class and count 0. Rows are
/// ordered by file then class.
pub fn summarize(labels: &[Label], known_files: &[String], filter: &SummaryFilter) -> Vec<SummaryRow> {
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for l in labels {
        if filter.file_matches(&l.file_name) && filter.class_matches(&l.class_name) {
            *counts.entry((l.file_name.as_str(), l.class_name.as_str())).or_default() += 1;
        }
    }
    let mut rows: Vec<SummaryRow> = counts
        .iter()
        .map(|(&(f, c), &n)| SummaryRow {
            file_name: f.to_string(),
            class_name: c.to_string(),
            count: n,
        })
        .collect();
    for f in known_files {
        if filter.file_matches(f) && !counts.keys().any(|(file, _)| file == f) {
            rows.push(SummaryRow {
                file_name: f.clone(),
                class_name: String::new(),
                count: 0,
            });
        }
    }
    rows.sort();
    rows.dedup();
    rows
}

pub fn write_summary_csv(rows: &[SummaryRow]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(["file_name", "class_name", "count"])
        .expect("writing to a Vec cannot fail");
    for r in rows {
        w.write_record([r.file_name.as_str(), r.class_name.as_str(), &r.count.to_string()])
            .expect("writing to a Vec cannot fail");
    }
    w.into_inner().expect("flushing a Vec cannot fail")
}

/// Directory of per-user label files.
#[derive(Debug)]
pub struct LabelStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl LabelStore {
    /// Opens (creating if needed) `<root>/labels`.
    pub fn open(root: &Path) -> io::Result<Self> {
        Self::open_dir(root.join("labels"))
    }

    pub fn open_dir(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(LabelStore {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn user_key(user: Option<&str>) -> Result<&str, AnnotationError> {
        match user {
            None => Ok(TMP_USER),
            Some(u) if is_valid_username(u) => Ok(u),
            Some(u) => Err(AnnotationError::InvalidUser(u.to_string())),
        }
    }

    pub fn file_for(&self, user: Option<&str>) -> Result<PathBuf, AnnotationError> {
        Ok(self.dir.join(format!("labels_{}.csv", Self::user_key(user)?)))
    }

    fn lock_for(&self, key: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(key.to_string()).or_default().clone()
    }

    fn read_path(path: &Path) -> Result<Vec<Label>, AnnotationError> {
        match fs::read(path) {
            Ok(bytes) => read_labels_csv(&bytes).map_err(|message| AnnotationError::Parse {
                path: path.display().to_string(),
                message,
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Runs `f` on the user's labels under that user's lock and persists the result.
    fn mutate<T>(
        &self,
        user: Option<&str>,
        f: impl FnOnce(&mut Vec<Label>) -> Result<T, AnnotationError>,
    ) -> Result<T, AnnotationError> {
        let key = Self::user_key(user)?;
        let lock = self.lock_for(key);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.file_for(user)?;
        let mut labels = Self::read_path(&path)?;
        let out = f(&mut labels)?;
        write_atomic(&path, &write_labels_csv(&labels))?;
        Ok(out)
    }

    /// Every label of one user in file order.
    pub fn labels(&self, user: Option<&str>) -> Result<Vec<Label>, AnnotationError> {
        Self::read_path(&self.file_for(user)?)
    }

    /// Labels of every `labels_*.csv` in the directory, files in name order.
    pub fn all_labels(&self) -> Result<Vec<Label>, AnnotationError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("labels_") && n.ends_with(".csv"))
            })
            .collect();
        paths.sort();
        let mut out = Vec::new();
        for p in paths {
            out.extend(Self::read_path(&p)?);
        }
        Ok(out)
    }

    /// Appends a label and returns its id. An empty id is replaced by a fresh one.
    pub fn save_label(&self, user: Option<&str>, label: Label) -> Result<String, AnnotationError> {
        let mut label = label.normalized();
        label.validate()?;
        self.mutate(user, |labels| {
            if label.id.is_empty() {
                label.id = uuid::Uuid::new_v4().simple().to_string();
            } else if labels.iter().any(|l| l.id == label.id) {
                return Err(invalid("id", format!("{} already exists", label.id)));
            }
            let id = label.id.clone();
            labels.push(label);
            Ok(id)
        })
    }

    pub fn delete_label(&self, user: Option<&str>, id: &str) -> Result<(), AnnotationError> {
        self.mutate(user, |labels| {
            let pos = labels
                .iter()
                .position(|l| l.id == id)
                .ok_or_else(|| AnnotationError::NotFound(id.to_string()))?;
            labels.remove(pos);
            Ok(())
        })
    }

    pub fn edit_label(
        &self,
        user: Option<&str>,
        id: &str,
        changes: &LabelChanges,
    ) -> Result<Label, AnnotationError> {
        self.mutate(user, |labels| {
            let slot = labels
                .iter_mut()
                .find(|l| l.id == id)
                .ok_or_else(|| AnnotationError::NotFound(id.to_string()))?;
            let updated = changes.apply(slot)?;
            *slot = updated.clone();
            Ok(updated)
        })
    }

    /// Labels of one file in creation order.
    pub fn list_labels(&self, user: Option<&str>, file_name: &str) -> Result<Vec<Label>, AnnotationError> {
        Ok(self
            .labels(user)?
            .into_iter()
            .filter(|l| l.file_name == file_name)
            .collect())
    }

    pub fn get_label(&self, user: Option<&str>, id: &str) -> Result<Label, AnnotationError> {
        self.labels(user)?
            .into_iter()
            .find(|l| l.id == id)
            .ok_or_else(|| AnnotationError::NotFound(id.to_string()))
    }

    pub fn summarize(
        &self,
        user: Option<&str>,
        known_files: &[String],
        filter: &SummaryFilter,
    ) -> Result<Vec<SummaryRow>, AnnotationError> {
        Ok(summarize(&self.labels(user)?, known_files, filter))
    }

    /// The user's labels as a CSV document (header always present).
    pub fn export_all(&self, user: Option<&str>) -> Result<Vec<u8>, AnnotationError> {
        Ok(write_labels_csv(&self.labels(user)?))
    }
}
