//! Project configuration: species lists per site, recorder metadata, BTO
//! codes, and the color-grouped class list offered to labellers.
//!
//! All CSV inputs are UTF-8 with an optional byte order mark.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::{self, RecordingFile};

pub const SPECIES_LIST_FILE: &str = "species_list.csv";
pub const LOCATION_LIST_FILE: &str = "location_list.csv";
pub const BTO_CODES_FILE: &str = "bto_codes.csv";
pub const MISC_CLASSES_FILE: &str = "misc_classes.csv";
pub const AUDIO_DIR: &str = "audio";

pub const DEFAULT_MISC_CLASSES: [&str; 6] = [
    "Human",
    "Insect",
    "Weather",
    "Wind Turbine",
    "Other Noise",
    "Unknown Bird",
];

const LOCATION_COLUMNS: [&str; 7] = [
    "recorder_name",
    "lat",
    "long",
    "location_name",
    "location_county",
    "habitat_type",
    "dist_to_coastline",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{file}: {message}")]
    Invalid { file: String, message: String },
    #[error("{file}: {message}")]
    Io { file: String, message: String },
}

fn config_err(file: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        file: file.to_string(),
        message: message.into(),
    }
}

/// Trimmed, lowercased form used for every class-name comparison.
pub fn class_key(name: &str) -> String {
    name.trim().to_lowercase()
}

fn csv_rows(bytes: &[u8], file: &str) -> Result<Vec<Vec<String>>, ConfigError> {
    let text = std::str::from_utf8(crate::strip_bom(bytes))
        .map_err(|e| config_err(file, format!("not valid UTF-8: {e}")))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| config_err(file, e.to_string()))?;
        rows.push(rec.iter().map(|s| s.trim().to_string()).collect());
    }
    Ok(rows)
}

fn sort_dedup_names(names: &mut Vec<String>) {
    names.sort_by_key(|n| (n.to_lowercase(), n.clone()));
    names.dedup_by(|a, b| a.to_lowercase() == b.to_lowercase());
}

/// Site name to sorted species, in the column order of the source file.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpeciesLists {
    sites: Vec<(String, Vec<String>)>,
}

impl SpeciesLists {
    pub fn site_names(&self) -> impl Iterator<Item = &str> {
        self.sites.iter().map(|(s, _)| s.as_str())
    }

    pub fn species(&self, site: &str) -> Option<&[String]> {
        self.sites
            .iter()
            .find(|(s, _)| s == site)
            .map(|(_, v)| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Parses `species_list.csv`: the first row holds site names, each column
/// below it that site's species. Columns may differ in length; blank cells
/// are skipped.
pub fn load_species_lists(bytes: &[u8]) -> Result<SpeciesLists, ConfigError> {
    let rows = csv_rows(bytes, SPECIES_LIST_FILE)?;
    let Some(header) = rows.first() else {
        return Err(config_err(SPECIES_LIST_FILE, "file is empty"));
    };
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut sites: Vec<(String, Vec<String>)> = Vec::new();
    for col in 0..width {
        let name = header.get(col).cloned().unwrap_or_default();
        let mut species: Vec<String> = rows[1..]
            .iter()
            .filter_map(|r| r.get(col))
            .filter(|s| !s.is_empty())
            .cloned()
            .collect();
        if name.is_empty() {
            if species.is_empty() {
                continue;
            }
            return Err(config_err(
                SPECIES_LIST_FILE,
                format!("column {} has species but no site name", col + 1),
            ));
        }
        if sites.iter().any(|(s, _)| *s == name) {
            return Err(config_err(SPECIES_LIST_FILE, format!("duplicate site name {name:?}")));
        }
        sort_dedup_names(&mut species);
        sites.push((name, species));
    }
    if sites.is_empty() {
        return Err(config_err(SPECIES_LIST_FILE, "no site columns"));
    }
    Ok(SpeciesLists { sites })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SiteMetadata {
    pub recorder_name: String,
    pub lat: Option<f64>,
    pub long: Option<f64>,
    pub location_name: String,
    pub location_county: String,
    pub habitat_type: String,
    pub dist_to_coastline: Option<f64>,
    /// Additional columns as (header, value), in file order.
    pub extras: Vec<(String, String)>,
}

/// Parses `location_list.csv`. Only `recorder_name` is mandatory; missing
/// documented columns read as blank and unknown columns go to `extras`.
pub fn load_locations(bytes: &[u8]) -> Result<Vec<SiteMetadata>, ConfigError> {
    const F: &str = LOCATION_LIST_FILE;
    let rows = csv_rows(bytes, F)?;
    let Some(header) = rows.first() else {
        return Err(config_err(F, "file is empty"));
    };
    let col = |name: &str| header.iter().position(|h| h == name);
    let Some(rec_col) = col("recorder_name") else {
        return Err(config_err(F, "missing recorder_name column"));
    };
    let extra_cols: Vec<usize> = (0..header.len())
        .filter(|&i| !header[i].is_empty() && !LOCATION_COLUMNS.contains(&header[i].as_str()))
        .collect();

    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.iter().all(String::is_empty) {
            continue;
        }
        let line = i + 1;
        let cell = |c: Option<usize>| c.and_then(|c| row.get(c)).cloned().unwrap_or_default();
        let number = |name: &str, range: Option<(f64, f64)>| -> Result<Option<f64>, ConfigError> {
            let raw = cell(col(name));
            if raw.is_empty() {
                return Ok(None);
            }
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| config_err(F, format!("line {line}: {name} is not a number: {raw:?}")))?;
            if let Some((lo, hi)) = range {
                if !(lo..=hi).contains(&v) {
                    return Err(config_err(F, format!("line {line}: {name} {v} outside [{lo}, {hi}]")));
                }
            }
            Ok(Some(v))
        };
        let recorder_name = cell(Some(rec_col));
        if recorder_name.is_empty() {
            return Err(config_err(F, format!("line {line}: recorder_name is blank")));
        }
        out.push(SiteMetadata {
            recorder_name,
            lat: number("lat", Some((-90.0, 90.0)))?,
            long: number("long", Some((-180.0, 180.0)))?,
            location_name: cell(col("location_name")),
            location_county: cell(col("location_county")),
            habitat_type: cell(col("habitat_type")),
            dist_to_coastline: number("dist_to_coastline", None)?,
            extras: extra_cols
                .iter()
                .map(|&c| (header[c].clone(), cell(Some(c))))
                .collect(),
        });
    }
    Ok(out)
}

/// Species name to two-letter code.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BtoCodeTable {
    by_species: BTreeMap<String, (String, String)>,
}

impl BtoCodeTable {
    /// Code for a species, matched case-insensitively.
    pub fn code(&self, species: &str) -> Option<&str> {
        self.by_species.get(&class_key(species)).map(|(_, c)| c.as_str())
    }

    /// (species, code) pairs ordered by species.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.by_species.values().map(|(s, c)| (s.as_str(), c.as_str()))
    }

    pub fn len(&self) -> usize {
        self.by_species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_species.is_empty()
    }
}

/// Parses `bto_codes.csv` with `bto_code` and `species_name` columns.
pub fn load_bto_codes(bytes: &[u8]) -> Result<BtoCodeTable, ConfigError> {
    const F: &str = BTO_CODES_FILE;
    let rows = csv_rows(bytes, F)?;
    let Some(header) = rows.first() else {
        return Err(config_err(F, "file is empty"));
    };
    let find = |name: &str| header.iter().position(|h| h == name);
    let (Some(code_col), Some(species_col)) = (find("bto_code"), find("species_name")) else {
        return Err(config_err(F, "header must contain bto_code and species_name"));
    };
    let mut by_species = BTreeMap::new();
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.iter().all(String::is_empty) {
            continue;
        }
        let line = i + 1;
        let code = row.get(code_col).cloned().unwrap_or_default();
        let species = row.get(species_col).cloned().unwrap_or_default();
        if code.chars().count() != 2 {
            return Err(config_err(F, format!("line {line}: code {code:?} is not 2 characters")));
        }
        if species.is_empty() {
            return Err(config_err(F, format!("line {line}: species_name is blank")));
        }
        if by_species.insert(class_key(&species), (species.clone(), code)).is_some() {
            return Err(config_err(F, format!("line {line}: duplicate species {species:?}")));
        }
    }
    Ok(BtoCodeTable { by_species })
}

/// Metadata shown next to a recording.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedMetadata {
    pub site: Option<SiteMetadata>,
    pub recorded_at: Option<NaiveDateTime>,
}

/// Looks up the file's recorder (exact match) in the location list.
pub fn resolve_metadata(file: &RecordingFile, sites: &[SiteMetadata]) -> ResolvedMetadata {
    let site = file
        .recorder_name
        .as_deref()
        .and_then(|r| sites.iter().find(|s| s.recorder_name == r))
        .cloned();
    ResolvedMetadata {
        site,
        recorded_at: file.recorded_at,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassGroup {
    Core,
    Misc,
    Custom,
    Unlisted,
}

impl ClassGroup {
    pub fn color(self) -> &'static str {
        match self {
            ClassGroup::Core => "green",
            ClassGroup::Misc => "orange",
            ClassGroup::Custom => "blue",
            ClassGroup::Unlisted => "grey",
        }
    }

    pub fn rgb(self) -> [u8; 3] {
        match self {
            ClassGroup::Core => [0, 200, 0],
            ClassGroup::Misc => [255, 140, 0],
            ClassGroup::Custom => [40, 120, 255],
            ClassGroup::Unlisted => [150, 150, 150],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassError {
    #[error("{0} is already present in the list")]
    AlreadyPresent(String),
    #[error("class name must not be empty")]
    EmptyName,
    #[error("{0} is not a custom class and cannot be removed")]
    NotRemovable(String),
    #[error("{0} is not in the list")]
    NotFound(String),
    #[error("unknown site {0:?}")]
    UnknownSite(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassEntry {
    pub name: String,
    pub group: ClassGroup,
}

/// Classes offered for one site: core species, fixed miscellaneous sounds
/// and user-added custom classes. Names are unique case-insensitively
/// across all three groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassList {
    pub site: String,
    pub core: Vec<String>,
    pub misc: Vec<String>,
    pub custom: Vec<String>,
}

impl ClassList {
    /// Builds the list with the default miscellaneous classes.
    pub fn new(site: &str, species: &SpeciesLists, custom: &[String]) -> Result<Self, ClassError> {
        let misc: Vec<String> = DEFAULT_MISC_CLASSES.iter().map(|s| s.to_string()).collect();
        Self::with_misc(site, species, &misc, custom)
    }

    /// Custom entries that collide with core or misc names (or each other)
    /// are dropped, as are misc entries colliding with core species.
    pub fn with_misc(
        site: &str,
        species: &SpeciesLists,
        misc: &[String],
        custom: &[String],
    ) -> Result<Self, ClassError> {
        let core = species
            .species(site)
            .ok_or_else(|| ClassError::UnknownSite(site.to_string()))?
            .to_vec();
        let mut seen: HashSet<String> = core.iter().map(|c| class_key(c)).collect();
        let mut keep = |names: &[String]| -> Vec<String> {
            names
                .iter()
                .map(|n| n.trim().to_string())
                .filter(|n| !n.is_empty() && seen.insert(class_key(n)))
                .collect()
        };
        let misc = keep(misc);
        let custom = keep(custom);
        Ok(ClassList {
            site: site.to_string(),
            core,
            misc,
            custom,
        })
    }

    pub fn group_of(&self, name: &str) -> ClassGroup {
        let key = class_key(name);
        let has = |v: &[String]| v.iter().any(|c| class_key(c) == key);
        if has(&self.core) {
            ClassGroup::Core
        } else if has(&self.misc) {
            ClassGroup::Misc
        } else if has(&self.custom) {
            ClassGroup::Custom
        } else {
            ClassGroup::Unlisted
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.group_of(name) != ClassGroup::Unlisted
    }

    /// Core, then misc, then custom entries.
    pub fn entries(&self) -> Vec<ClassEntry> {
        let tag = |v: &[String], group| {
            v.iter()
                .map(move |n| ClassEntry {
                    name: n.clone(),
                    group,
                })
                .collect::<Vec<_>>()
        };
        let mut out = tag(&self.core, ClassGroup::Core);
        out.extend(tag(&self.misc, ClassGroup::Misc));
        out.extend(tag(&self.custom, ClassGroup::Custom));
        out
    }

    pub fn add_class(&self, name: &str) -> Result<ClassList, ClassError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ClassError::EmptyName);
        }
        if self.contains(name) {
            return Err(ClassError::AlreadyPresent(name.to_string()));
        }
        let mut out = self.clone();
        out.custom.push(name.to_string());
        Ok(out)
    }

    pub fn remove_class(&self, name: &str) -> Result<ClassList, ClassError> {
        match self.group_of(name) {
            ClassGroup::Custom => {
                let key = class_key(name);
                let mut out = self.clone();
                out.custom.retain(|c| class_key(c) != key);
                Ok(out)
            }
            ClassGroup::Core | ClassGroup::Misc => Err(ClassError::NotRemovable(name.trim().to_string())),
            ClassGroup::Unlisted => Err(ClassError::NotFound(name.trim().to_string())),
        }
    }
}

/// The BTO code for `class` when `use_codes` is on and the table has it,
/// else the name unchanged.
pub fn display_name(class: &str, table: &BtoCodeTable, use_codes: bool) -> String {
    if use_codes {
        if let Some(code) = table.code(class) {
            return code.to_string();
        }
    }
    class.to_string()
}

/// Reads a one-column list of miscellaneous class names. A `class_name`
/// header row is optional.
pub fn load_misc_classes(bytes: &[u8]) -> Result<Vec<String>, ConfigError> {
    let rows = csv_rows(bytes, MISC_CLASSES_FILE)?;
    let mut names: Vec<String> = rows
        .into_iter()
        .filter_map(|r| r.into_iter().next())
        .filter(|n| !n.is_empty())
        .collect();
    if names.first().is_some_and(|n| n == "class_name") {
        names.remove(0);
    }
    if names.is_empty() {
        return Err(config_err(MISC_CLASSES_FILE, "no class names"));
    }
    Ok(names)
}

/// A loaded project root: `species_list.csv` (required), optional
/// `location_list.csv`, `bto_codes.csv` and `misc_classes.csv`, audio under
/// `audio/` and labels under `labels/`.
#[derive(Debug, Clone)]
pub struct Project {
    pub root: PathBuf,
    pub species: SpeciesLists,
    pub locations: Vec<SiteMetadata>,
    pub bto: BtoCodeTable,
    pub misc: Vec<String>,
}

fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, ConfigError> {
    match fs::read(path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(ConfigError::Io {
            file: path.display().to_string(),
            message: e.to_string(),
        }),
    }
}

impl Project {
    pub fn load(root: impl Into<PathBuf>) -> Result<Project, ConfigError> {
        let root = root.into();
        if !root.is_dir() {
            return Err(ConfigError::Io {
                file: root.display().to_string(),
                message: "project root is not a directory".into(),
            });
        }
        let species_bytes = read_optional(&root.join(SPECIES_LIST_FILE))?
            .ok_or_else(|| config_err(SPECIES_LIST_FILE, "file not found"))?;
        let species = load_species_lists(&species_bytes)?;
        let locations = match read_optional(&root.join(LOCATION_LIST_FILE))? {
            Some(b) => load_locations(&b)?,
            None => Vec::new(),
        };
        let bto = match read_optional(&root.join(BTO_CODES_FILE))? {
            Some(b) => load_bto_codes(&b)?,
            None => BtoCodeTable::default(),
        };
        let misc = match read_optional(&root.join(MISC_CLASSES_FILE))? {
            Some(b) => load_misc_classes(&b)?,
            None => DEFAULT_MISC_CLASSES.iter().map(|s| s.to_string()).collect(),
        };
        Ok(Project {
            root,
            species,
            locations,
            bto,
            misc,
        })
    }

    pub fn audio_dir(&self) -> PathBuf {
        self.root.join(AUDIO_DIR)
    }

    pub fn labels_dir(&self) -> PathBuf {
        self.root.join("labels")
    }

    /// `.wav` file names under the audio directory, sorted.
    pub fn audio_files(&self) -> io::Result<Vec<String>> {
        list_wav_files(&self.audio_dir())
    }

    /// Resolves `name` inside the audio directory, rejecting path components.
    pub fn audio_path(&self, name: &str) -> Option<PathBuf> {
        let plain = !name.is_empty()
            && !name.contains(['/', '\\'])
            && name != "."
            && name != ".."
            && !name.starts_with('.');
        plain.then(|| self.audio_dir().join(name))
    }

    pub fn class_list(&self, site: &str, custom: &[String]) -> Result<ClassList, ClassError> {
        ClassList::with_misc(site, &self.species, &self.misc, custom)
    }

    pub fn metadata(&self, file_name: &str) -> (RecordingFile, ResolvedMetadata) {
        let file = audio_io::parse_filename(file_name);
        let meta = resolve_metadata(&file, &self.locations);
        (file, meta)
    }
}

pub fn list_wav_files(dir: &Path) -> io::Result<Vec<String>> {
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.to_lowercase().ends_with(".wav") && !n.starts_with('.'))
        .collect();
    names.sort();
    Ok(names)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks every config CSV and the audio file names under `root` without
/// modifying anything. Unparseable file names are warnings; everything else
/// is an error.
pub fn validate_project(root: &Path) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !root.is_dir() {
        report.errors.push(format!("{}: project root is not a directory", root.display()));
        return report;
    }
    let mut check = |file: &str, required: bool, parse: &dyn Fn(&[u8]) -> Result<(), ConfigError>| {
        match read_optional(&root.join(file)) {
            Ok(Some(b)) => {
                if let Err(e) = parse(&b) {
                    report.errors.push(e.to_string());
                }
            }
            Ok(None) if required => report.errors.push(format!("{file}: file not found")),
            Ok(None) => report.warnings.push(format!("{file}: not present")),
            Err(e) => report.errors.push(e.to_string()),
        }
    };
    check(SPECIES_LIST_FILE, true, &|b| load_species_lists(b).map(drop));
    check(LOCATION_LIST_FILE, false, &|b| load_locations(b).map(drop));
    check(BTO_CODES_FILE, false, &|b| load_bto_codes(b).map(drop));
    if root.join(MISC_CLASSES_FILE).exists() {
        check(MISC_CLASSES_FILE, false, &|b| load_misc_classes(b).map(drop));
    }

    let recorders: Vec<String> = fs::read(root.join(LOCATION_LIST_FILE))
        .ok()
        .and_then(|b| load_locations(&b).ok())
        .map(|l| l.into_iter().map(|s| s.recorder_name).collect())
        .unwrap_or_default();

    let audio = root.join(AUDIO_DIR);
    match list_wav_files(&audio) {
        Err(e) => report.errors.push(format!("{}: {e}", audio.display())),
        Ok(files) => {
            if files.is_empty() {
                report.warnings.push(format!("{}: no .wav files", audio.display()));
            }
            for name in files {
                let parsed = audio_io::parse_filename(&name);
                if parsed.metadata_unavailable {
                    report.warnings.push(format!(
                        "{name}: does not follow RECORDERNAME_YYYYMMDD_HHMMSS[_start_MM_SS].wav; metadata unavailable"
                    ));
                } else if let Some(r) = &parsed.recorder_name {
                    if !recorders.is_empty() && !recorders.contains(r) {
                        report.warnings.push(format!("{name}: recorder {r} not in {LOCATION_LIST_FILE}"));
                    }
                }
                match fs::read(audio.join(&name)) {
                    Ok(bytes) => {
                        if let Err(e) = audio_io::wav_info(&bytes) {
                            report.errors.push(format!("{name}: {e}"));
                        }
                    }
                    Err(e) => report.errors.push(format!("{name}: {e}")),
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lists(csv: &str) -> SpeciesLists {
        load_species_lists(csv.as_bytes()).unwrap()
    }

    #[test]
    fn species_columns_are_sorted_and_ragged() {
        let l = lists("SiteA,SiteB\nwren,robin\nblackbird,\n");
        assert_eq!(l.species("SiteA").unwrap(), ["blackbird", "wren"]);
        assert_eq!(l.species("SiteB").unwrap(), ["robin"]);
        let gap = lists("S\nwren\n\nrobin\n");
        assert_eq!(gap.species("S").unwrap(), ["robin", "wren"]);
    }

    #[test]
    fn species_bom_and_errors() {
        let plain = "A,B\nx,y\n";
        let mut bom = vec![0xEF, 0xBB, 0xBF];
        bom.extend_from_slice(plain.as_bytes());
        assert_eq!(lists(plain), load_species_lists(&bom).unwrap());
        assert!(load_species_lists(b"").is_err());
        assert!(load_species_lists(b"A,A\nx,y\n").is_err());
        let dup = lists("A\nWren\nwren\nRobin\n");
        assert_eq!(dup.species("A").unwrap(), ["Robin", "Wren"]);
    }

    #[test]
    fn locations_fields_blanks_and_extras() {
        let csv = "recorder_name,lat,long,location_name,location_county,habitat_type,dist_to_coastline,notes\n\
                   REC1,52.3,-6.5,Site 1,Wexford,,3.5,near gate\n";
        let l = load_locations(csv.as_bytes()).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].lat, Some(52.3));
        assert_eq!(l[0].long, Some(-6.5));
        assert_eq!(l[0].habitat_type, "");
        assert_eq!(l[0].location_county, "Wexford");
        assert_eq!(l[0].extras, vec![("notes".to_string(), "near gate".to_string())]);
        assert!(load_locations(b"name,lat\nx,1\n").is_err());
        assert!(load_locations(b"recorder_name,lat\nx,91\n").is_err());
    }

    #[test]
    fn resolve_matches_exact_recorder() {
        let sites = load_locations(b"recorder_name,location_name\nRAHORA,Site 3\n").unwrap();
        let hit = resolve_metadata(&audio_io::parse_filename("RAHORA_20220501_063000.wav"), &sites);
        assert_eq!(hit.site.unwrap().location_name, "Site 3");
        assert!(hit.recorded_at.is_some());
        let miss = resolve_metadata(&audio_io::parse_filename("rahora_20220501_063000.wav"), &sites);
        assert!(miss.site.is_none());
        let bad = resolve_metadata(&audio_io::parse_filename("badname.wav"), &sites);
        assert!(bad.site.is_none() && bad.recorded_at.is_none());
    }

    #[test]
    fn bto_codes() {
        let t = load_bto_codes(b"bto_code,species_name\nWR,Wren\nR.,Robin\n").unwrap();
        assert_eq!(display_name("Wren", &t, true), "WR");
        assert_eq!(display_name("Wren", &t, false), "Wren");
        assert_eq!(display_name("Wind Turbine", &t, true), "Wind Turbine");
        assert!(load_bto_codes(b"bto_code,species_name\nWRN,Wren\n").is_err());
        assert!(load_bto_codes(b"bto_code,species_name\nWR,Wren\nWX,Wren\n").is_err());
    }

    #[test]
    fn class_list_groups() {
        let s = lists("A,B\nWren,Robin\nRook,\nLinnet,\n");
        let cl = ClassList::new("A", &s, &[]).unwrap();
        assert_eq!(cl.core.len(), 3);
        assert_eq!(cl.misc.len(), 6);
        let added = cl.add_class("Siskin").unwrap();
        assert_eq!(added.group_of("Siskin"), ClassGroup::Custom);
        assert_eq!(added.group_of("siskin").color(), "blue");
        assert_eq!(
            cl.add_class("wren").unwrap_err().to_string(),
            "wren is already present in the list"
        );
        assert_eq!(cl.add_class("  "), Err(ClassError::EmptyName));
        assert_eq!(added.remove_class("Siskin").unwrap(), cl);
        assert!(matches!(cl.remove_class("Wren"), Err(ClassError::NotRemovable(_))));
        assert!(matches!(cl.remove_class("Human"), Err(ClassError::NotRemovable(_))));
        assert!(matches!(cl.remove_class("Dodo"), Err(ClassError::NotFound(_))));
        assert_eq!(cl.group_of("Dodo"), ClassGroup::Unlisted);
        assert!(matches!(ClassList::new("Z", &s, &[]), Err(ClassError::UnknownSite(_))));

        let b = ClassList::new("B", &s, &added.custom).unwrap();
        assert_eq!(b.core, ["Robin"]);
        assert_eq!(b.misc, added.misc);
        assert_eq!(b.custom, added.custom);
    }

    #[test]
    fn custom_colliding_with_core_is_dropped() {
        let s = lists("A,B\nWren,Robin\n");
        let cl = ClassList::new("B", &s, &["wren".into(), "Siskin".into(), "siskin".into()]).unwrap();
        assert_eq!(cl.custom, ["wren", "Siskin"]);
        let a = ClassList::new("A", &s, &cl.custom).unwrap();
        assert_eq!(a.custom, ["Siskin"]);
    }

    fn name_strategy() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "Wren", "wren", " Robin", "Rook", "ROOK", "Human", "insect", "Siskin", "Blackbird", "",
            "Meadow Pipit", "meadow pipit ",
        ])
        .prop_map(String::from)
    }

    proptest! {
        #[test]
        fn class_list_never_has_duplicates(
            core in prop::collection::vec(name_strategy(), 0..8),
            custom in prop::collection::vec(name_strategy(), 0..8),
            adds in prop::collection::vec(name_strategy(), 0..8),
        ) {
            let mut csv = String::from("S\n");
            for c in &core {
                csv.push_str(&format!("\"{c}\"\n"));
            }
            let s = lists(&csv);
            let mut cl = ClassList::new("S", &s, &custom).unwrap();
            for a in &adds {
                if let Ok(next) = cl.add_class(a) {
                    prop_assert_eq!(next.remove_class(a).unwrap(), cl.clone());
                    cl = next;
                }
            }
            let keys: Vec<String> = cl.entries().iter().map(|e| class_key(&e.name)).collect();
            let unique: HashSet<&String> = keys.iter().collect();
            prop_assert_eq!(keys.len(), unique.len());
            let mut sorted = cl.core.clone();
            sorted.sort_by_key(|n| (n.to_lowercase(), n.clone()));
            prop_assert_eq!(&sorted, &cl.core);
        }

        #[test]
        fn shuffled_species_rows_give_same_list(
            names in prop::collection::vec(name_strategy(), 1..10),
            seed in any::<u64>(),
        ) {
            let mut shuffled = names.clone();
            let mut x = seed | 1;
            for i in (1..shuffled.len()).rev() {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                shuffled.swap(i, (x % (i as u64 + 1)) as usize);
            }
            let to_csv = |v: &[String]| {
                let mut s = String::from("S\n");
                for n in v { s.push_str(&format!("\"{n}\"\n")); }
                s
            };
            let a = ClassList::new("S", &lists(&to_csv(&names)), &[]).unwrap();
            let b = ClassList::new("S", &lists(&to_csv(&shuffled)), &[]).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
