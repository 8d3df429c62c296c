//! Command implementations behind the `audiolabel` binary.

pub mod font;
pub mod overlay;

use std::fmt;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use audiolabel_core::annotations::{summarize, write_summary_csv, Label, LabelStore, SummaryFilter};
use audiolabel_core::audio_io::{self, AudioClip};
use audiolabel_core::dsp::{self, StftParams, WindowFn, DEFAULT_FLOOR_DB};
use audiolabel_core::project::{display_name, validate_project, ClassList, Project, ValidationReport};
use audiolabel_core::render::{self, Raster, RenderParams};
use audiolabel_server::{ServerConfig, StartupError};

#[derive(Debug, Parser)]
#[command(name = "audiolabel", version, about = "Spectrogram labelling service and batch tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API until interrupted.
    Serve(ServeArgs),
    /// Write a spectrogram PNG of one segment with label boxes drawn on it.
    Render(RenderArgs),
    /// Per-file, per-class label counts as CSV.
    Summary(SummaryArgs),
    /// Check config CSVs and audio file names; exit 1 on errors.
    Validate(ValidateArgs),
    /// Write the synthetic five-site demo project.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Project root holding audio/, labels/ and the config CSVs.
    #[arg(long, env = "NEAL_ROOT")]
    pub root: PathBuf,
    #[arg(long, env = "NEAL_PORT", default_value_t = 8787)]
    pub port: u16,
    #[arg(long, env = "NEAL_HOST", default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, env = "NEAL_CLIP_SECONDS", default_value_t = 15.0)]
    pub clip_seconds: f64,
    /// Memory budget for filtered audio.
    #[arg(long, env = "NEAL_CACHE_MB", default_value_t = 64)]
    pub cache_mb: usize,
    /// Idle lifetime of a filtered-audio token.
    #[arg(long, env = "NEAL_TOKEN_TTL_SECONDS", default_value_t = 600)]
    pub token_ttl_seconds: u64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, env = "NEAL_ROOT")]
    pub root: PathBuf,
    /// Audio file name inside audio/.
    #[arg(long)]
    pub file: String,
    #[arg(long, default_value_t = 0)]
    pub segment: usize,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Draw only this user's labels (default: every label file).
    #[arg(long)]
    pub user: Option<String>,
    /// Site whose species form the core class group (default: the site named
    /// in the recorder metadata, else the first site).
    #[arg(long)]
    pub site: Option<String>,
    /// Extra classes shown in the custom group color.
    #[arg(long = "custom")]
    pub custom: Vec<String>,
    /// Tag boxes with BTO codes where available.
    #[arg(long)]
    pub bto: bool,
    #[arg(long, env = "NEAL_CLIP_SECONDS", default_value_t = 15.0)]
    pub clip_seconds: f64,
    #[arg(long, default_value_t = 256)]
    pub window: usize,
    #[arg(long, default_value_t = 0.75)]
    pub overlap: f64,
    #[arg(long, default_value = "hann")]
    pub window_fn: String,
    #[arg(long, default_value = "viridis")]
    pub palette: String,
    #[arg(long, default_value_t = DEFAULT_FLOOR_DB, allow_negative_numbers = true)]
    pub floor_db: f64,
    #[arg(long, default_value_t = 1124)]
    pub width: u32,
    #[arg(long, default_value_t = 256)]
    pub height: u32,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    #[arg(long, env = "NEAL_ROOT")]
    pub root: PathBuf,
    /// Label directory (default: <root>/labels).
    #[arg(long)]
    pub labels_dir: Option<PathBuf>,
    /// Count only this user's labels (default: every label file).
    #[arg(long)]
    pub user: Option<String>,
    /// Case-insensitive file name substring.
    #[arg(long)]
    pub file: Option<String>,
    /// Keep only these classes; repeat for several.
    #[arg(long = "class")]
    pub classes: Vec<String>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, env = "NEAL_ROOT")]
    pub root: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Directory to create or overwrite.
    #[arg(long)]
    pub root: PathBuf,
}

/// A failure carrying the process exit status: 1 for data errors, 2 for
/// usage errors.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn data(message: impl fmt::Display) -> Self {
        CliError {
            code: 1,
            message: message.to_string(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Serve(a) => serve(a),
        Command::Render(a) => render_cmd(&a).map(|path| println!("wrote {}", path.display())),
        Command::Summary(a) => summary_cmd(&a),
        Command::Validate(a) => {
            let report = validate_project(&a.root);
            print_report(&report);
            if report.is_ok() {
                Ok(())
            } else {
                Err(CliError::data(format!("{} error(s)", report.errors.len())))
            }
        }
        Command::Demo(a) => audiolabel_core::demo::write_demo_project(&a.root)
            .map(|files| println!("wrote demo project with {} recordings to {}", files.len(), a.root.display()))
            .map_err(|e| CliError::data(format!("{}: {e}", a.root.display()))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

pub fn print_report(report: &ValidationReport) {
    for e in &report.errors {
        println!("error: {e}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!(
        "{} error(s), {} warning(s)",
        report.errors.len(),
        report.warnings.len()
    );
}

fn require_dir(root: &Path) -> Result<(), CliError> {
    if root.is_dir() {
        Ok(())
    } else {
        Err(CliError::data(format!("{}: not a directory", root.display())))
    }
}

// ---------------------------------------------------------------- serve

fn serve(args: ServeArgs) -> Result<(), CliError> {
    require_dir(&args.root)?;
    let config = ServerConfig {
        root: args.root.clone(),
        clip_seconds: args.clip_seconds,
        cache_bytes: args.cache_mb.saturating_mul(1024 * 1024),
        token_ttl: Duration::from_secs(args.token_ttl_seconds),
    };
    let app = audiolabel_server::app(config).map_err(|e| match e {
        StartupError::ClipLength(_) => CliError::usage(e),
        other => CliError::data(other),
    })?;
    let addr = SocketAddr::new(args.host, args.port);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::data)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::data(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(CliError::data)?;
        println!("listening on http://{local}");
        let _ = std::io::stdout().flush();
        axum::serve(listener, app)
            .with_graceful_shutdown(shutdown_signal())
            .await
            .map_err(CliError::data)?;
        println!("shut down");
        Ok(())
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

// ---------------------------------------------------------------- render

fn labels_for(store: &LabelStore, user: Option<&str>) -> Result<Vec<Label>, CliError> {
    match user {
        Some(u) => store.labels(Some(u)),
        None => store.all_labels(),
    }
    .map_err(CliError::data)
}

/// Result of [`render_segment`]: the annotated raster and what was drawn.
#[derive(Debug, Clone)]
pub struct RenderedSegment {
    pub raster: Raster,
    pub base: Raster,
    pub drawn: Vec<(Label, overlay::PixelRect)>,
}

fn pick_site(project: &Project, file: &str, requested: Option<&str>) -> Result<String, CliError> {
    if let Some(s) = requested {
        return match project.species.species(s) {
            Some(_) => Ok(s.to_string()),
            None => Err(CliError::data(format!("unknown site {s:?}"))),
        };
    }
    let (_, meta) = project.metadata(file);
    if let Some(site) = meta.site {
        if project.species.species(&site.location_name).is_some() {
            return Ok(site.location_name);
        }
    }
    project
        .species
        .site_names()
        .next()
        .map(str::to_string)
        .ok_or_else(|| CliError::data("species list has no sites"))
}

/// Renders one segment and draws every label intersecting it, colored by
/// class group.
pub fn render_segment(project: &Project, args: &RenderArgs) -> Result<RenderedSegment, CliError> {
    let path = project
        .audio_path(&args.file)
        .filter(|p| p.is_file())
        .ok_or_else(|| CliError::data(format!("no audio file {:?} in {}", args.file, project.audio_dir().display())))?;
    let bytes = fs::read(&path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let clip = audio_io::decode_wav(&bytes).map_err(|e| CliError::data(format!("{}: {e}", args.file)))?;
    if !(args.clip_seconds.is_finite() && args.clip_seconds > 0.0) {
        return Err(CliError::usage("--clip-seconds must be positive"));
    }
    let seg: AudioClip = audio_io::segment(&clip, args.segment, args.clip_seconds).map_err(CliError::data)?;
    let window_fn = WindowFn::parse(&args.window_fn)
        .ok_or_else(|| CliError::usage(format!("unknown window function {:?}", args.window_fn)))?;
    let stft_params = StftParams::new(args.window, args.overlap, window_fn).map_err(CliError::usage)?;
    let render_params = RenderParams {
        palette: args.palette.clone(),
        contrast_floor_db: args.floor_db,
        width_px: args.width,
        height_px: args.height,
        zoom: None,
    };
    render_params.validate().map_err(CliError::usage)?;

    let spec = dsp::stft(&seg, &stft_params).map_err(CliError::data)?;
    let db = dsp::to_db(&spec, render_params.contrast_floor_db).map_err(CliError::data)?;
    let base = render::rasterize(&db, &render_params).map_err(CliError::data)?;

    let site = pick_site(project, &args.file, args.site.as_deref())?;
    let classes: ClassList = project.class_list(&site, &args.custom).map_err(CliError::data)?;
    let store = LabelStore::open_dir(project.labels_dir()).map_err(CliError::data)?;
    let labels = labels_for(&store, args.user.as_deref())?;

    let (t0, t1) = (seg.offset_s, seg.end_s());
    let mut raster = base.clone();
    let mut drawn = Vec::new();
    for label in labels.into_iter().filter(|l| l.file_name == args.file) {
        let b = &label.bbox;
        if b.t_max_s <= t0 || b.t_min_s >= t1 || b.f_min_hz >= base.extent.f1_hz {
            continue;
        }
        let group = classes.group_of(&label.class_name);
        let name = display_name(&label.class_name, &project.bto, args.bto);
        let tag = format!("{name} {}%", label.confidence_pct);
        let rect = overlay::draw_labelled_box(&mut raster, b, &tag, group.rgb());
        drawn.push((label, rect));
    }
    Ok(RenderedSegment { raster, base, drawn })
}

fn render_cmd(args: &RenderArgs) -> Result<PathBuf, CliError> {
    require_dir(&args.root)?;
    let project = Project::load(&args.root).map_err(CliError::data)?;
    let rendered = render_segment(&project, args)?;
    let png = rendered.raster.to_png().map_err(CliError::data)?;
    fs::write(&args.out, png).map_err(|e| CliError::data(format!("{}: {e}", args.out.display())))?;
    Ok(args.out.clone())
}

// ---------------------------------------------------------------- summary

/// The summary table as CSV bytes, identical to what the API computes for
/// the same labels, known files and filter.
pub fn summary_csv(args: &SummaryArgs) -> Result<Vec<u8>, CliError> {
    require_dir(&args.root)?;
    let labels_dir = args.labels_dir.clone().unwrap_or_else(|| args.root.join("labels"));
    let labels = if labels_dir.is_dir() {
        let store = LabelStore::open_dir(&labels_dir).map_err(CliError::data)?;
        labels_for(&store, args.user.as_deref())?
    } else {
        Vec::new()
    };
    let known = audiolabel_core::project::list_wav_files(&args.root.join("audio")).unwrap_or_default();
    let filter = SummaryFilter {
        file_pattern: args.file.clone(),
        classes: (!args.classes.is_empty()).then(|| args.classes.clone()),
    };
    Ok(write_summary_csv(&summarize(&labels, &known, &filter)))
}

fn summary_cmd(args: &SummaryArgs) -> Result<(), CliError> {
    let csv = summary_csv(args)?;
    match &args.out {
        Some(p) => fs::write(p, csv).map_err(|e| CliError::data(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(&csv).map_err(CliError::data),
    }
}
