//! Per-user view state kept in memory for the lifetime of the server.

use serde::{Deserialize, Serialize};

use audiolabel_core::dsp::{StftParams, WindowFn, DEFAULT_FLOOR_DB};
use audiolabel_core::render::RenderParams;

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub gain_db: f64,
    pub clip_seconds: f64,
    pub window_size: usize,
    pub overlap: f64,
    pub window_fn: WindowFn,
    pub palette: String,
    pub floor_db: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub use_bto_codes: bool,
}

impl Settings {
    pub fn with_clip_seconds(clip_seconds: f64) -> Self {
        let stft = StftParams::default();
        let render = RenderParams::default();
        Settings {
            gain_db: 0.0,
            clip_seconds,
            window_size: stft.window_size,
            overlap: stft.overlap_fraction,
            window_fn: stft.window_fn,
            palette: render.palette,
            floor_db: DEFAULT_FLOOR_DB,
            width_px: render.width_px,
            height_px: render.height_px,
            use_bto_codes: false,
        }
    }

    pub fn stft_params(&self) -> StftParams {
        StftParams {
            window_size: self.window_size,
            overlap_fraction: self.overlap,
            window_fn: self.window_fn,
        }
    }

    pub fn render_params(&self) -> RenderParams {
        RenderParams {
            palette: self.palette.clone(),
            contrast_floor_db: self.floor_db,
            width_px: self.width_px,
            height_px: self.height_px,
            zoom: None,
        }
    }

    pub fn validate(&self) -> Result<(), ApiError> {
        if !self.gain_db.is_finite() {
            return Err(ApiError::invalid("gain_db", "gain must be finite"));
        }
        if !(self.clip_seconds.is_finite() && self.clip_seconds > 0.0) {
            return Err(ApiError::invalid("clip_seconds", "clip length must be positive"));
        }
        self.stft_params().validate()?;
        self.render_params().validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub username: Option<String>,
    pub selected_site: Option<String>,
    pub custom_classes: Vec<String>,
    pub settings: Settings,
}

impl Session {
    pub fn new(username: Option<String>, selected_site: Option<String>, clip_seconds: f64) -> Self {
        Session {
            username,
            selected_site,
            custom_classes: Vec::new(),
            settings: Settings::with_clip_seconds(clip_seconds),
        }
    }
}
