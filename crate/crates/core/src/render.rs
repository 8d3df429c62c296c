//! Palette-mapped spectrogram rasters.
//!
//! Only the base raster is produced here: no axes, margins or overlays. Each
//! pixel samples the (frame, bin) cell containing its center, so rendering at
//! one pixel per cell reproduces the array exactly. Frequency increases
//! upward and time rightward.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioClip;
use crate::dsp::{self, DspError, Extent, MagnitudeSpectrogramDb, SelectionBox, StftParams};

pub const MAX_PIXELS: u64 = 64_000_000;
pub const MIN_CONTRAST_FLOOR_DB: f64 = -120.0;
pub const MAX_CONTRAST_FLOOR_DB: f64 = -10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("invalid render parameter {field}: {message}")]
    InvalidParam { field: &'static str, message: String },
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("PNG encoding failed: {0}")]
    Encode(String),
}

pub type Rgb = [u8; 3];

/// Piecewise-linear color map over [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub name: &'static str,
    pub stops: &'static [(f64, Rgb)],
}

const fn eighths(c: [Rgb; 8]) -> [(f64, Rgb); 8] {
    [
        (0.0, c[0]),
        (1.0 / 7.0, c[1]),
        (2.0 / 7.0, c[2]),
        (3.0 / 7.0, c[3]),
        (4.0 / 7.0, c[4]),
        (5.0 / 7.0, c[5]),
        (6.0 / 7.0, c[6]),
        (1.0, c[7]),
    ]
}

static VIRIDIS: [(f64, Rgb); 8] = eighths([
    [68, 1, 84],
    [70, 50, 126],
    [54, 92, 141],
    [39, 127, 142],
    [31, 161, 135],
    [74, 193, 109],
    [160, 218, 57],
    [253, 231, 37],
]);
static MAGMA: [(f64, Rgb); 8] = eighths([
    [0, 0, 4],
    [34, 17, 80],
    [95, 24, 127],
    [152, 45, 128],
    [211, 67, 110],
    [248, 118, 92],
    [254, 187, 129],
    [252, 253, 191],
]);
static INFERNO: [(f64, Rgb); 8] = eighths([
    [0, 0, 4],
    [40, 11, 83],
    [101, 21, 110],
    [159, 42, 99],
    [212, 72, 66],
    [245, 125, 21],
    [250, 194, 40],
    [252, 255, 164],
]);
static PLASMA: [(f64, Rgb); 8] = eighths([
    [13, 8, 135],
    [83, 2, 163],
    [139, 10, 165],
    [184, 50, 137],
    [219, 92, 104],
    [244, 136, 73],
    [254, 189, 42],
    [240, 249, 33],
]);
static GRAYSCALE: [(f64, Rgb); 8] = eighths([
    [0, 0, 0],
    [36, 36, 36],
    [73, 73, 73],
    [109, 109, 109],
    [146, 146, 146],
    [182, 182, 182],
    [219, 219, 219],
    [255, 255, 255],
]);

static PALETTES: [Palette; 5] = [
    Palette { name: "viridis", stops: &VIRIDIS },
    Palette { name: "magma", stops: &MAGMA },
    Palette { name: "inferno", stops: &INFERNO },
    Palette { name: "plasma", stops: &PLASMA },
    Palette { name: "grayscale", stops: &GRAYSCALE },
];

pub fn list_palettes() -> Vec<&'static str> {
    PALETTES.iter().map(|p| p.name).collect()
}

impl Palette {
    pub fn by_name(name: &str) -> Option<&'static Palette> {
        PALETTES.iter().find(|p| p.name.eq_ignore_ascii_case(name))
    }

    pub fn default_palette() -> &'static Palette {
        &PALETTES[0]
    }

    /// Color at `pos`, clamped to [0, 1].
    pub fn eval(&self, pos: f64) -> Rgb {
        let pos = if pos.is_nan() { 0.0 } else { pos.clamp(0.0, 1.0) };
        let stops = self.stops;
        if pos <= stops[0].0 {
            return stops[0].1;
        }
        for pair in stops.windows(2) {
            let (p0, c0) = pair[0];
            let (p1, c1) = pair[1];
            if pos <= p1 {
                if pos == p1 {
                    return c1;
                }
                let t = (pos - p0) / (p1 - p0);
                let mut out = [0u8; 3];
                for ch in 0..3 {
                    let v = c0[ch] as f64 + t * (c1[ch] as f64 - c0[ch] as f64);
                    out[ch] = v.round().clamp(0.0, 255.0) as u8;
                }
                return out;
            }
        }
        stops[stops.len() - 1].1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    pub palette: String,
    pub contrast_floor_db: f64,
    pub width_px: u32,
    pub height_px: u32,
    #[serde(default)]
    pub zoom: Option<SelectionBox>,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            palette: "viridis".into(),
            contrast_floor_db: dsp::DEFAULT_FLOOR_DB,
            width_px: 1124,
            height_px: 256,
            zoom: None,
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<&'static Palette, RenderError> {
        let palette = Palette::by_name(&self.palette).ok_or_else(|| RenderError::InvalidParam {
            field: "palette",
            message: format!("unknown palette {:?}; available: {}", self.palette, list_palettes().join(", ")),
        })?;
        if !(MIN_CONTRAST_FLOOR_DB..=MAX_CONTRAST_FLOOR_DB).contains(&self.contrast_floor_db) {
            return Err(RenderError::InvalidParam {
                field: "floor_db",
                message: format!(
                    "contrast floor must lie in [{MIN_CONTRAST_FLOOR_DB}, {MAX_CONTRAST_FLOOR_DB}] dB, got {}",
                    self.contrast_floor_db
                ),
            });
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(RenderError::InvalidParam {
                field: "size",
                message: "width and height must be positive".into(),
            });
        }
        if self.width_px as u64 * self.height_px as u64 > MAX_PIXELS {
            return Err(RenderError::InvalidParam {
                field: "size",
                message: format!("{}x{} exceeds {MAX_PIXELS} pixels", self.width_px, self.height_px),
            });
        }
        if let Some(z) = &self.zoom {
            z.validate()?;
        }
        Ok(palette)
    }
}

/// RGB8 image plus the time/frequency bounds it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
    pub extent: Extent,
}

impl Raster {
    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, c: Rgb) {
        if x < self.width && y < self.height {
            let i = (y as usize * self.width as usize + x as usize) * 3;
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    /// Horizontal pixel coordinate of time `t` (may lie outside the image).
    pub fn x_of(&self, t_s: f64) -> f64 {
        (t_s - self.extent.t0_s) / (self.extent.t1_s - self.extent.t0_s) * self.width as f64
    }

    /// Vertical pixel coordinate of frequency `f`, measured from the top.
    pub fn y_of(&self, f_hz: f64) -> f64 {
        (self.extent.f1_hz - f_hz) / (self.extent.f1_hz - self.extent.f0_hz) * self.height as f64
    }

    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        encode_png(self.width, self.height, &self.rgb)
    }
}

pub fn encode_png(width: u32, height: u32, rgb: &[u8]) -> Result<Vec<u8>, RenderError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        let mut writer = enc.write_header().map_err(|e| RenderError::Encode(e.to_string()))?;
        writer
            .write_image_data(rgb)
            .map_err(|e| RenderError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Index of the cell whose span contains the center of pixel `px` out of `n_px`.
fn cell_index(px: u32, n_px: u32, n_cells: usize) -> usize {
    let idx = ((2 * px as u64 + 1) * n_cells as u64) / (2 * n_px as u64);
    (idx as usize).min(n_cells - 1)
}

/// Maps a dB spectrogram to an RGB raster of exactly the requested size.
pub fn rasterize(spec: &MagnitudeSpectrogramDb, params: &RenderParams) -> Result<Raster, RenderError> {
    let palette = params.validate()?;
    let selected;
    let spec = match &params.zoom {
        Some(z) => {
            selected = spec.select(z)?;
            &selected
        }
        None => spec,
    };
    if spec.n_frames() == 0 || spec.n_bins() == 0 {
        return Err(DspError::EmptySelection.into());
    }
    let floor = params.contrast_floor_db;
    let n_bins = spec.n_bins();
    let cell_colors: Vec<Rgb> = spec
        .values_db()
        .iter()
        .map(|&db| palette.eval((db - floor) / (0.0 - floor)))
        .collect();

    let (w, h) = (params.width_px, params.height_px);
    let col_frame: Vec<usize> = (0..w).map(|x| cell_index(x, w, spec.n_frames())).collect();
    let mut rgb = Vec::with_capacity(w as usize * h as usize * 3);
    for y in 0..h {
        // row 0 is the top of the image, i.e. the highest frequency
        let bin = cell_index(h - 1 - y, h, n_bins);
        for &frame in &col_frame {
            rgb.extend_from_slice(&cell_colors[frame * n_bins + bin]);
        }
    }
    Ok(Raster {
        width: w,
        height: h,
        rgb,
        extent: spec.extent(),
    })
}

/// PNG bytes of [`rasterize`].
pub fn render_spectrogram(spec: &MagnitudeSpectrogramDb, params: &RenderParams) -> Result<Vec<u8>, RenderError> {
    rasterize(spec, params)?.to_png()
}

/// Raster of a zoomed region together with the exact extent rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoomedImage {
    pub png: Vec<u8>,
    pub raster: Raster,
}

/// Recomputes the STFT over the time span of `region` only and renders the
/// bins inside its frequency range.
pub fn zoom_recompute(
    clip: &AudioClip,
    region: &SelectionBox,
    stft_params: &StftParams,
    render_params: &RenderParams,
) -> Result<ZoomedImage, RenderError> {
    zoom_recompute_with(clip, region, stft_params, render_params, false)
}

/// [`zoom_recompute`], optionally applying row-wise noise reduction to the
/// zoomed span before conversion to dB.
pub fn zoom_recompute_with(
    clip: &AudioClip,
    region: &SelectionBox,
    stft_params: &StftParams,
    render_params: &RenderParams,
    noise_reduce: bool,
) -> Result<ZoomedImage, RenderError> {
    region.validate()?;
    stft_params.validate()?;
    let sr = clip.sample_rate_hz as f64;
    let to_index = |t: f64| (((t - clip.offset_s) * sr).round().max(0.0) as usize).min(clip.samples.len());
    let start = to_index(region.t_min_s);
    let end = to_index(region.t_max_s);
    let got = end.saturating_sub(start);
    if got < stft_params.window_size {
        return Err(DspError::TooShort {
            needed: stft_params.window_size,
            got,
        }
        .into());
    }
    let sub = AudioClip {
        samples: clip.samples[start..end].to_vec(),
        sample_rate_hz: clip.sample_rate_hz,
        offset_s: clip.offset_s + start as f64 / sr,
    };
    let mut spec = dsp::stft(&sub, stft_params)?;
    if noise_reduce {
        spec = dsp::noise_reduce(&spec);
    }
    let db = dsp::to_db(&spec, render_params.contrast_floor_db)?;
    let bins: Vec<usize> = (0..db.n_bins())
        .filter(|&k| region.contains_freq(db.bin_freqs_hz()[k]))
        .collect();
    if bins.is_empty() {
        return Err(DspError::EmptySelection.into());
    }
    let banded = if bins.len() == db.n_bins() {
        db
    } else {
        band_rows(&db, &bins)
    };
    let params = RenderParams {
        zoom: None,
        ..render_params.clone()
    };
    let raster = rasterize(&banded, &params)?;
    Ok(ZoomedImage {
        png: raster.to_png()?,
        raster,
    })
}

fn band_rows(db: &MagnitudeSpectrogramDb, bins: &[usize]) -> MagnitudeSpectrogramDb {
    let mut values = Vec::with_capacity(db.n_frames() * bins.len());
    for f in 0..db.n_frames() {
        values.extend(bins.iter().map(|&k| db.get(f, k)));
    }
    MagnitudeSpectrogramDb::from_values(
        values,
        db.n_frames(),
        bins.len(),
        db.floor_db(),
        db.frame_times_s().to_vec(),
        bins.iter().map(|&k| db.bin_freqs_hz()[k]).collect(),
        db.hop_s(),
        db.bin_width_hz(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(values: Vec<f64>, n_frames: usize, n_bins: usize) -> MagnitudeSpectrogramDb {
        MagnitudeSpectrogramDb::from_values(
            values,
            n_frames,
            n_bins,
            -96.0,
            (0..n_frames).map(|i| 0.5 + i as f64).collect(),
            (0..n_bins).map(|k| k as f64 * 10.0).collect(),
            1.0,
            10.0,
        )
    }

    fn params(w: u32, h: u32) -> RenderParams {
        RenderParams {
            width_px: w,
            height_px: h,
            ..RenderParams::default()
        }
    }

    #[test]
    fn palettes_listed_and_valid() {
        let names = list_palettes();
        for required in ["viridis", "magma", "inferno", "plasma", "grayscale"] {
            assert!(names.contains(&required));
        }
        assert_eq!(names, list_palettes());
        for name in names {
            let p = RenderParams {
                palette: name.into(),
                ..RenderParams::default()
            };
            assert!(p.validate().is_ok());
            let pal = Palette::by_name(name).unwrap();
            assert_eq!(pal.stops.len(), 8);
            assert_eq!(pal.stops[0].0, 0.0);
            assert_eq!(pal.stops[7].0, 1.0);
            assert!(pal.stops.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = RenderParams {
            palette: "jet".into(),
            ..RenderParams::default()
        };
        assert!(matches!(p.validate(), Err(RenderError::InvalidParam { field: "palette", .. })));
        let p = RenderParams {
            contrast_floor_db: -5.0,
            ..RenderParams::default()
        };
        assert!(p.validate().is_err());
        let p = params(10_000, 10_000);
        assert!(p.validate().is_err());
    }

    #[test]
    fn all_floor_is_uniform_low_color() {
        let spec = grid(vec![-96.0; 12], 4, 3);
        let r = rasterize(&spec, &params(37, 11)).unwrap();
        let low = Palette::default_palette().eval(0.0);
        assert!(r.rgb.chunks(3).all(|c| c == low));
    }

    #[test]
    fn single_hot_cell_maps_to_its_pixels() {
        let mut values = vec![-96.0; 4 * 3];
        values[2 * 3 + 1] = 0.0; // frame 2, bin 1
        let spec = grid(values, 4, 3);
        let r = rasterize(&spec, &params(8, 6)).unwrap();
        let hot = Palette::default_palette().eval(1.0);
        for y in 0..6 {
            for x in 0..8 {
                let expect_hot = (4..6).contains(&x) && (2..4).contains(&y);
                assert_eq!(r.pixel(x, y) == hot, expect_hot, "pixel {x},{y}");
            }
        }
    }

    #[test]
    fn one_pixel_per_cell_is_exact() {
        let values: Vec<f64> = (0..20).map(|i| -(i as f64) * 4.0).collect();
        let spec = grid(values, 5, 4);
        let r = rasterize(&spec, &params(5, 4)).unwrap();
        let pal = Palette::default_palette();
        for f in 0..5u32 {
            for k in 0..4u32 {
                let db = spec.get(f as usize, k as usize);
                assert_eq!(r.pixel(f, 3 - k), pal.eval((db + 96.0) / 96.0));
            }
        }
    }

    #[test]
    fn png_is_deterministic_and_sized() {
        let spec = grid((0..12).map(|i| -(i as f64)).collect(), 4, 3);
        let a = render_spectrogram(&spec, &params(40, 30)).unwrap();
        let b = render_spectrogram(&spec, &params(40, 30)).unwrap();
        assert_eq!(a, b);
        let decoder = png::Decoder::new(std::io::Cursor::new(&a));
        let reader = decoder.read_info().unwrap();
        assert_eq!(reader.info().width, 40);
        assert_eq!(reader.info().height, 30);
        assert_eq!(reader.info().color_type, png::ColorType::Rgb);
    }

    #[test]
    fn zoom_outside_extent_errors() {
        let spec = grid(vec![-10.0; 12], 4, 3);
        let mut p = params(10, 10);
        p.zoom = Some(SelectionBox::new(100.0, 200.0, 0.0, 10.0).unwrap());
        assert!(matches!(rasterize(&spec, &p), Err(RenderError::Dsp(DspError::EmptySelection))));
    }

    proptest! {
        #[test]
        fn size_always_matches_request(
            frames in 1usize..40, bins in 1usize..20, w in 1u32..120, h in 1u32..80,
        ) {
            let spec = grid((0..frames * bins).map(|i| -((i % 97) as f64)).collect(), frames, bins);
            let r = rasterize(&spec, &params(w, h)).unwrap();
            prop_assert_eq!(r.rgb.len(), (w * h * 3) as usize);
        }

        #[test]
        fn brightest_pixel_survives_floor_changes(seed in 0u64..500, floor in -95.0f64..-11.0) {
            let values: Vec<f64> = (0..60).map(|i| -(((i as u64 * 7919 + seed) % 90) as f64)).collect();
            let spec = grid(values, 10, 6);
            let a = rasterize(&spec, &params(10, 6)).unwrap();
            let mut p = params(10, 6);
            p.contrast_floor_db = floor;
            let b = rasterize(&spec, &p).unwrap();
            let hot = Palette::default_palette().eval(1.0);
            let hot_a: Vec<usize> = a.rgb.chunks(3).enumerate().filter(|(_, c)| *c == hot).map(|(i, _)| i).collect();
            let hot_b: Vec<usize> = b.rgb.chunks(3).enumerate().filter(|(_, c)| *c == hot).map(|(i, _)| i).collect();
            prop_assert_eq!(hot_a, hot_b);
        }
    }
}
