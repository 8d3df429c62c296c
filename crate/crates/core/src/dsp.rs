//! Short-time Fourier analysis, dB scaling, selection filtering, row-wise
//! noise reduction and overlap-add resynthesis.
//!
//! A [`ComplexSpectrogram`] exposes `window_size / 2` bins per frame (DC up to,
//! but excluding, Nyquist). The Nyquist coefficient of each frame is kept in a
//! hidden column so that [`istft`] can reconstruct the input exactly; it is
//! filtered together with the visible bins and treated as lying inside a
//! selection whenever the selection reaches the Nyquist frequency.
//!
//! Cell membership in a [`SelectionBox`] is decided by the frame center time
//! and the bin frequency `k * sample_rate / window_size`, half-open on the
//! upper edges.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioClip;

/// Magnitude divisor applied outside the selection in attenuate mode.
pub const ATTENUATION_FACTOR: f64 = 100.0;

pub const DEFAULT_FLOOR_DB: f64 = -96.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("invalid STFT parameters: {0}")]
    InvalidParams(String),
    #[error("clip too short: {got} samples, need at least {needed}")]
    TooShort { needed: usize, got: usize },
    #[error("reconstruction unsupported: {0}")]
    ReconstructionUnsupported(String),
    #[error("selection does not intersect the spectrogram")]
    EmptySelection,
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowFn {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

impl WindowFn {
    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let phase = 2.0 * PI * i as f64 / n as f64;
                match self {
                    WindowFn::Hann => 0.5 - 0.5 * phase.cos(),
                    WindowFn::Hamming => 0.54 - 0.46 * phase.cos(),
                    WindowFn::Rectangular => 1.0,
                }
            })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowFn::Hann => "hann",
            WindowFn::Hamming => "hamming",
            WindowFn::Rectangular => "rectangular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" | "hanning" => Some(WindowFn::Hann),
            "hamming" => Some(WindowFn::Hamming),
            "rectangular" | "rect" | "boxcar" => Some(WindowFn::Rectangular),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_size: usize,
    pub overlap_fraction: f64,
    #[serde(default)]
    pub window_fn: WindowFn,
}

impl Default for StftParams {
    fn default() -> Self {
        StftParams {
            window_size: 256,
            overlap_fraction: 0.75,
            window_fn: WindowFn::Hann,
        }
    }
}

impl StftParams {
    pub fn new(window_size: usize, overlap_fraction: f64, window_fn: WindowFn) -> Result<Self, DspError> {
        let p = StftParams {
            window_size,
            overlap_fraction,
            window_fn,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DspError> {
        if self.window_size < 16 || !self.window_size.is_power_of_two() {
            return Err(DspError::InvalidParams(format!(
                "window size must be a power of two >= 16, got {}",
                self.window_size
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(DspError::InvalidParams(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        let hop = self.window_size as f64 * (1.0 - self.overlap_fraction);
        if hop < 1.0 || (hop - hop.round()).abs() > 1e-9 {
            return Err(DspError::InvalidParams(format!(
                "hop {hop} (window x (1 - overlap)) is not a positive integer"
            )));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        (self.window_size as f64 * (1.0 - self.overlap_fraction)).round() as usize
    }

    pub fn n_bins(&self) -> usize {
        self.window_size / 2
    }

    /// Frame count for `n_samples` input samples (0 when shorter than a window).
    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.window_size {
            0
        } else {
            (n_samples - self.window_size) / self.hop() + 1
        }
    }

    /// Whether hop-shifted copies of the analysis window sum to a constant.
    pub fn satisfies_cola(&self) -> bool {
        let w = self.window_fn.coefficients(self.window_size);
        let hop = self.hop();
        let sums: Vec<f64> = (0..hop)
            .map(|n| w.iter().skip(n).step_by(hop).sum())
            .collect();
        let max = sums.iter().cloned().fold(f64::MIN, f64::max);
        let min = sums.iter().cloned().fold(f64::MAX, f64::min);
        max > 0.0 && (max - min) <= 1e-9 * max
    }
}

/// Time-frequency rectangle in seconds and Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionBox {
    pub t_min_s: f64,
    pub t_max_s: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
}

impl SelectionBox {
    pub fn new(t_min_s: f64, t_max_s: f64, f_min_hz: f64, f_max_hz: f64) -> Result<Self, DspError> {
        let b = SelectionBox {
            t_min_s,
            t_max_s,
            f_min_hz,
            f_max_hz,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), DspError> {
        let all_finite = [self.t_min_s, self.t_max_s, self.f_min_hz, self.f_max_hz]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(DspError::InvalidSelection("bounds must be finite".into()));
        }
        if self.t_min_s >= self.t_max_s {
            return Err(DspError::InvalidSelection("t_min_s must be below t_max_s".into()));
        }
        if self.f_min_hz < 0.0 || self.f_min_hz >= self.f_max_hz {
            return Err(DspError::InvalidSelection(
                "frequencies must satisfy 0 <= f_min_hz < f_max_hz".into(),
            ));
        }
        Ok(())
    }

    pub fn contains_time(&self, t: f64) -> bool {
        self.t_min_s <= t && t < self.t_max_s
    }

    pub fn contains_freq(&self, f: f64) -> bool {
        self.f_min_hz <= f && f < self.f_max_hz
    }
}

/// Rendered or selectable time/frequency bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub t0_s: f64,
    pub t1_s: f64,
    pub f0_hz: f64,
    pub f1_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    #[default]
    ZeroOutside,
    /// Divide outside magnitudes by [`ATTENUATION_FACTOR`], keeping phase.
    AttenuateOutside,
}

impl FilterMode {
    pub fn attenuation_factor(self) -> f64 {
        match self {
            FilterMode::ZeroOutside => f64::INFINITY,
            FilterMode::AttenuateOutside => ATTENUATION_FACTOR,
        }
    }

    fn apply(self, v: Complex64) -> Complex64 {
        match self {
            FilterMode::ZeroOutside => Complex64::new(0.0, 0.0),
            FilterMode::AttenuateOutside => v / ATTENUATION_FACTOR,
        }
    }
}

/// Frames x bins complex STFT.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    // row-major, stride n_bins + 1; the last column is the Nyquist coefficient
    data: Vec<Complex64>,
    n_frames: usize,
    n_bins: usize,
    frame_times_s: Vec<f64>,
    bin_freqs_hz: Vec<f64>,
    params: StftParams,
    sample_rate_hz: u32,
    n_samples: usize,
    offset_s: f64,
}

impl ComplexSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn params(&self) -> &StftParams {
        &self.params
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Per-frame center times, seconds from the start of the source file.
    pub fn frame_times_s(&self) -> &[f64] {
        &self.frame_times_s
    }

    pub fn bin_freqs_hz(&self) -> &[f64] {
        &self.bin_freqs_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / 2.0
    }

    pub fn hop_s(&self) -> f64 {
        self.params.hop() as f64 / self.sample_rate_hz as f64
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.params.window_size as f64
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        assert!(bin < self.n_bins);
        self.data[frame * (self.n_bins + 1) + bin]
    }

    /// Visible bins of one frame.
    pub fn frame(&self, frame: usize) -> &[Complex64] {
        let start = frame * (self.n_bins + 1);
        &self.data[start..start + self.n_bins]
    }

    /// Nyquist coefficient of one frame (not part of the visible bins).
    pub fn nyquist(&self, frame: usize) -> Complex64 {
        self.data[frame * (self.n_bins + 1) + self.n_bins]
    }

    /// Visible cells in frame-major order.
    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n_frames).flat_map(move |f| self.frame(f).iter().copied())
    }

    /// Sum of squared magnitudes over all coefficients, Nyquist included.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn extent(&self) -> Extent {
        let half_hop = self.hop_s() / 2.0;
        Extent {
            t0_s: self.frame_times_s.first().copied().unwrap_or(self.offset_s) - half_hop,
            t1_s: self.frame_times_s.last().copied().unwrap_or(self.offset_s) + half_hop,
            f0_hz: 0.0,
            f1_hz: self.nyquist_hz(),
        }
    }

    fn map_rows(&self, mut f: impl FnMut(usize, &mut [Complex64])) -> ComplexSpectrogram {
        let mut out = self.clone();
        let stride = self.n_bins + 1;
        for (frame, row) in out.data.chunks_exact_mut(stride).enumerate() {
            f(frame, row);
        }
        out
    }
}

/// Windowed FFT of successive hops, keeping bins `0..window_size/2`.
pub fn stft(clip: &AudioClip, params: &StftParams) -> Result<ComplexSpectrogram, DspError> {
    params.validate()?;
    let ws = params.window_size;
    if clip.samples.len() < ws {
        return Err(DspError::TooShort {
            needed: ws,
            got: clip.samples.len(),
        });
    }
    let hop = params.hop();
    let n_frames = params.n_frames(clip.samples.len());
    let n_bins = ws / 2;
    let stride = n_bins + 1;
    let window = params.window_fn.coefficients(ws);
    let sr = clip.sample_rate_hz as f64;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(ws);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); ws];
    let mut data = Vec::with_capacity(n_frames * stride);
    for frame in 0..n_frames {
        let start = frame * hop;
        for (slot, (x, w)) in buf
            .iter_mut()
            .zip(clip.samples[start..start + ws].iter().zip(&window))
        {
            *slot = Complex64::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        data.extend_from_slice(&buf[..stride]);
    }

    Ok(ComplexSpectrogram {
        data,
        n_frames,
        n_bins,
        frame_times_s: (0..n_frames)
            .map(|i| clip.offset_s + (i * hop) as f64 / sr + ws as f64 / (2.0 * sr))
            .collect(),
        bin_freqs_hz: (0..n_bins).map(|k| k as f64 * sr / ws as f64).collect(),
        params: *params,
        sample_rate_hz: clip.sample_rate_hz,
        n_samples: clip.samples.len(),
        offset_s: clip.offset_s,
    })
}

/// Weighted overlap-add resynthesis. The output has the length and offset of
/// the analysed clip; samples past the last full window are zero.
pub fn istft(spec: &ComplexSpectrogram) -> Result<AudioClip, DspError> {
    let params = spec.params;
    if !params.satisfies_cola() {
        return Err(DspError::ReconstructionUnsupported(format!(
            "{} window at {} overlap does not satisfy constant overlap-add",
            params.window_fn.name(),
            params.overlap_fraction
        )));
    }
    let ws = params.window_size;
    let hop = params.hop();
    let n_bins = spec.n_bins;
    let window = params.window_fn.coefficients(ws);

    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(ws);
    let mut scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); ws];
    let mut num = vec![0.0; spec.n_samples];
    let mut den = vec![0.0; spec.n_samples];
    let scale = 1.0 / ws as f64;

    for frame in 0..spec.n_frames {
        let row = &spec.data[frame * (n_bins + 1)..(frame + 1) * (n_bins + 1)];
        // Hermitian completion of the half spectrum
        buf[0] = Complex64::new(row[0].re, 0.0);
        buf[n_bins] = Complex64::new(row[n_bins].re, 0.0);
        for k in 1..n_bins {
            buf[k] = row[k];
            buf[ws - k] = row[k].conj();
        }
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let start = frame * hop;
        for (j, (v, w)) in buf.iter().zip(&window).enumerate() {
            num[start + j] += v.re * scale * w;
            den[start + j] += w * w;
        }
    }

    let den_max = den.iter().cloned().fold(0.0, f64::max);
    let den_floor = 1e-3 * den_max;
    let samples = num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| {
            if d == 0.0 {
                0.0
            } else {
                n / d.max(den_floor)
            }
        })
        .collect();
    Ok(AudioClip {
        samples,
        sample_rate_hz: spec.sample_rate_hz,
        offset_s: spec.offset_s,
    })
}

/// Magnitude spectrogram in dB relative to its global maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrogramDb {
    values_db: Vec<f64>,
    n_frames: usize,
    n_bins: usize,
    floor_db: f64,
    frame_times_s: Vec<f64>,
    bin_freqs_hz: Vec<f64>,
    hop_s: f64,
    bin_width_hz: f64,
}

impl MagnitudeSpectrogramDb {
    /// Builds a dB array directly; entries are clamped to `[floor_db, 0]`.
    /// Frame times are cell centers spaced `hop_s` apart; bin frequencies
    /// are lower cell edges spaced `bin_width_hz` apart.
    #[allow(clippy::too_many_arguments)]
    pub fn from_values(
        values_db: Vec<f64>,
        n_frames: usize,
        n_bins: usize,
        floor_db: f64,
        frame_times_s: Vec<f64>,
        bin_freqs_hz: Vec<f64>,
        hop_s: f64,
        bin_width_hz: f64,
    ) -> Self {
        assert_eq!(values_db.len(), n_frames * n_bins);
        assert_eq!(frame_times_s.len(), n_frames);
        assert_eq!(bin_freqs_hz.len(), n_bins);
        MagnitudeSpectrogramDb {
            values_db: values_db.into_iter().map(|v| v.clamp(floor_db, 0.0)).collect(),
            n_frames,
            n_bins,
            floor_db,
            frame_times_s,
            bin_freqs_hz,
            hop_s,
            bin_width_hz,
        }
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn floor_db(&self) -> f64 {
        self.floor_db
    }

    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.values_db[frame * self.n_bins + bin]
    }

    pub fn values_db(&self) -> &[f64] {
        &self.values_db
    }

    pub fn frame_times_s(&self) -> &[f64] {
        &self.frame_times_s
    }

    pub fn bin_freqs_hz(&self) -> &[f64] {
        &self.bin_freqs_hz
    }

    pub fn hop_s(&self) -> f64 {
        self.hop_s
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.bin_width_hz
    }

    /// Bounds of the cell grid: frames are `hop_s` wide around their centers,
    /// bins span `[k * bw, (k + 1) * bw)`.
    pub fn extent(&self) -> Extent {
        Extent {
            t0_s: self.frame_times_s[0] - self.hop_s / 2.0,
            t1_s: self.frame_times_s[self.n_frames - 1] + self.hop_s / 2.0,
            f0_hz: self.bin_freqs_hz[0],
            f1_hz: self.bin_freqs_hz[self.n_bins - 1] + self.bin_width_hz,
        }
    }

    /// Sub-array of the cells that fall inside `region`.
    pub fn select(&self, region: &SelectionBox) -> Result<MagnitudeSpectrogramDb, DspError> {
        let frames: Vec<usize> = (0..self.n_frames)
            .filter(|&i| region.contains_time(self.frame_times_s[i]))
            .collect();
        let bins: Vec<usize> = (0..self.n_bins)
            .filter(|&k| region.contains_freq(self.bin_freqs_hz[k]))
            .collect();
        if frames.is_empty() || bins.is_empty() {
            return Err(DspError::EmptySelection);
        }
        let mut values = Vec::with_capacity(frames.len() * bins.len());
        for &f in &frames {
            values.extend(bins.iter().map(|&k| self.get(f, k)));
        }
        Ok(MagnitudeSpectrogramDb {
            values_db: values,
            n_frames: frames.len(),
            n_bins: bins.len(),
            floor_db: self.floor_db,
            frame_times_s: frames.iter().map(|&f| self.frame_times_s[f]).collect(),
            bin_freqs_hz: bins.iter().map(|&k| self.bin_freqs_hz[k]).collect(),
            hop_s: self.hop_s,
            bin_width_hz: self.bin_width_hz,
        })
    }
}

/// `20 log10(|v| / max|v|)`, clamped below at `floor_db`.
pub fn to_db(spec: &ComplexSpectrogram, floor_db: f64) -> Result<MagnitudeSpectrogramDb, DspError> {
    if !(floor_db.is_finite() && floor_db < 0.0) {
        return Err(DspError::InvalidParams(format!("floor_db must be negative, got {floor_db}")));
    }
    if spec.n_frames == 0 {
        return Err(DspError::TooShort {
            needed: spec.params.window_size,
            got: spec.n_samples,
        });
    }
    let max = spec.values().map(|v| v.norm()).fold(0.0, f64::max);
    let values_db = spec
        .values()
        .map(|v| {
            if max == 0.0 {
                floor_db
            } else {
                let mag = v.norm();
                if mag == 0.0 {
                    floor_db
                } else {
                    (20.0 * (mag / max).log10()).clamp(floor_db, 0.0)
                }
            }
        })
        .collect();
    Ok(MagnitudeSpectrogramDb {
        values_db,
        n_frames: spec.n_frames,
        n_bins: spec.n_bins,
        floor_db,
        frame_times_s: spec.frame_times_s.clone(),
        bin_freqs_hz: spec.bin_freqs_hz.clone(),
        hop_s: spec.hop_s(),
        bin_width_hz: spec.bin_width_hz(),
    })
}

/// Keeps cells inside `sel` and zeroes or attenuates the rest.
pub fn box_filter(
    spec: &ComplexSpectrogram,
    sel: &SelectionBox,
    mode: FilterMode,
) -> Result<ComplexSpectrogram, DspError> {
    sel.validate()?;
    let frame_in: Vec<bool> = spec.frame_times_s.iter().map(|&t| sel.contains_time(t)).collect();
    let bin_in: Vec<bool> = spec.bin_freqs_hz.iter().map(|&f| sel.contains_freq(f)).collect();
    if !frame_in.iter().any(|&b| b) || !bin_in.iter().any(|&b| b) {
        return Err(DspError::EmptySelection);
    }
    let nyquist_in = sel.f_max_hz >= spec.nyquist_hz() && sel.f_min_hz <= spec.nyquist_hz();
    let n_bins = spec.n_bins;
    Ok(spec.map_rows(|frame, row| {
        if !frame_in[frame] {
            row.iter_mut().for_each(|v| *v = mode.apply(*v));
            return;
        }
        for (v, &inside) in row[..n_bins].iter_mut().zip(&bin_in) {
            if !inside {
                *v = mode.apply(*v);
            }
        }
        if !nyquist_in {
            row[n_bins] = mode.apply(row[n_bins]);
        }
    }))
}

/// Frequency-only selection spanning every frame.
pub fn band_filter(
    spec: &ComplexSpectrogram,
    f_min_hz: f64,
    f_max_hz: f64,
    mode: FilterMode,
) -> Result<ComplexSpectrogram, DspError> {
    box_filter(spec, &full_time_box(spec, f_min_hz, f_max_hz), mode)
}

/// A box covering every frame of `spec` between the given frequencies.
pub fn full_time_box(spec: &ComplexSpectrogram, f_min_hz: f64, f_max_hz: f64) -> SelectionBox {
    let e = spec.extent();
    SelectionBox {
        t_min_s: e.t0_s.min(spec.offset_s),
        t_max_s: e.t1_s.max(spec.offset_s + spec.n_samples as f64 / spec.sample_rate_hz as f64),
        f_min_hz,
        f_max_hz,
    }
}

/// Per-row noise statistic subtracted by [`noise_reduce_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseStatistic {
    #[default]
    Median,
    Mean,
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().cloned().fold(f64::MIN, f64::max);
        (lower + upper) / 2.0
    }
}

/// Row-wise median subtraction on magnitudes.
pub fn noise_reduce(spec: &ComplexSpectrogram) -> ComplexSpectrogram {
    noise_reduce_with(spec, NoiseStatistic::Median)
}

/// Subtracts a per-bin statistic of the magnitudes from every cell in that
/// bin, flooring at zero and keeping phase. Rows whose statistic is zero are
/// left untouched.
pub fn noise_reduce_with(spec: &ComplexSpectrogram, stat: NoiseStatistic) -> ComplexSpectrogram {
    let stride = spec.n_bins + 1;
    let mut out = spec.clone();
    let mut column = vec![0.0; spec.n_frames];
    for bin in 0..stride {
        for (frame, slot) in column.iter_mut().enumerate() {
            *slot = spec.data[frame * stride + bin].norm();
        }
        let level = match stat {
            NoiseStatistic::Median => median(&mut column),
            NoiseStatistic::Mean => column.iter().sum::<f64>() / column.len().max(1) as f64,
        };
        if level == 0.0 {
            continue;
        }
        for frame in 0..spec.n_frames {
            let v = &mut out.data[frame * stride + bin];
            let mag = v.norm();
            if mag == 0.0 {
                continue;
            }
            let reduced = mag - level;
            *v = if reduced <= 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                *v * (reduced / mag)
            };
        }
    }
    out
}
