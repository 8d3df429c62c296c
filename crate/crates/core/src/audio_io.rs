//! WAV decoding and encoding, gain, segmentation, and recording file-name parsing.
//!
//! Decoding accepts PCM integer (8/16/24/32-bit) and IEEE float (32-bit) data
//! with one or two channels. Stereo is mixed down by channel mean and every
//! sample is rescaled to [-1, 1] by the format's full-scale value. Encoding
//! always produces 16-bit PCM mono with the canonical 44-byte header.

use chrono::NaiveDateTime;
use serde::Serialize;
use thiserror::Error;

const WAVE_FORMAT_PCM: u16 = 0x0001;
const WAVE_FORMAT_IEEE_FLOAT: u16 = 0x0003;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("malformed WAV: {0}")]
    Format(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedFormat(String),
    #[error("segment {index} out of range ({n_segments} segments available)")]
    OutOfRange { index: usize, n_segments: usize },
    #[error("invalid audio parameter: {0}")]
    InvalidParameter(String),
}

/// Mono waveform with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    /// Seconds from the start of the source file.
    pub offset_s: f64,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        AudioClip {
            samples,
            sample_rate_hz,
            offset_s: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn end_s(&self) -> f64 {
        self.offset_s + self.duration_s()
    }

    /// Number of samples in a segment of `clip_len_s` seconds at this rate.
    pub fn segment_len(&self, clip_len_s: f64) -> usize {
        ((clip_len_s * self.sample_rate_hz as f64).round() as usize).max(1)
    }

    /// Number of segments of `clip_len_s` needed to cover the clip (ceiling).
    pub fn n_segments(&self, clip_len_s: f64) -> usize {
        n_segments(self.samples.len(), self.sample_rate_hz, clip_len_s)
    }
}

/// Segment count for `n_samples` at `sample_rate_hz` split into `clip_len_s` pieces.
pub fn n_segments(n_samples: usize, sample_rate_hz: u32, clip_len_s: f64) -> usize {
    let seg = ((clip_len_s * sample_rate_hz as f64).round() as usize).max(1);
    n_samples.div_ceil(seg)
}

/// Header-level facts about a WAV stream, read without decoding samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavInfo {
    pub sample_rate_hz: u32,
    pub channels: u16,
    pub bits_per_sample: u16,
    pub n_frames: usize,
}

impl WavInfo {
    pub fn duration_s(&self) -> f64 {
        self.n_frames as f64 / self.sample_rate_hz as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SampleEncoding {
    Int,
    Float,
}

struct ParsedWav<'a> {
    info: WavInfo,
    encoding: SampleEncoding,
    data: &'a [u8],
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_wav(bytes: &[u8]) -> Result<ParsedWav<'_>, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::Format("missing RIFF/WAVE header".into()));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(AudioError::Format("fmt chunk shorter than 16 bytes".into()));
                }
                let mut tag = read_u16(body, 0);
                let channels = read_u16(body, 2);
                let rate = read_u32(body, 4);
                let block_align = read_u16(body, 12);
                let bits = read_u16(body, 14);
                if tag == WAVE_FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(AudioError::Format("truncated WAVE_FORMAT_EXTENSIBLE".into()));
                    }
                    // first two bytes of the subformat GUID carry the real tag
                    tag = read_u16(body, 24);
                }
                fmt = Some((tag, channels, rate, block_align, bits));
            }
            b"data" => {
                data = Some(body);
            }
            _ => {}
        }
        if data.is_some() && fmt.is_some() {
            break;
        }
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }
    let (tag, channels, rate, block_align, bits) =
        fmt.ok_or_else(|| AudioError::Format("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::Format("no data chunk".into()))?;

    let encoding = match (tag, bits) {
        (WAVE_FORMAT_PCM, 8 | 16 | 24 | 32) => SampleEncoding::Int,
        (WAVE_FORMAT_IEEE_FLOAT, 32) => SampleEncoding::Float,
        (WAVE_FORMAT_PCM, b) => {
            return Err(AudioError::UnsupportedFormat(format!("{b}-bit integer PCM")))
        }
        (WAVE_FORMAT_IEEE_FLOAT, b) => {
            return Err(AudioError::UnsupportedFormat(format!("{b}-bit IEEE float")))
        }
        (0x0006, _) => return Err(AudioError::UnsupportedFormat("A-law".into())),
        (0x0007, _) => return Err(AudioError::UnsupportedFormat("mu-law".into())),
        (0x0002, _) => return Err(AudioError::UnsupportedFormat("Microsoft ADPCM".into())),
        (t, _) => {
            return Err(AudioError::UnsupportedFormat(format!("format tag 0x{t:04X}")))
        }
    };
    if channels == 0 || channels > 2 {
        return Err(AudioError::UnsupportedFormat(format!("{channels} channels")));
    }
    if rate == 0 {
        return Err(AudioError::Format("sample rate is zero".into()));
    }
    let frame_bytes = channels as usize * (bits as usize / 8);
    if block_align as usize != frame_bytes {
        return Err(AudioError::Format(format!(
            "block align {block_align} does not match {channels} x {bits}-bit"
        )));
    }
    Ok(ParsedWav {
        info: WavInfo {
            sample_rate_hz: rate,
            channels,
            bits_per_sample: bits,
            n_frames: data.len() / frame_bytes,
        },
        encoding,
        data,
    })
}

/// Reads the header of a WAV stream.
pub fn wav_info(bytes: &[u8]) -> Result<WavInfo, AudioError> {
    parse_wav(bytes).map(|p| p.info)
}

fn decode_sample(b: &[u8], bits: u16, encoding: SampleEncoding) -> f64 {
    match (encoding, bits) {
        (SampleEncoding::Int, 8) => (b[0] as f64 - 128.0) / 128.0,
        (SampleEncoding::Int, 16) => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        (SampleEncoding::Int, 24) => {
            let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
            v as f64 / 8_388_608.0
        }
        (SampleEncoding::Int, 32) => {
            i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0
        }
        (SampleEncoding::Float, _) => {
            let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
            if v.is_finite() {
                v.clamp(-1.0, 1.0)
            } else {
                0.0
            }
        }
        _ => unreachable!("encoding validated in parse_wav"),
    }
}

/// Decodes a PCM or float WAV stream to a mono clip.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    let parsed = parse_wav(bytes)?;
    let WavInfo {
        sample_rate_hz,
        channels,
        bits_per_sample,
        n_frames,
    } = parsed.info;
    let width = bits_per_sample as usize / 8;
    let frame_bytes = width * channels as usize;
    let samples = parsed
        .data
        .chunks_exact(frame_bytes)
        .take(n_frames)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(width)
                .map(|s| decode_sample(s, bits_per_sample, parsed.encoding))
                .sum();
            sum / channels as f64
        })
        .collect();
    Ok(AudioClip::new(samples, sample_rate_hz))
}

/// Quantizes one sample to 16-bit PCM.
pub fn quantize_i16(x: f64) -> i16 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes a clip as 16-bit PCM mono WAV with a 44-byte header.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAVE_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &clip.samples {
        out.extend_from_slice(&quantize_i16(s).to_le_bytes());
    }
    out
}

/// Multiplies every sample by `10^(gain_db/20)` and clamps to [-1, 1].
pub fn apply_gain(clip: &AudioClip, gain_db: f64) -> Result<AudioClip, AudioError> {
    if !gain_db.is_finite() {
        return Err(AudioError::InvalidParameter(format!("gain_db must be finite, got {gain_db}")));
    }
    if gain_db == 0.0 {
        return Ok(clip.clone());
    }
    let factor = 10f64.powf(gain_db / 20.0);
    Ok(AudioClip {
        samples: clip.samples.iter().map(|s| (s * factor).clamp(-1.0, 1.0)).collect(),
        sample_rate_hz: clip.sample_rate_hz,
        offset_s: clip.offset_s,
    })
}

/// Returns segment `index` of length `clip_len_s`; the final segment may be shorter.
pub fn segment(clip: &AudioClip, index: usize, clip_len_s: f64) -> Result<AudioClip, AudioError> {
    if !(clip_len_s.is_finite() && clip_len_s > 0.0) {
        return Err(AudioError::InvalidParameter(format!(
            "clip length must be positive, got {clip_len_s}"
        )));
    }
    let seg = clip.segment_len(clip_len_s);
    let n = clip.n_segments(clip_len_s);
    if index >= n {
        return Err(AudioError::OutOfRange {
            index,
            n_segments: n,
        });
    }
    let start = index * seg;
    let end = (start + seg).min(clip.samples.len());
    Ok(AudioClip {
        samples: clip.samples[start..end].to_vec(),
        sample_rate_hz: clip.sample_rate_hz,
        offset_s: clip.offset_s + start as f64 / clip.sample_rate_hz as f64,
    })
}

/// Metadata parsed from `RECORDERNAME_YYYYMMDD_HHMMSS[_start_MM_SS].wav`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordingFile {
    pub file_name: String,
    pub recorder_name: Option<String>,
    pub recorded_at: Option<NaiveDateTime>,
    pub start_offset_s: f64,
    pub duration_s: Option<f64>,
    /// Set when the name does not follow the recorder/date/time convention.
    pub metadata_unavailable: bool,
}

impl RecordingFile {
    fn unavailable(name: &str) -> Self {
        RecordingFile {
            file_name: name.to_string(),
            recorder_name: None,
            recorded_at: None,
            start_offset_s: 0.0,
            duration_s: None,
            metadata_unavailable: true,
        }
    }
}

fn all_digits(s: &str, len: usize) -> bool {
    s.len() == len && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses a recording file name. Never fails: names outside the convention
/// come back with `metadata_unavailable` set.
pub fn parse_filename(name: &str) -> RecordingFile {
    let stem = match name.rfind('.') {
        Some(dot) if dot > 0 => &name[..dot],
        _ => name,
    };
    let parts: Vec<&str> = stem.split('_').collect();

    let (core, start_offset_s) = match parts.as_slice() {
        [head @ .., "start", mm, ss] if all_digits(mm, 2) && all_digits(ss, 2) => {
            let mm: u32 = mm.parse().unwrap_or(0);
            let ss: u32 = ss.parse().unwrap_or(0);
            if ss >= 60 {
                return RecordingFile::unavailable(name);
            }
            (head, f64::from(mm * 60 + ss))
        }
        all => (all, 0.0),
    };
    let [recorder @ .., date, time] = core else {
        return RecordingFile::unavailable(name);
    };
    if recorder.is_empty() || recorder.iter().all(|p| p.is_empty()) {
        return RecordingFile::unavailable(name);
    }
    if !all_digits(date, 8) || !all_digits(time, 6) {
        return RecordingFile::unavailable(name);
    }
    let Ok(recorded_at) = NaiveDateTime::parse_from_str(&format!("{date}{time}"), "%Y%m%d%H%M%S")
    else {
        return RecordingFile::unavailable(name);
    };
    RecordingFile {
        file_name: name.to_string(),
        recorder_name: Some(recorder.join("_")),
        recorded_at: Some(recorded_at),
        start_offset_s,
        duration_s: None,
        metadata_unavailable: false,
    }
}
