//! Core building blocks for a spectrogram-based audio annotation service.
//!
//! - [`audio_io`]: WAV decode/encode, gain, segmentation and recording file names.
//! - [`dsp`]: STFT/ISTFT, dB conversion, selection filtering and row-wise noise reduction.
//! - [`render`]: palette-mapped spectrogram rasters and PNG encoding.
//! - [`annotations`]: per-user CSV label store, summaries and export.
//! - [`project`]: species lists, recorder metadata, BTO codes and the class list.
//! - [`demo`]: a synthetic five-site project used by tests and `audiolabel demo`.

pub mod annotations;
pub mod audio_io;
pub mod demo;
pub mod dsp;
pub mod project;
pub mod render;

pub use annotations::{Label, LabelChanges, LabelStore};
pub use audio_io::{AudioClip, RecordingFile};
pub use dsp::{ComplexSpectrogram, FilterMode, MagnitudeSpectrogramDb, SelectionBox, StftParams};
pub use project::{ClassGroup, ClassList, Project};
pub use render::{Palette, RenderParams};

/// Strips a leading UTF-8 byte order mark, if present.
pub(crate) fn strip_bom(bytes: &[u8]) -> &[u8] {
    bytes.strip_prefix(&[0xEF, 0xBB, 0xBF]).unwrap_or(bytes)
}
