//! Synthetic five-site project: species lists, recorder metadata, BTO codes
//! and generated recordings with bird-like chirps over background noise.

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::audio_io::{encode_wav, AudioClip};
use crate::project::{AUDIO_DIR, BTO_CODES_FILE, LOCATION_LIST_FILE, SPECIES_LIST_FILE};

pub const SPECIES_LIST_CSV: &[u8] = include_bytes!("../demo/species_list.csv");
pub const LOCATION_LIST_CSV: &[u8] = include_bytes!("../demo/location_list.csv");
pub const BTO_CODES_CSV: &[u8] = include_bytes!("../demo/bto_codes.csv");

pub const DEMO_SAMPLE_RATE_HZ: u32 = 24_000;

/// A generated recording.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoRecording {
    pub file_name: &'static str,
    pub duration_s: f64,
    pub seed: u64,
    /// Low-frequency hum amplitude, 0 for none.
    pub hum: f64,
}

pub const DEMO_RECORDINGS: [DemoRecording; 6] = [
    DemoRecording {
        file_name: "RECORDER_20220503_051500.wav",
        duration_s: 20.0,
        seed: 1,
        hum: 0.0,
    },
    DemoRecording {
        file_name: "CLOOSHVALLEY_20220514_060000.wav",
        duration_s: 10.0,
        seed: 2,
        hum: 0.05,
    },
    DemoRecording {
        file_name: "RAHORA_20220601_043000.wav",
        duration_s: 20.0,
        seed: 3,
        hum: 0.0,
    },
    DemoRecording {
        file_name: "RICHFIELDM1_20220612_044500_start_01_30.wav",
        duration_s: 15.0,
        seed: 4,
        hum: 0.08,
    },
    DemoRecording {
        file_name: "TEEVURCHER_20220702_053000.wav",
        duration_s: 10.0,
        seed: 5,
        hum: 0.02,
    },
    DemoRecording {
        file_name: "badname.wav",
        duration_s: 5.0,
        seed: 6,
        hum: 0.0,
    },
];

/// Samples for one demo recording: a train of swept syllables between 2 and
/// 8 kHz, optional turbine-like hum near 100 Hz, and low white noise.
pub fn synthesize(rec: &DemoRecording, sample_rate_hz: u32) -> AudioClip {
    let sr = sample_rate_hz as f64;
    let n = (rec.duration_s * sr).round() as usize;
    let mut rng = StdRng::seed_from_u64(rec.seed);
    let mut x: Vec<f64> = (0..n).map(|_| 0.01 * (rng.random::<f64>() * 2.0 - 1.0)).collect();

    if rec.hum > 0.0 {
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64 / sr;
            *v += rec.hum * ((2.0 * PI * 100.0 * t).sin() + 0.5 * (2.0 * PI * 200.0 * t).sin());
        }
    }

    let mut t0 = rng.random_range(0.2..1.0);
    while t0 < rec.duration_s - 0.5 {
        let len = rng.random_range(0.08..0.35);
        let f_start = rng.random_range(2000.0..8000.0);
        let f_end = rng.random_range(2000.0..8000.0);
        let amp = rng.random_range(0.15..0.4);
        let i0 = (t0 * sr) as usize;
        let m = (len * sr) as usize;
        let mut phase = 0.0;
        for j in 0..m.min(n.saturating_sub(i0)) {
            let u = j as f64 / m as f64;
            let f = f_start + (f_end - f_start) * u;
            phase += 2.0 * PI * f / sr;
            let env = (PI * u).sin().powi(2);
            x[i0 + j] += amp * env * phase.sin();
        }
        t0 += len + rng.random_range(0.1..1.5);
    }
    for v in &mut x {
        *v = v.clamp(-1.0, 1.0);
    }
    AudioClip::new(x, sample_rate_hz)
}

/// Writes the demo project under `root`: the three config CSVs, an `audio/`
/// directory of recordings and an empty `labels/` directory. Existing files
/// are overwritten.
pub fn write_demo_project(root: &Path) -> io::Result<Vec<String>> {
    fs::create_dir_all(root.join(AUDIO_DIR))?;
    fs::create_dir_all(root.join("labels"))?;
    fs::write(root.join(SPECIES_LIST_FILE), SPECIES_LIST_CSV)?;
    fs::write(root.join(LOCATION_LIST_FILE), LOCATION_LIST_CSV)?;
    fs::write(root.join(BTO_CODES_FILE), BTO_CODES_CSV)?;
    let mut names = Vec::new();
    for rec in &DEMO_RECORDINGS {
        let clip = synthesize(rec, DEMO_SAMPLE_RATE_HZ);
        fs::write(root.join(AUDIO_DIR).join(rec.file_name), encode_wav(&clip))?;
        names.push(rec.file_name.to_string());
    }
    Ok(names)
}
