use std::sync::Arc;
use std::thread;

use audiolabel_core::annotations::{summarize, LabelStore, SummaryFilter};
use audiolabel_core::audio_io::{decode_wav, encode_wav, segment};
use audiolabel_core::demo::write_demo_project;
use audiolabel_core::dsp::{box_filter, istft, stft, to_db, DEFAULT_FLOOR_DB};
use audiolabel_core::render::{rasterize, RenderParams};
use audiolabel_core::{FilterMode, Label, Project, SelectionBox, StftParams};

#[test]
fn demo_recording_through_filter_and_render() {
    let dir = tempfile::tempdir().unwrap();
    write_demo_project(dir.path()).unwrap();
    let project = Project::load(dir.path()).unwrap();
    let name = "RAHORA_20220601_043000.wav";
    let bytes = std::fs::read(project.audio_path(name).unwrap()).unwrap();
    let clip = decode_wav(&bytes).unwrap();
    let seg = segment(&clip, 0, 15.0).unwrap();
    assert_eq!(seg.len(), 15 * 24_000);

    let params = StftParams::default();
    let spec = stft(&seg, &params).unwrap();
    assert_eq!((spec.n_frames(), spec.n_bins()), (5622, 128));

    let db = to_db(&spec, DEFAULT_FLOOR_DB).unwrap();
    let raster = rasterize(&db, &RenderParams::default()).unwrap();
    assert_eq!(raster.rgb.len(), 1124 * 256 * 3);
    assert!(raster.to_png().unwrap().starts_with(b"\x89PNG"));

    let sel = SelectionBox::new(2.0, 4.0, 1500.0, 9000.0).unwrap();
    let filtered = box_filter(&spec, &sel, FilterMode::ZeroOutside).unwrap();
    let out = istft(&filtered).unwrap();
    assert_eq!(out.len(), seg.len());
    let wav = encode_wav(&out);
    let back = decode_wav(&wav).unwrap();
    assert_eq!(back.len(), seg.len());
    let outside: f64 = back.samples[..24_000].iter().map(|v| v * v).sum();
    assert!(outside < 1e-6, "energy before the selection: {outside}");
}

#[test]
fn concurrent_users_do_not_interfere() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(LabelStore::open(dir.path()).unwrap());
    let handles: Vec<_> = ["alice", "bob", "carol"]
        .into_iter()
        .map(|user| {
            let store = Arc::clone(&store);
            thread::spawn(move || {
                for i in 0..20 {
                    let b = SelectionBox::new(i as f64, i as f64 + 0.5, 1000.0, 2000.0).unwrap();
                    let l = Label::new("a.wav", b, "Wren", user);
                    store.save_label(Some(user), l).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    for user in ["alice", "bob", "carol"] {
        let labels = store.labels(Some(user)).unwrap();
        assert_eq!(labels.len(), 20);
        assert!(labels.iter().all(|l| l.labeller == user));
        let starts: Vec<f64> = labels.iter().map(|l| l.bbox.t_min_s).collect();
        assert_eq!(starts, (0..20).map(|i| i as f64).collect::<Vec<_>>());
    }
    let rows = summarize(&store.all_labels().unwrap(), &[], &SummaryFilter::default());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].count, 60);
}

#[test]
fn same_user_threads_lose_no_writes() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(LabelStore::open(dir.path()).unwrap());
    let handles: Vec<_> = (0..4)
        .map(|t| {
            let store = Arc::clone(&store);
            thread::spawn(move || {
                for i in 0..10 {
                    let b = SelectionBox::new(0.0, 1.0, 0.0, 100.0).unwrap();
                    let l = Label::new("a.wav", b, &format!("C{t}-{i}"), "dana");
                    store.save_label(Some("dana"), l).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(store.labels(Some("dana")).unwrap().len(), 40);
}
