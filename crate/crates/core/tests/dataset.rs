mod common;

use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage};
use motcom::ingest::{frame_image_path, load_sequence, parse_gt_str, TargetFilter};
use motcom::report::{discover_sequences, run_compute, write_outputs, BackendChoice, RunConfig};
use motcom::Error;

const GT: &str = "\
1,1,10,10,20,40,1,1,1.0
1,2,30,12,20,40,1,1,0.8
2,1,12,10,20,40,1,1,1.0
2,2,28,12,20,40,1,1,0.6
3,1,14,10,20,40,1,1,1.0
3,2,26,12,20,40,1,1,0.9
3,3,0,0,5,5,0,7,1.0
";

fn write_sequence(root: &Path, name: &str, gt: &str, frames: u32) {
    let dir = root.join(name);
    fs::create_dir_all(dir.join("gt")).unwrap();
    fs::create_dir_all(dir.join("img1")).unwrap();
    fs::write(dir.join("gt/gt.txt"), gt).unwrap();
    fs::write(
        dir.join("seqinfo.ini"),
        format!("[Sequence]\nname={name}\nimDir=img1\nframeRate=25\nseqLength={frames}\nimWidth=64\nimHeight=48\nimExt=.png\n"),
    )
    .unwrap();
    for f in 1..=frames {
        let img = RgbImage::from_fn(64, 48, |x, y| Rgb([(x * 4) as u8, (y * 5) as u8, (f * 40) as u8]));
        img.save(dir.join(format!("img1/{f:06}.png"))).unwrap();
    }
}

#[test]
fn row_order_does_not_matter() {
    let mut lines: Vec<&str> = GT.lines().collect();
    let sorted = parse_gt_str(GT, "a", &TargetFilter::default()).unwrap();
    lines.reverse();
    lines.swap(1, 4);
    let shuffled = parse_gt_str(&lines.join("\n"), "b", &TargetFilter::default()).unwrap();
    assert_eq!(sorted.states(), shuffled.states());
    assert_eq!(sorted.target_count(), 2);
    assert_eq!(sorted.states().len(), 7);
}

#[test]
fn loads_directory_layout_and_png_frames() {
    let root = tempfile::tempdir().unwrap();
    write_sequence(root.path(), "SYN-01", GT, 3);
    let seq = load_sequence(root.path().join("SYN-01"), &TargetFilter::default()).unwrap();
    assert_eq!(seq.name(), "SYN-01");
    assert_eq!(seq.frame_rate, 25.0);
    assert_eq!(seq.frame_count(), 3);
    assert!(frame_image_path(&seq, 2).unwrap().ends_with("img1/000002.png"));
    assert!(matches!(frame_image_path(&seq, 9), Err(Error::MissingFrame { frame: 9, .. })));
}

#[test]
fn discovery_filters_by_name() {
    let root = tempfile::tempdir().unwrap();
    write_sequence(root.path(), "SYN-02", GT, 3);
    write_sequence(&root.path().join("train"), "SYN-01", GT, 3);
    fs::create_dir_all(root.path().join("empty")).unwrap();
    let found = discover_sequences(&[root.path().to_path_buf()], &[], &[]).unwrap();
    let names: Vec<_> = found.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
    assert_eq!(names, ["SYN-01", "SYN-02"]);
    let only = discover_sequences(&[root.path().to_path_buf()], &[], &["*-01".into()]).unwrap();
    assert_eq!(only.len(), 1);
    assert!(matches!(
        discover_sequences(&[root.path().to_path_buf()], &["nothing*".into()], &[]),
        Err(Error::NoSequences(_))
    ));
}

#[test]
fn batch_run_isolates_failures_and_writes_outputs() {
    let root = tempfile::tempdir().unwrap();
    write_sequence(root.path(), "SYN-01", GT, 3);
    // every track has a single state, so motion is undefined
    write_sequence(root.path(), "SYN-BAD", "1,1,1,1,5,5,1,1,1\n1,2,9,9,5,5,1,1,1\n", 1);
    let out = root.path().join("out");
    let cfg = RunConfig {
        data: vec![root.path().to_path_buf()],
        backend: BackendChoice::Test,
        out: out.clone(),
        cache: true,
        ..RunConfig::default()
    };
    let report = run_compute(&cfg).unwrap();
    assert_eq!(report.sequences.len(), 1);
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].sequence, "SYN-BAD");
    let seq = &report.sequences[0];
    assert!(seq.visual.is_some());
    assert!(!seq.motcom.partial);
    assert_eq!(seq.occlusion.source, motcom::occlusion::OcclusionSource::AnnotatedVisibility);

    let (json, csv) = write_outputs(&report, &out).unwrap();
    let summary = fs::read_to_string(csv).unwrap();
    assert!(summary.starts_with("name,tracks,density,ocom,mcom,vcom,motcom\nSYN-01,2,"));
    let parsed: serde_json::Value = serde_json::from_slice(&fs::read(json).unwrap()).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert!(out.join("cache/SYN-01.grid16.json").is_file());

    let again = run_compute(&cfg).unwrap();
    assert_eq!(again.sequences[0].visual, report.sequences[0].visual);
}
