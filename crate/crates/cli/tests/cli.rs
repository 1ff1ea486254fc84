//! End-to-end tests of the `evtensor` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evtensor::{
    make_representation, read_tensor_npy, write_events, Event, EventFileFormat, EventWindow,
    GridConfig, Polarity, RepresentationKind,
};
use tempfile::TempDir;

fn evtensor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evtensor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture_window() -> EventWindow {
    let events = (0..40u16)
        .map(|i| {
            let p = if i % 3 == 0 {
                Polarity::Negative
            } else {
                Polarity::Positive
            };
            Event::new(i % 7, i % 5, 1000 + 37 * i as u64, p)
        })
        .collect();
    EventWindow::new(events, 1000, 2500, 7, 5).unwrap()
}

fn write_fixture(
    dir: &TempDir,
    name: &str,
    window: &EventWindow,
    format: EventFileFormat,
) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, write_events(window, format).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn npy_shape(path: &Path) -> Vec<usize> {
    read_tensor_npy(&std::fs::read(path).unwrap())
        .unwrap()
        .shape()
        .to_vec()
}

#[test]
fn convert_voxel_and_stacked_shapes() {
    let dir = TempDir::new().unwrap();
    let input = write_fixture(&dir, "in.evt1", &fixture_window(), EventFileFormat::Evt1);
    let out = dir.path().join("voxel.npy");
    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--repr",
        "voxel",
        "--measurement",
        "polarity",
        "--kernel",
        "trilinear",
        "--bins",
        "9",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(npy_shape(&out), vec![9, 5, 7]);
    assert!(stdout(&o).contains("dropped: 0 of 40 events"));

    let out = dir.path().join("stacked.npy");
    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--repr",
        "est-stacked",
        "--bins",
        "9",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(npy_shape(&out), vec![18, 5, 7]);
}

#[test]
fn convert_output_matches_library() {
    let dir = TempDir::new().unwrap();
    let window = fixture_window();
    let input = write_fixture(&dir, "in.csv", &window, EventFileFormat::Csv);
    let out = dir.path().join("est.npy");
    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--width",
        "7",
        "--height",
        "5",
        "--kernel",
        "alpha",
        "--tau",
        "0.7",
        "--bins",
        "4",
        "--precision",
        "f64",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = read_tensor_npy(&std::fs::read(&out).unwrap()).unwrap();

    // The CSV reader fits the window to the first and last event.
    let events = window.events().to_vec();
    let (t0, t1) = (events[0].t, events.last().unwrap().t);
    let read_back = EventWindow::new(events, t0, t1, 7, 5).unwrap();
    let cfg = GridConfig::for_window(&read_back)
        .with_bins(4)
        .with_kernel(evtensor::KernelSpec::alpha(0.7).unwrap())
        .with_precision(evtensor::Precision::Float64);
    let want = make_representation(&read_back, &cfg, RepresentationKind::Est).unwrap();
    assert_eq!(got.shape(), want.shape());
    assert_eq!(got.data(), want.data());
}

#[test]
fn every_listed_combination_is_accepted() {
    let dir = TempDir::new().unwrap();
    let input = write_fixture(&dir, "in.evt1", &fixture_window(), EventFileFormat::Evt1);
    let out = dir.path().join("out.npy");
    let weights = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/fixtures/trilinear_mlp.json"
    );
    for measurement in ["polarity", "count", "timestamp"] {
        for kernel in [
            "delta",
            "trilinear",
            "exponential",
            "alpha",
            "mlp",
            "lookup",
        ] {
            let mut args = vec![
                "convert",
                "--input",
                s(&input),
                "--measurement",
                measurement,
                "--kernel",
                kernel,
                "--bins",
                "4",
                "--output",
                s(&out),
            ];
            match kernel {
                "exponential" | "alpha" => args.extend(["--tau", "2.5"]),
                "mlp" => args.extend(["--weights", weights]),
                "lookup" => args.extend(["--weights", weights, "--lut-resolution", "401"]),
                _ => {}
            }
            let o = evtensor(&args);
            assert!(o.status.success(), "{measurement} {kernel}: {}", stderr(&o));
            assert_eq!(npy_shape(&out), vec![2, 4, 5, 7]);
        }
    }
    let cases: [(&str, &[usize]); 7] = [
        ("est", &[2, 3, 5, 7]),
        ("voxel", &[3, 5, 7]),
        ("two-channel", &[2, 5, 7]),
        ("event-frame", &[5, 7]),
        ("sae", &[2, 5, 7]),
        ("count-image", &[2, 5, 7]),
        ("est-stacked", &[6, 5, 7]),
    ];
    for (repr, shape) in cases {
        let o = evtensor(&[
            "convert",
            "--input",
            s(&input),
            "--repr",
            repr,
            "--bins",
            "3",
            "--threads",
            "3",
            "--strict",
            "--output",
            s(&out),
        ]);
        assert!(o.status.success(), "{repr}: {}", stderr(&o));
        assert_eq!(npy_shape(&out), shape.to_vec(), "{repr}");
        assert!(
            !stdout(&o).contains("dropped"),
            "strict mode prints no drop report"
        );
    }
}

#[test]
fn contradictory_flags_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write_fixture(&dir, "in.evt1", &fixture_window(), EventFileFormat::Evt1);
    let out = dir.path().join("out.npy");
    let bad: [&[&str]; 11] = [
        &["--tau", "2"],
        &["--kernel", "trilinear", "--tau", "2"],
        &["--kernel", "delta", "--weights", "w.json"],
        &["--kernel", "mlp", "--lut-resolution", "101"],
        &["--repr", "sae", "--measurement", "count"],
        &["--repr", "sae", "--kernel", "trilinear"],
        &["--repr", "count-image", "--kernel", "alpha", "--tau", "1"],
        &["--bins", "0"],
        &["--threads", "0"],
        &["--width", "4"],
        &["--precision", "f16"],
    ];
    for extra in bad {
        let mut args = vec!["convert", "--input", s(&input), "--output", s(&out)];
        args.extend_from_slice(extra);
        let o = evtensor(&args);
        assert_eq!(o.status.code(), Some(2), "{extra:?}: {}", stderr(&o));
    }
    assert!(!out.exists());

    let csv = write_fixture(&dir, "in.csv", &fixture_window(), EventFileFormat::Csv);
    let o = evtensor(&["convert", "--input", s(&csv), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--width"));
}

#[test]
fn consistent_fixed_representation_flags_are_accepted() {
    let dir = TempDir::new().unwrap();
    let input = write_fixture(&dir, "in.evt1", &fixture_window(), EventFileFormat::Evt1);
    let out = dir.path().join("out.npy");
    for extra in [
        [
            "--repr",
            "sae",
            "--measurement",
            "timestamp",
            "--kernel",
            "delta",
        ],
        [
            "--repr",
            "count-image",
            "--measurement",
            "count",
            "--kernel",
            "delta",
        ],
    ] {
        let mut args = vec!["convert", "--input", s(&input), "--output", s(&out)];
        args.extend_from_slice(&extra);
        let o = evtensor(&args);
        assert!(o.status.success(), "{extra:?}: {}", stderr(&o));
    }
}

#[test]
fn module_errors_exit_1_with_one_line() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.npy");

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "t,x,y,p\n").unwrap();
    let o = evtensor(&[
        "convert",
        "--input",
        s(&empty),
        "--width",
        "4",
        "--height",
        "4",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EmptyStream"));
    assert_eq!(stderr(&o).lines().count(), 1);

    let input = write_fixture(&dir, "in.evt1", &fixture_window(), EventFileFormat::Evt1);
    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--kernel",
        "alpha",
        "--tau=-1",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InvalidTau"));

    let weights = dir.path().join("nan.json");
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/fixtures/trilinear_mlp.json"
    ))
    .unwrap()
    .replacen("1.0", "NaN", 1);
    std::fs::write(&weights, text).unwrap();
    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--kernel",
        "mlp",
        "--weights",
        s(&weights),
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("NonFiniteWeight"));

    let o = evtensor(&[
        "convert",
        "--input",
        "/nonexistent/in.csv",
        "--width",
        "2",
        "--height",
        "2",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("IoError"));
}

#[test]
fn strict_mode_rejects_out_of_bounds() {
    let dir = TempDir::new().unwrap();
    let input = write_fixture(&dir, "in.csv", &fixture_window(), EventFileFormat::Csv);
    let out = dir.path().join("out.npy");
    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--width",
        "3",
        "--height",
        "5",
        "--strict",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("OutOfBounds"));

    let o = evtensor(&[
        "convert",
        "--input",
        s(&input),
        "--width",
        "3",
        "--height",
        "5",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success());
    // x = i % 7 is 3..6 for 4 of every 7 events.
    let outside = (0..40).filter(|i| i % 7 >= 3).count();
    assert!(stdout(&o).contains(&format!(
        "dropped: {outside} of 40 events ({outside} outside sensor, 0 outside window)"
    )));
}

#[test]
fn info_summaries() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("two.csv");
    std::fs::write(&csv, "t,x,y,p\n10,1,0,1\n50,0,1,0\n").unwrap();
    let o = evtensor(&["info", "--input", s(&csv)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("events:     2 (+1, -1)"), "{text}");
    assert!(text.contains("duration:   40 us"));

    let window = EventWindow::new(
        vec![Event::new(0, 0, 5, Polarity::Positive)],
        0,
        100,
        346,
        260,
    )
    .unwrap();
    let evt1 = write_fixture(&dir, "one.evt1", &window, EventFileFormat::Evt1);
    let o = evtensor(&["info", "--input", s(&evt1)]);
    let text = stdout(&o);
    assert!(text.contains("sensor:     346x260"), "{text}");
    assert!(text.contains("t1:         100 us"));

    // Polarity byte of the first record.
    let mut corrupt = std::fs::read(&evt1).unwrap();
    corrupt[25 + 12] = 7;
    let bad = dir.path().join("bad.evt1");
    std::fs::write(&bad, &corrupt).unwrap();
    let o = evtensor(&["info", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("ParseError") && stderr(&o).contains("(at byte 37)"),
        "{}",
        stderr(&o)
    );

    corrupt[25 + 12] = 1;
    corrupt.extend_from_slice(&[1, 2, 3]);
    std::fs::write(&bad, &corrupt).unwrap();
    let o = evtensor(&["info", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("TruncatedRecord"), "{}", stderr(&o));

    let csv_bad = dir.path().join("bad.csv");
    std::fs::write(&csv_bad, "t,x,y,p\n10,1,0,1\n11,zz,0,1\n").unwrap();
    let o = evtensor(&["info", "--input", s(&csv_bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("ParseError") && stderr(&o).contains("at byte 17"),
        "{}",
        stderr(&o)
    );
}

fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    std::fs::write(path, bytes).unwrap();
}

#[test]
fn synth_ramp_writes_events() {
    let dir = TempDir::new().unwrap();
    write_pgm(&dir.path().join("f0.pgm"), 1, 1, &[20]);
    write_pgm(&dir.path().join("f1.pgm"), 1, 1, &[55]);
    let ts = dir.path().join("ts.txt");
    std::fs::write(&ts, "0\n1000\n").unwrap();
    let out = dir.path().join("ramp.csv");
    let pattern = dir.path().join("f*.pgm");
    let o = evtensor(&[
        "synth",
        "--frames",
        s(&pattern),
        "--timestamps",
        s(&ts),
        "--contrast",
        "0.25",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let (window, format) = evtensor::read_event_file(&out, None, None).unwrap();
    assert_eq!(format, EventFileFormat::Csv);
    let delta = (55.0f64 / 20.0).ln();
    assert_eq!(window.len(), (delta / 0.25).floor() as usize);
    for (k, e) in window.events().iter().enumerate() {
        let expected = (k + 1) as f64 * 0.25 / delta * 1000.0;
        assert!(
            (e.t as f64 - expected).abs() <= 1.0,
            "{} vs {expected}",
            e.t
        );
        assert_eq!(e.p, Polarity::Positive);
    }

    let evt1 = dir.path().join("ramp.evt1");
    let o = evtensor(&[
        "synth",
        "--frames",
        s(&dir.path().join("f1.pgm")),
        s(&dir.path().join("f0.pgm")),
        "--timestamps",
        s(&ts),
        "--contrast",
        "0.25",
        "--output",
        s(&evt1),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (window, format) = evtensor::read_event_file(&evt1, None, None).unwrap();
    assert_eq!(format, EventFileFormat::Evt1);
    assert_eq!(window.len(), 4);
    assert!(window.events().iter().all(|e| e.p == Polarity::Negative));
}

#[test]
fn synth_failures() {
    let dir = TempDir::new().unwrap();
    write_pgm(&dir.path().join("a0.pgm"), 2, 1, &[90, 90]);
    write_pgm(&dir.path().join("a1.pgm"), 2, 1, &[90, 90]);
    write_pgm(&dir.path().join("b.pgm"), 1, 2, &[90, 90]);
    let ts = dir.path().join("ts.txt");
    std::fs::write(&ts, "0\n1000\n").unwrap();
    let out = dir.path().join("out.evt1");

    let o = evtensor(&[
        "synth",
        "--frames",
        s(&dir.path().join("a*.pgm")),
        "--timestamps",
        s(&ts),
        "--contrast",
        "0.2",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EmptyStream"));

    let o = evtensor(&[
        "synth",
        "--frames",
        s(&dir.path().join("a0.pgm")),
        s(&dir.path().join("b.pgm")),
        "--timestamps",
        s(&ts),
        "--contrast",
        "0.2",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InvalidSequence"));

    let o = evtensor(&[
        "synth",
        "--frames",
        s(&dir.path().join("*.pgm")),
        "--timestamps",
        s(&ts),
        "--contrast",
        "0.2",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = evtensor(&[
        "synth",
        "--frames",
        s(&dir.path().join("none*.pgm")),
        "--timestamps",
        s(&ts),
        "--contrast",
        "0.2",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn bench_report_is_consistent() {
    let o = evtensor(&[
        "bench",
        "--synthetic",
        "20000",
        "--repeats",
        "4",
        "--bins",
        "4",
        "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["events"], 20000);
    assert_eq!(v["repeats"], 4);
    let mut times: Vec<f64> = v["times_s"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_f64().unwrap())
        .collect();
    assert_eq!(times.len(), 4);
    times.sort_by(f64::total_cmp);
    let median = (times[1] + times[2]) / 2.0;
    let throughput = v["throughput_evs"].as_f64().unwrap();
    assert!(throughput > 0.0);
    assert!((throughput - 20000.0 / median).abs() <= 1e-9 * throughput);
    assert_eq!(v["config"]["bins"], 4);
    assert_eq!(v["config"]["kernel"], "trilinear");
    assert_eq!(v["config"]["width"], 240);

    let o = evtensor(&[
        "bench",
        "--synthetic",
        "1000",
        "--repeats",
        "3",
        "--repr",
        "voxel",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("throughput_evs"));
}

#[test]
fn bench_flag_misuse_exits_2() {
    for args in [
        &["bench", "--synthetic", "100", "--repeats", "1"][..],
        &["bench", "--repeats", "5"],
        &["bench", "--synthetic", "100", "--input", "x.csv"],
        &["bench", "--synthetic", "100", "--tau", "1"],
    ] {
        let o = evtensor(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bench_reads_input_files() {
    let dir = TempDir::new().unwrap();
    let input = write_fixture(&dir, "in.evt1", &fixture_window(), EventFileFormat::Evt1);
    let o = evtensor(&["bench", "--input", s(&input), "--repeats", "3", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["events"], 40);
    assert_eq!(v["config"]["width"], 7);
}
