use std::path::{Path, PathBuf};

use phosphene::data::{read_dataset, write_dataset};
use phosphene::{load_dataset, Condition, Error};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/timecourses.csv")
}

#[test]
fn fixture_shape() {
    let ds = load_dataset(fixture()).unwrap();
    assert_eq!(ds.len(), 45);
    assert_eq!(ds.subjects(), (1..=9).collect::<Vec<_>>());
    assert_eq!(ds.conditions().len(), 5);
    assert_eq!(ds.dt(), 0.25);
    for t in ds.trials() {
        assert_eq!(t.observed.t0(), 0.0);
        assert!(t.observed.samples().iter().all(|v| v.is_finite()));
        assert!(t.observed.end_time() >= t.stimulus.duration_s + 10.0 - 1e-9);
    }
    assert_eq!(ds.by_condition(Condition::new(20.0, 60.0)).len(), 9);
}

#[test]
fn write_then_load_round_trips() {
    let ds = load_dataset(fixture()).unwrap();
    let mut first = Vec::new();
    write_dataset(&ds, &mut first).unwrap();
    let reloaded = read_dataset(first.as_slice()).unwrap();
    assert_eq!(reloaded, ds);

    let mut second = Vec::new();
    write_dataset(&reloaded, &mut second).unwrap();
    assert_eq!(first, second);
}

#[test]
fn row_and_column_order_do_not_matter() {
    let original = std::fs::read_to_string(fixture()).unwrap();
    let mut lines: Vec<&str> = original.lines().collect();
    let header = lines.remove(0);
    lines.reverse();

    let reversed = format!("{header}\n{}\n", lines.join("\n"));
    assert_eq!(read_dataset(reversed.as_bytes()).unwrap(), read_dataset(original.as_bytes()).unwrap());

    // brightness first, subject last
    let swap = |l: &str| {
        let f: Vec<&str> = l.split(',').collect();
        format!("{},{},{},{},{}", f[4], f[1], f[2], f[3], f[0])
    };
    let permuted: String = std::iter::once(header).chain(lines.iter().copied()).map(|l| swap(l) + "\n").collect();
    assert_eq!(read_dataset(permuted.as_bytes()).unwrap(), read_dataset(original.as_bytes()).unwrap());
}

#[test]
fn malformed_inputs_are_rejected() {
    let cases = [
        ("subject_id,freq_pps,duration_s,time_s\n1,20,10,0\n", "format"),
        ("subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,zero,1\n", "format"),
        ("subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,0,1\n1,20,10,0,2\n", "data"),
        ("subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,0,NaN\n", "data"),
        ("subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,0.5,1\n1,20,10,0.75,1\n", "data"),
        ("subject_id,freq_pps,duration_s,time_s,brightness\n", "data"),
    ];
    for (text, kind) in cases {
        let err = read_dataset(text.as_bytes()).unwrap_err();
        let ok = match kind {
            "format" => matches!(err, Error::Format(_)),
            _ => matches!(err, Error::Data(_)),
        };
        assert!(ok, "{text:?} gave {err:?}");
    }
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(load_dataset("/nonexistent/phosphene.csv"), Err(Error::Io(_))));
}
