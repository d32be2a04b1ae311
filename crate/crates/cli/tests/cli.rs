use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn onetwo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onetwo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn partition_reports_both_values() {
    let o = onetwo(&["partition", "-n", "2", "-a", "1", "-b", "1", "-c", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(field(&out, "relative_difference") < 1e-9);
    assert_eq!(field(&out, "Z_enumeration"), 450.0);
    let z1 = field(&out, "Z_pfaffian");
    let o2 = onetwo(&["partition", "-n", "2", "-a", "2", "-b", "2", "-c", "2"]);
    let z2 = field(&stdout(&o2), "Z_pfaffian");
    assert!((z2 / (256.0 * z1) - 1.0).abs() < 1e-12);
}

#[test]
fn partition_without_enumeration_above_n2() {
    let o = onetwo(&[
        "partition",
        "-n",
        "4",
        "-a",
        "1.3",
        "-b",
        "0.7",
        "-c",
        "1.1",
    ]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("Z_enumeration"));
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["partition", "-n", "1", "-a", "1", "-b", "1", "-c", "1"][..],
        &["partition", "-n", "2", "-a", "-1"],
        &["partition", "-a", "1"],
        &["correlate", "--mode", "finite"],
        &["phase-scan", "--a-range", "1:9"],
        &["phase-scan", "--ternary", "2"],
        &["crosscheck", "-n", "3", "-a", "1.2"],
        &["sample", "-n", "4", "--sweeps", "3", "--thin", "4"],
        &["no-such-command"],
    ] {
        let o = onetwo(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn correlate_tail_shapes() {
    let high = onetwo(&["correlate", "-a", "6", "-b", "1", "-c", "1", "--kmax", "12"]);
    assert!(high.status.success());
    assert!(stderr(&high).contains("infinite tail: plateau"));
    let rows = csv_rows(&stdout(&high));
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[3] == "infinite"));
    let last: f64 = rows[11][2].parse().unwrap();
    assert!(last > 1e-3);

    let low = onetwo(&["correlate", "-a", "2", "-b", "1", "-c", "1", "--kmax", "12"]);
    assert!(stderr(&low).contains("infinite tail: decay"));
    let last: f64 = csv_rows(&stdout(&low))[11][2].parse().unwrap();
    assert!(last < 1e-3);
}

#[test]
fn correlate_refuses_critical_parameters() {
    let o = onetwo(&["correlate", "-a", "4", "-b", "1", "-c", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("sqrt(a) = sqrt(b) + sqrt(c)"));
}

#[test]
fn correlate_both_modes_and_selected_separations() {
    let o = onetwo(&[
        "correlate",
        "-n",
        "12",
        "-a",
        "2",
        "--kmax",
        "5",
        "--mode",
        "both",
        "--separations",
        "1,3,5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(
        out.lines().next().unwrap(),
        "separation,value,value_squared,mode,n_or_N"
    );
    let rows = csv_rows(&out);
    let seps: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(seps, ["1", "3", "5", "1", "3", "5"]);
    assert!(rows[..3].iter().all(|r| r[3] == "finite" && r[4] == "12"));
    for (f, i) in rows[..3].iter().zip(&rows[3..]) {
        let (vf, vi): (f64, f64) = (f[1].parse().unwrap(), i[1].parse().unwrap());
        assert!((vf - vi).abs() < 1e-4, "{vf} vs {vi}");
    }
}

#[test]
fn line_scan_flips_at_the_critical_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let o = onetwo(&[
        "phase-scan",
        "-b",
        "1",
        "-c",
        "1",
        "--a-range",
        "1:9:0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&fs::read_to_string(out.join("phase.csv")).unwrap());
    assert_eq!(rows.len(), 33);
    for r in &rows {
        let a: f64 = r[0].parse().unwrap();
        let want = if a < 4.0 {
            "Decay"
        } else if a == 4.0 {
            "Critical"
        } else {
            "NonzeroLimit"
        };
        assert_eq!(r[4], want, "a = {a}");
        // the tail shape is only resolvable away from the critical point
        if a == 4.0 {
            assert_eq!(r[5], "refused");
        } else if (a - 4.0).abs() >= 1.0 {
            assert_eq!(r[5], if a < 4.0 { "decay" } else { "plateau" }, "a = {a}");
        }
    }
    let svg = fs::read_to_string(out.join("phase.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<line"));
}

#[test]
fn ternary_scan_matches_the_critical_locus() {
    let dir = tempfile::tempdir().unwrap();
    let o = onetwo(&[
        "phase-scan",
        "--ternary",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&fs::read_to_string(dir.path().join("phase.csv")).unwrap());
    assert_eq!(rows.len(), 49 * 48 / 2);
    for r in &rows {
        let mut s: Vec<f64> = r[..3]
            .iter()
            .map(|x| x.parse::<f64>().unwrap().sqrt())
            .collect();
        s.sort_by(|x, y| y.total_cmp(x));
        let gap = s[0] - s[1] - s[2];
        let want = if gap > 1e-12 {
            "NonzeroLimit"
        } else if gap < -1e-12 {
            "Decay"
        } else {
            "Critical"
        };
        assert_eq!(r[4], want, "{r:?}");
    }
    let svg = fs::read_to_string(dir.path().join("phase.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 3);
}

#[test]
fn sample_renders_paths_and_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let o = onetwo(&[
        "sample",
        "-n",
        "10",
        "-a",
        "1",
        "-b",
        "1",
        "-c",
        "1",
        "--sweeps",
        "50000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stats: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(stats[0]["stats"]["paths_and_cycles_only"], true);
    assert_eq!(stats[0]["samples"], 5000);
    let svg = fs::read_to_string(dir.path().join("sample-0.svg")).unwrap();
    assert_eq!(svg.matches("<line").count(), 2 * 300);
    let dump = fs::read_to_string(dir.path().join("samples-0.txt")).unwrap();
    assert_eq!(dump.lines().count(), 5000);
}

#[test]
fn crosscheck_reports_agreement() {
    let o = onetwo(&["crosscheck", "-a", "1.2", "-b", "1", "-c", "1"]);
    assert!(o.status.success());
    assert!(field(&stdout(&o), "max_deviation") < 1e-9);
    let o = onetwo(&["crosscheck", "-a", "2", "-b", "1", "-c", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["correlate", "-a", "6", "--kmax", "4"][..],
        &[
            "sample", "-n", "4", "-a", "1.5", "--sweeps", "2000", "--seed", "3", "--seed", "4",
        ],
    ] {
        let (x, y) = (dir.path().join("x"), dir.path().join("y"));
        for d in [&x, &y] {
            let mut full = args.to_vec();
            full.extend(["--out", d.to_str().unwrap()]);
            assert!(onetwo(&full).status.success());
        }
        assert_eq!(read_all(&x), read_all(&y), "{args:?}");
        fs::remove_dir_all(&x).unwrap();
        fs::remove_dir_all(&y).unwrap();
    }
}

#[test]
fn json_spec_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("run.json");
    fs::write(
        &spec,
        r#"{"command": "correlate", "a": 2.0, "b": 1.0, "c": 1.0, "separations": [2, 4]}"#,
    )
    .unwrap();
    let from_file = onetwo(&["--json-spec", spec.to_str().unwrap()]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    let from_flags = onetwo(&["correlate", "-a", "2", "--separations", "2,4"]);
    assert_eq!(stdout(&from_file), stdout(&from_flags));

    fs::write(&spec, r#"{"command": "partition", "n": 2, "alpha": 1}"#).unwrap();
    assert_eq!(
        onetwo(&["--json-spec", spec.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        onetwo(&["--json-spec", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        onetwo(&["--json-spec", spec.to_str().unwrap(), "partition"])
            .status
            .code(),
        Some(2)
    );
}
