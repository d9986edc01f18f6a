use std::path::PathBuf;
use std::process::{Command, Output};

fn bloch1d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bloch1d")).args(args).output().expect("binary runs")
}

fn profile(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("profiles").join(name).display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Data rows of a CSV dataset as column→value maps.
fn rows(text: &str) -> Vec<Vec<(String, String)>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let head: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    r.records().map(|rec| head.iter().cloned().zip(rec.unwrap().iter().map(str::to_owned)).collect()).collect()
}

fn get<'a>(row: &'a [(String, String)], col: &str) -> &'a str {
    &row.iter().find(|(c, _)| c == col).unwrap_or_else(|| panic!("no column {col}")).1
}

fn num(row: &[(String, String)], col: &str) -> f64 {
    get(row, col).parse().unwrap_or_else(|_| panic!("{col} = {:?} is not a number", get(row, col)))
}

#[test]
fn every_subcommand_succeeds() {
    let cases: &[&[&str]] = &[
        &["--preset", "graded", "delta-map", "--omega", "1:5:3", "--k", "0:1:2"],
        &["--preset", "graded", "band", "--K", "0:3.14159:3", "--branches", "2"],
        &["--preset", "graded", "isofreq", "--omega", "2"],
        &["--preset", "uniform-speed", "zws-scan", "--k", "0:1:3", "--omega-max", "14"],
        &["--preset", "graded", "green", "--K", "0.3", "--omega", "2", "--k", "0.5", "--points", "9"],
        &["--preset", "graded", "wkb-compare", "--omega", "10:20:3"],
    ];
    for args in cases {
        let out = bloch1d(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        let data = rows(&stdout(&out));
        assert!(!data.is_empty(), "{args:?} produced no rows");
        assert!(data.iter().all(|r| r.last().unwrap().0 == "error" && r.last().unwrap().1.is_empty()));
    }
}

#[test]
fn graded_profile_has_three_branches_at_omega_8() {
    let out = bloch1d(&["--profile", &profile("graded.toml"), "isofreq", "--omega", "8"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut branches: Vec<String> =
        rows(&stdout(&out)).iter().filter(|r| get(r, "kind") == "point").map(|r| get(r, "branch").to_owned()).collect();
    branches.dedup();
    assert_eq!(branches, ["1", "2", "3"]);
}

#[test]
fn profile_files_match_presets() {
    for (file, preset) in [
        ("graded.toml", "graded"),
        ("contrast_bilayer.toml", "contrast-bilayer"),
        ("soft_bilayer.toml", "soft-bilayer"),
    ] {
        let a = bloch1d(&["--profile", &profile(file), "delta-map", "--omega", "0.5:12:7", "--k", "0:2:3"]);
        let b = bloch1d(&["--preset", preset, "delta-map", "--omega", "0.5:12:7", "--k", "0:2:3"]);
        for (x, y) in rows(&stdout(&a)).iter().zip(rows(&stdout(&b))) {
            assert!((num(x, "delta") - num(&y, "delta")).abs() < 1e-12, "{file}");
        }
    }
}

#[test]
fn jsonl_has_header_line_and_one_object_per_row() {
    let args = ["--preset", "graded", "delta-map", "--omega", "1:5:3"];
    let csv_out = bloch1d(&args);
    let json_out = bloch1d(&[&["--format", "jsonl"], &args[..]].concat());
    assert_eq!(code(&json_out), 0);
    let lines: Vec<serde_json::Value> =
        stdout(&json_out).lines().map(|l| serde_json::from_str(l).expect("valid JSON")).collect();
    let header = &lines[0]["header"];
    assert_eq!(header["command"], "delta-map");
    assert_eq!(lines.len() - 1, rows(&stdout(&csv_out)).len());
    for (obj, row) in lines[1..].iter().zip(rows(&stdout(&csv_out))) {
        assert!(obj["error"].is_null());
        let (a, b) = (obj["delta"].as_f64().unwrap(), num(&row, "delta"));
        assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
    }
    // The fingerprint ignores the output encoding.
    let sha = stdout(&csv_out).lines().find_map(|l| l.strip_prefix("# config_sha256: ").map(str::to_owned)).unwrap();
    assert_eq!(header["config_sha256"], sha.as_str());
}

#[test]
fn fingerprint_tracks_inputs() {
    let sha = |omega: &str| {
        let out = bloch1d(&["--preset", "graded", "delta-map", "--omega", omega]);
        stdout(&out).lines().find_map(|l| l.strip_prefix("# config_sha256: ").map(str::to_owned)).unwrap()
    };
    assert_eq!(sha("1:2:3"), sha("1:2:3"));
    assert_ne!(sha("1:2:3"), sha("1:2:4"));
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let args = ["--preset", "contrast-bilayer", "band", "--K", "0:3.141592653589793:9", "--branches", "3"];
    let one = bloch1d(&[&["--jobs", "1"], &args[..]].concat());
    let four = bloch1d(&[&["--jobs", "4"], &args[..]].concat());
    let again = bloch1d(&[&["--jobs", "4"], &args[..]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(four.stdout, again.stdout);
}

#[test]
fn output_file_matches_stdout() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("delta_map.csv");
    let args = ["--preset", "graded", "delta-map", "--omega", "1:3:3"];
    let out = bloch1d(&[&["-o", path.to_str().unwrap()], &args[..]].concat());
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), bloch1d(&args).stdout);
}

#[test]
fn configuration_errors_exit_2() {
    let missing = bloch1d(&["--profile", "/nonexistent/profile.toml", "isofreq", "--omega", "2"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("cannot read"));

    assert_eq!(code(&bloch1d(&["--preset", "graded", "delta-map", "--omega", "1:2"])), 2);
    assert_eq!(code(&bloch1d(&["--preset", "graded", "delta-map", "--omega", "1:2:0"])), 2);
    assert_eq!(code(&bloch1d(&["delta-map", "--omega", "1"])), 2);
    assert_eq!(code(&bloch1d(&["--preset", "graded", "--tol", "-1", "delta-map", "--omega", "1"])), 2);
    assert_eq!(code(&bloch1d(&["--preset", "graded", "--scheme", "euler", "delta-map", "--omega", "1"])), 2);

    let unknown = bloch1d(&["--preset", "granite", "delta-map", "--omega", "1"]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("soft-bilayer"));

    assert_eq!(code(&bloch1d(&["--preset", "contrast-bilayer", "wkb-compare", "--omega", "12"])), 2);
}

#[test]
fn corrupted_profile_names_the_field() {
    let text = std::fs::read_to_string(profile("soft_bilayer.toml")).unwrap();
    let bad = text.replacen("data = 0.4 }", "data = -0.4 }", 1);
    assert_ne!(bad, text);
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("negative_mu2.toml");
    std::fs::write(&path, bad).unwrap();
    let out = bloch1d(&["--profile", path.to_str().unwrap(), "isofreq", "--omega", "2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("segments[1].mu2"), "{}", stderr(&out));

    std::fs::write(&path, "period = 1.0\n[[segments]]\nfrom = 0.0\n").unwrap();
    assert_eq!(code(&bloch1d(&["--profile", path.to_str().unwrap(), "isofreq", "--omega", "2"])), 2);
}

#[test]
fn on_spectrum_green_point_exits_3_with_an_error_row() {
    // Homogeneous unit medium: M(1,0) = I at ω = 2π, K = k = 0.
    let out = bloch1d(&["--preset", "homogeneous", "green", "--K", "0", "--omega", "6.283185307179586", "--k", "0"]);
    assert_eq!(code(&out), 3);
    let data = rows(&stdout(&out));
    assert!(get(data.last().unwrap(), "error").contains("spectrum"));
}

#[test]
fn partial_failures_keep_the_good_rows() {
    let out = bloch1d(&["--preset", "homogeneous", "green", "--K", "0", "--omega", "2:6.283185307179586:2", "--k", "0", "--points", "5"]);
    assert_eq!(code(&out), 3);
    let data = rows(&stdout(&out));
    let summaries: Vec<_> = data.iter().filter(|r| get(r, "kind") == "summary").collect();
    assert_eq!(summaries.len(), 2);
    assert!(get(summaries[0], "error").is_empty());
    assert!(!get(summaries[1], "error").is_empty());
}

#[test]
fn verify_passes_at_default_and_looser_tolerance() {
    for extra in [&[][..], &["--tol", "1e-11"][..]] {
        let out = bloch1d(&[extra, &["verify"][..]].concat());
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        let data = rows(&stdout(&out));
        assert!(data.len() >= 30);
        assert!(data.iter().all(|r| get(r, "pass") == "true"));
    }
}

#[test]
fn physical_units_follow_the_period() {
    let scaled = bloch1d(&["--physical", "--profile", &profile("soft_bilayer_period2.toml"), "isofreq", "--omega", "3.4"]);
    let unit = bloch1d(&["--profile", &profile("soft_bilayer.toml"), "isofreq", "--omega", "6.8"]);
    assert_eq!(code(&scaled), 0, "{}", stderr(&scaled));
    assert!(stdout(&scaled).contains("# units: physical"));
    assert!(stdout(&scaled).contains("# period: 2.0"));
    let (a, b) = (rows(&stdout(&scaled)), rows(&stdout(&unit)));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(get(x, "kind"), get(y, "kind"));
        for (col, factor) in [("omega", 2.0), ("k", 2.0), ("big_k", 2.0), ("h", 0.25)] {
            if !get(x, col).is_empty() {
                let (a, b) = (factor * num(x, col), num(y, col));
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{col}: {} vs {}", get(x, col), get(y, col));
            }
        }
    }

    let scaled = bloch1d(&[
        "--physical", "--profile", &profile("soft_bilayer_period2.toml"),
        "green", "--K", "0.15", "--omega", "1", "--k", "0.25", "--points", "17", "--forcing-wavenumber", "0.5",
    ]);
    let unit = bloch1d(&[
        "--profile", &profile("soft_bilayer.toml"),
        "green", "--K", "0.3", "--omega", "2", "--k", "0.5", "--points", "17", "--forcing-wavenumber", "1",
    ]);
    assert_eq!(code(&scaled), 0, "{}", stderr(&scaled));
    for (x, y) in rows(&stdout(&scaled)).iter().zip(&rows(&stdout(&unit))) {
        for (col, factor) in [("y", 0.5), ("re_u", 0.25), ("im_u", 0.25), ("residual", 1.0)] {
            if !get(x, col).is_empty() {
                let (a, b) = (factor * num(x, col), num(y, col));
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{col}: {} vs {}", get(x, col), get(y, col));
            }
        }
    }
}

#[test]
fn truncated_series_loses_convexity_where_the_exact_curve_keeps_it() {
    let out = bloch1d(&["--preset", "soft-bilayer", "isofreq", "--omega", "6.8", "--truncate-terms", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let data = rows(&stdout(&out));
    let cert = |engine: &str| {
        data.iter().find(|r| get(r, "engine") == engine && get(r, "kind") == "certificate").expect("certificate row")
    };
    assert!(num(cert("exact"), "h") > 0.0);
    assert_eq!(get(cert("exact"), "passed"), "true");
    assert!(num(cert("truncated"), "h") < 0.0);
    assert_eq!(get(cert("truncated"), "passed"), "false");
}

#[test]
fn zws_scan_finds_the_uniform_speed_gap() {
    let out = bloch1d(&["--preset", "uniform-speed", "zws-scan", "--k", "0", "--omega-max", "14"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let data = rows(&stdout(&out));
    assert!(data
        .iter()
        .any(|r| get(r, "confirmed") == "true" && (num(r, "omega") - 4.0 * std::f64::consts::PI).abs() < 1e-6));
}
