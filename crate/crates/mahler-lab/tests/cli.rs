use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mahler_core::random::random_smooth_body;
use mahler_core::Vec3;
use mahler_lab::{parse_body_file, parse_body_str, Body, BodyFile, CliError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const CUBE: &str = r#"{"type": "polytope", "dim": 3, "label": "cube",
  "vertices": [[1,1,1],[-1,1,1],[1,-1,1],[1,1,-1],[-1,-1,1],[-1,1,-1],[1,-1,-1],[-1,-1,-1]]}"#;
const SHEARED_CUBE: &str = r#"{"type": "transformed", "matrix": [[1,0.4,0.2],[0,1,0.3],[0,0,1]],
  "base": {"type": "polytope", "vertices": [[1,1,1],[-1,1,1],[1,-1,1],[1,1,-1],[-1,-1,1],[-1,1,-1],[1,-1,-1],[-1,-1,-1]]}}"#;
const SQUARE: &str = r#"{"type": "polytope", "dim": 2, "vertices": [[1,1],[-1,1],[-1,-1],[1,-1]]}"#;
const PERTURBED_CUBE: &str = r#"{"type": "polytope", "vertices": [
  [1.03,0.98,1.01],[-0.97,1.02,0.99],[1.01,-1.04,0.97],[0.99,1.01,-1.02],
  [-1.03,-0.98,-1.01],[0.97,-1.02,-0.99],[-1.01,1.04,-0.97],[-0.99,-1.01,1.02]]}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mahler-lab")).args(args).env_remove("MAHLER_LAB_THREADS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn value(stdout: &str, key: &str) -> f64 {
    let line = stdout.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {stdout}"));
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

#[test]
fn vp_on_the_cube_prints_the_three_dimensional_bound() {
    let dir = TempDir::new().unwrap();
    let cube = write(dir.path(), "cube.json", CUBE);
    let out = lab(&["vp", "--body", cube.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!((value(&stdout, "volume") - 8.0).abs() < 1e-12);
    assert!((value(&stdout, "polar_volume") - 4.0 / 3.0).abs() < 1e-12);
    assert!((value(&stdout, "product") - 32.0 / 3.0).abs() < 1e-10);
}

#[test]
fn verify2_on_the_square_prints_eight() {
    let dir = TempDir::new().unwrap();
    let square = write(dir.path(), "square2d.json", SQUARE);
    let out = lab(&["verify2", "--body", square.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!((value(&stdout, "product") - 8.0).abs() < 1e-12);
}

#[test]
fn normalize_on_a_sheared_cube_balances_the_quarters() {
    let dir = TempDir::new().unwrap();
    let body = write(dir.path(), "sheared_cube.json", SHEARED_CUBE);
    let report = dir.path().join("n.json");
    let out = lab(&["normalize", "--body", body.to_str().unwrap(), "--grid", "128x256", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let volume = json["results"]["volume"].as_f64().unwrap();
    assert!((volume - 8.0).abs() < 1e-9);
    for r in json["results"]["residual23"].as_array().unwrap() {
        assert!(r.as_f64().unwrap().abs() < 1e-6 * volume);
    }
    let normalized = serde_json::to_string(&json["results"]["normalized_body"]).unwrap();
    assert!(matches!(parse_body_str(&normalized).unwrap(), Body::Space(_)));
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let dir = TempDir::new().unwrap();
    let corrupt = write(dir.path(), "corrupt.json", r#"{"type": "polytope", "vertices": [[1,1,1]"#);
    let single = write(dir.path(), "single.json", r#"{"type":"polytope","vertices":[[1,0,0]]}"#);
    let lopsided = write(dir.path(), "lopsided.json", r#"{"type":"polytope","vertices":[[1,0,0],[0,1,0],[0,0,1],[-1,-1,-1]]}"#);
    let flat = write(dir.path(), "flat.json", r#"{"type":"polytope","vertices":[[1,0,0],[-1,0,0],[0,1,0],[0,-1,0]]}"#);
    let unknown_type = write(dir.path(), "blob.json", r#"{"type":"blob"}"#);
    let cube = write(dir.path(), "cube.json", CUBE);
    let cube = cube.to_str().unwrap();
    let missing = dir.path().join("missing.json");
    let unwritable = dir.path().join("no-such-dir").join("out.json");

    assert_eq!(code(&lab(&["frobnicate", "--body", cube])), 1);
    assert_eq!(code(&lab(&[])), 1);
    assert_eq!(code(&lab(&["vp", "--body", corrupt.to_str().unwrap()])), 2);
    assert_eq!(code(&lab(&["vp", "--body", unknown_type.to_str().unwrap()])), 2);
    assert_eq!(code(&lab(&["vp", "--body", cube, "--grid", "7x64"])), 2);
    assert_eq!(code(&lab(&["vp", "--body", cube, "--grid", "banana"])), 2);
    assert_eq!(code(&lab(&["vp", "--body", single.to_str().unwrap()])), 3);
    assert_eq!(code(&lab(&["vp", "--body", lopsided.to_str().unwrap()])), 3);
    assert_eq!(code(&lab(&["vp", "--body", flat.to_str().unwrap()])), 3);
    assert_eq!(code(&lab(&["winding", "--body", cube, "--grid", "32x64"])), 4);
    assert_eq!(code(&lab(&["vp", "--body", missing.to_str().unwrap()])), 5);
    assert_eq!(code(&lab(&["vp", "--body", cube, "--out", unwritable.to_str().unwrap()])), 5);
}

#[test]
fn library_errors_map_to_the_documented_codes() {
    assert_eq!(CliError::UnknownCommand("x".into()).exit_code(), 1);
    let parse = parse_body_str("{").unwrap_err();
    assert_eq!(parse.exit_code(), 2);
    let invalid = parse_body_str(r#"{"type":"lp","p":0.5,"axes":[1,1,1]}"#).unwrap_err();
    assert_eq!(invalid.exit_code(), 3);
    let indefinite = parse_body_str(r#"{"type":"ellipsoid","matrix":[[1,0,0],[0,-1,0],[0,0,1]]}"#).unwrap_err();
    assert!(matches!(indefinite, CliError::InvalidBody(_)));
    assert_eq!(parse_body_file(Path::new("/nonexistent/body.json")).unwrap_err().exit_code(), 5);
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let body = write(dir.path(), "cube.json", PERTURBED_CUBE);
    let body = body.to_str().unwrap();
    for (cmd, extra) in [("verify", vec!["--seed", "7"]), ("sweep", vec!["--n", "3"]), ("winding", vec!["--samples", "64"]), ("polar", vec![])] {
        let file = dir.path().join(format!("{cmd}.out"));
        let mut args = vec![cmd, "--body", body, "--grid", "32x64", "--threads", "2", "--out", file.to_str().unwrap()];
        args.extend(&extra);
        let mut runs = Vec::new();
        for _ in 0..2 {
            let out = lab(&args);
            assert_eq!(code(&out), 0, "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            runs.push(std::fs::read(&file).unwrap());
        }
        let (a, b) = (&runs[0], &runs[1]);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd} output differs between runs");
        assert_eq!(a.last(), Some(&b'\n'));
        assert!(std::str::from_utf8(a).is_ok());
    }
}

#[test]
fn thread_count_falls_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let cube = write(dir.path(), "cube.json", CUBE);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mahler-lab"))
            .args(["vp", "--body", cube.to_str().unwrap(), "--grid", "32x64"])
            .env("MAHLER_LAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("3").stdout);
    assert_eq!(code(&run("many")), 2);
}

#[test]
fn winding_csv_has_the_documented_header() {
    let dir = TempDir::new().unwrap();
    let body = write(dir.path(), "perturbed.json", PERTURBED_CUBE);
    let csv = dir.path().join("w.csv");
    let out = lab(&["winding", "--body", body.to_str().unwrap(), "--grid", "32x64", "--samples", "64", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,G,H,angle"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 64);
    assert!(rows.iter().all(|r| r.len() == 4));
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let winding: i64 = stderr.lines().find_map(|l| l.strip_prefix("winding = ")).unwrap().trim().parse().unwrap();
    assert_eq!(winding.rem_euclid(2), 1);
}

#[test]
fn sweep_csv_covers_the_lattice() {
    let dir = TempDir::new().unwrap();
    let body = write(dir.path(), "perturbed.json", PERTURBED_CUBE);
    let csv = dir.path().join("s.csv");
    let out = lab(&["sweep", "--body", body.to_str().unwrap(), "--grid", "32x64", "--n", "3", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("s,phi,psi,F,G,H"));
    assert_eq!(text.lines().count(), 27 + 1);
}

fn max_radial_gap(a: &mahler_core::ConvexBody3, b: &mahler_core::ConvexBody3) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..500)
        .map(|_| {
            let u = mahler_core::random::random_direction(&mut rng);
            (a.radial(&u) - b.radial(&u)).abs()
        })
        .chain([Vec3::x(), Vec3::y(), Vec3::z()].iter().map(|u| (a.radial(u) - b.radial(u)).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn polar_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let smooth = serde_json::to_string(&BodyFile::from_body3(&random_smooth_body(&mut rng))).unwrap();
    let cases = [
        CUBE.to_string(),
        SHEARED_CUBE.to_string(),
        r#"{"type":"lp","p":3,"axes":[1,2,0.5]}"#.to_string(),
        r#"{"type":"ellipsoid","matrix":[[2,0.3,0],[0.3,1,0.1],[0,0.1,3]]}"#.to_string(),
        smooth,
    ];
    for (i, text) in cases.iter().enumerate() {
        let input = write(dir.path(), &format!("in{i}.json"), text);
        let output = dir.path().join(format!("polar{i}.json"));
        let out = lab(&["polar", "--body", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let (Body::Space(k), _) = parse_body_file(&input).unwrap() else { panic!() };
        let (Body::Space(kp), _) = parse_body_file(&output).unwrap() else { panic!() };
        let gap = max_radial_gap(&k.polar(), &kp);
        assert!(gap < 1e-12, "case {i}: {gap}");
    }
}

#[test]
fn planar_polar_file_round_trips() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "hex.json", r#"{"type":"polytope","dim":2,"vertices":[[2,0],[1,1.5],[-1,1],[-2,0],[-1,-1.5],[1,-1]]}"#);
    let output = dir.path().join("polar.json");
    assert_eq!(code(&lab(&["polar", "--body", input.to_str().unwrap(), "--out", output.to_str().unwrap()])), 0);
    let (Body::Plane(p), _) = parse_body_file(&input).unwrap() else { panic!() };
    let (Body::Plane(q), _) = parse_body_file(&output).unwrap() else { panic!() };
    for t in 0..100 {
        let u = [(t as f64 * 0.063).cos(), (t as f64 * 0.063).sin()];
        assert!((p.polar().gauge(&u) - q.gauge(&u)).abs() < 1e-12);
    }
}

#[test]
fn verify_report_is_complete_json() {
    let dir = TempDir::new().unwrap();
    let body = write(dir.path(), "cube.json", CUBE);
    let report = dir.path().join("v.json");
    let out = lab(&["verify", "--body", body.to_str().unwrap(), "--grid", "32x64", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["grid"], serde_json::json!([32, 64]));
    assert_eq!(json["curve"], 512);
    assert_eq!(json["input_digest"].as_str().unwrap().len(), 64);
    assert_eq!(json["results"]["cone_check"]["violations"], 0);
    assert!(json["results"]["chain"]["bound_ok"].as_bool().unwrap());
    assert_eq!(json["command"][0], "verify");
}
