use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use convex_support::functional::QuadCoeffs;
use convex_support::json::{coeffs_to_json, parse_shape, ShapeDto};
use serde_json::Value;
use tempfile::TempDir;

const FIGURE_BODY: &str = r#"{"type":"fourier","c0":1,"terms":[[2,-0.1,0],[3,0.05,0]]}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supportfn"));
    cmd.env_remove("SHAPES_SEED");
    cmd
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn axis_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[test]
fn info_on_a_segment() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "seg.json", r#"{"type":"segment","alpha":0}"#);
    let v = json_of(&run(&["info", s(&p)]));
    assert!((f(&v["perimeter"]) - TAU).abs() < 1e-12);
    assert_eq!(v["curvature_support_size"], 2);
    assert!(f(&v["class_a_residuals"]["steiner"]).abs() < 1e-12);
}

#[test]
fn info_on_the_figure_body_matches_a_fine_scan() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "fig.json", FIGURE_BODY);
    let v = json_of(&run(&["info", s(&p)]));
    let h = |t: f64| 1.0 - 0.1 * (2.0 * t).cos() + 0.05 * (3.0 * t).cos();
    let n = 1_000_000;
    let (arg, max) = (0..n)
        .map(|i| TAU * i as f64 / n as f64)
        .map(|t| (t, h(t)))
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    assert!((f(&v["max_h"]) - max).abs() < 1e-9);
    assert!((f(&v["argmax"]) - arg).abs() < 1e-5);
}

#[test]
fn nonconvex_grid_exits_3() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", r#"{"type":"grid","n":8,"samples":[1,1,1,5,1,1,1,1]}"#);
    let out = run(&["info", s(&p)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not convex"));
}

#[test]
fn nonpositive_polygon_edge_exits_3() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "poly.json",
        r#"{"type":"polygon","normals":[0,1.5707963267948966,3.141592653589793,4.71238898038469],"lengths":[1,0,1,0]}"#,
    );
    assert_eq!(run(&["info", s(&p)]).status.code(), Some(3));
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "m.json", "{\"type\":\"segment\",\n \"alpha\": }");
    let out = run(&["info", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_field_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "u.json", r#"{"type":"segment","alpha":0,"beta":1}"#);
    let out = run(&["info", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn negative_b_exits_4() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "q.json",
        r#"{"a":{"const":1},"b":{"const":-1},"c":{"const":0},"d":{"const":0}}"#,
    );
    assert_eq!(run(&["maximize", s(&p)]).status.code(), Some(4));
}

#[test]
fn distance_between_orthogonal_needles() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"type":"segment","alpha":0}"#);
    let b = write(&dir, "b.json", r#"{"type":"segment","alpha":1.5707963267948966}"#);
    let v = json_of(&run(&["distance", s(&a), s(&b)]));
    // h difference is |cos θ| - |sin θ| scaled by π/2.
    assert!((f(&v["hausdorff"]) - PI / 2.0).abs() < 1e-9);
    let l2_sq = (PI / 2.0).powi(2) * (TAU - 2.0 * 2.0);
    assert!((f(&v["l2"]) - l2_sq.sqrt()).abs() < 1e-9);
}

#[test]
fn farthest_l2_on_the_figure_body_is_horizontal() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "fig.json", FIGURE_BODY);
    let v = json_of(&run(&["farthest", s(&p), "--metric", "l2"]));
    let alpha = f(&v["l2"]["alpha_star"]);
    assert!(axis_gap(alpha, 0.0) < 1e-6, "alpha* = {alpha}");
}

#[test]
fn farthest_needles_differ_between_metrics() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "fig.json", FIGURE_BODY);
    let plot = dir.path().join("fig.csv");
    let v = json_of(&run(&["farthest", s(&p), "--plot", s(&plot)]));
    let a = f(&v["l2"]["alpha_star"]);
    let b = f(&v["hausdorff"]["alpha_star"]);
    assert!(axis_gap(a, b) > 1e-2);
    assert!((f(&v["alpha_gap"]) - axis_gap(a, b)).abs() < 1e-12);
    let csv = std::fs::read_to_string(plot).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("series,theta,x,y"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 720);
    for series in ["C", "segment_l2", "segment_hausdorff"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("{series},"))).count(), 720);
    }
}

#[test]
fn farthest_from_the_disc_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "disc.json", r#"{"type":"fourier","c0":1,"terms":[]}"#);
    let v = json_of(&run(&["farthest", s(&p), "--metric", "hausdorff"]));
    assert_eq!(v["hausdorff"]["degenerate_flag"], true);
}

#[test]
fn farthest_normalizes_with_a_warning() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "big.json", r#"{"type":"fourier","c0":2,"terms":[[1,0.3,0]]}"#);
    let out = run(&["farthest", s(&p), "--metric", "hausdorff"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalizing"));
    let v = json_of(&out);
    // Normalized to the unit disc, whose distance to any needle is max(1, π/2 - 1).
    assert!((f(&v["hausdorff"]["distance"]) - 1.0).abs() < 1e-9);
}

#[test]
fn check_holds_on_a_triangle() {
    let dir = TempDir::new().unwrap();
    let third = TAU / 3.0;
    let side = TAU / 3.0;
    let text = format!(
        r#"{{"type":"polygon","normals":[0,{third},{}],"lengths":[{side},{side},{side}]}}"#,
        2.0 * third
    );
    let p = write(&dir, "tri.json", &text);
    let v = json_of(&run(&["check", s(&p)]));
    assert_eq!(v["holds"], true);
    assert!(f(&v["worst"]) <= 0.0);
}

#[test]
fn plot_emits_boundary_csv() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "disc.json", r#"{"type":"fourier","c0":1}"#);
    let out = run(&["plot", s(&p), "--n", "16"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    for r in rows {
        assert!((r[1] - r[0].cos()).abs() < 1e-12 && (r[2] - r[0].sin()).abs() < 1e-12);
    }
}

#[test]
fn maximize_constant_a_gives_a_segment() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "q.json",
        r#"{"a":{"const":1},"b":{"const":0},"c":{"const":0},"d":{"const":0}}"#,
    );
    let v = json_of(&run(&["maximize", s(&p), "--n", "128", "--restarts", "8"]));
    assert_eq!(v["cone"]["classification"], "segment");
    assert_eq!(v["continuous"]["classification"], "segment");
    assert_eq!(v["agree"], true);
}

#[test]
fn maximize_three_bumps_gives_a_triangle() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "q.json", &coeffs_to_json(&QuadCoeffs::three_bumps(0.05)));
    let v = json_of(&run(&["maximize", s(&p), "--n", "256", "--restarts", "16"]));
    assert_eq!(v["continuous"]["classification"], "triangle", "{v:#}");
}

#[test]
fn maximize_is_deterministic_and_seed_env_wins() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "q.json",
        r#"{"a":{"const":1},"b":{"const":0.5},"c":{"fourier":{"c0":0,"terms":[[3,0.4,0]]}},"d":{"const":0}}"#,
    );
    let args = ["maximize", s(&p), "--n", "64", "--restarts", "4", "--seed", "3"];
    let first = bin().args(args).output().unwrap();
    let second = bin().args(args).output().unwrap();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let via_env = bin()
        .args(["maximize", s(&p), "--n", "64", "--restarts", "4", "--seed", "99"])
        .env("SHAPES_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(first.stdout, via_env.stdout);
}

#[test]
fn bad_seed_env_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "seg.json", r#"{"type":"segment","alpha":0}"#);
    let out = bin().args(["info", s(&p)]).env("SHAPES_SEED", "x").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emitted_shapes_round_trip() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "q.json",
        r#"{"a":{"const":1},"b":{"const":0.2},"c":{"fourier":{"c0":0,"terms":[[3,0.5,0.1]]}},"d":{"const":0}}"#,
    );
    let v = json_of(&run(&["maximize", s(&p), "--n", "64", "--restarts", "4"]));
    for key in ["cone", "continuous"] {
        let text = v[key]["shape"].to_string();
        let shape = parse_shape(&text).unwrap();
        let again: Value = serde_json::from_str(&serde_json::to_string(&ShapeDto::from(&shape)).unwrap()).unwrap();
        assert_close(&v[key]["shape"], &again);
    }
    let fig = write(&dir, "fig.json", FIGURE_BODY);
    let info = json_of(&run(&["info", s(&fig)]));
    let reparsed = parse_shape(&info["shape"].to_string()).unwrap();
    let original = parse_shape(FIGURE_BODY).unwrap();
    for i in 0..64 {
        let t = TAU * i as f64 / 64.0;
        assert!((reparsed.eval(t) - original.eval(t)).abs() < 1e-12);
    }
}

fn assert_close(a: &Value, b: &Value) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= 1e-12, "{x} vs {y}")
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).for_each(|(x, y)| assert_close(x, y));
        }
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.len(), y.len());
            for (k, v) in x {
                assert_close(v, &y[k]);
            }
        }
        _ => assert_eq!(a, b),
    }
}

fn g4_run(dir: &TempDir) -> (Value, Vec<(f64, f64)>) {
    let csv = dir.path().join("g4.csv");
    let v = json_of(&run(&["g4", "--out", s(&csv)]));
    let rows = std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (t, g) = l.split_once(',').unwrap();
            (t.parse().unwrap(), g.parse().unwrap())
        })
        .collect();
    (v, rows)
}

#[test]
fn g4_minimum_set() {
    let dir = TempDir::new().unwrap();
    let (v, rows) = g4_run(&dir);
    assert_eq!(rows.len(), 10_001);
    let at: Vec<f64> = v["minimum_at"].as_array().unwrap().iter().map(f).collect();
    assert_eq!(at.len(), 3);
    for (a, want) in at.iter().zip([0.0, PI / 2.0, PI]) {
        assert!((a - want).abs() < 1e-6, "{at:?}");
    }
    assert!((f(&v["minimum"]) - 0.5).abs() < 1e-12);
}

#[test]
fn g4_endpoints_agree() {
    let dir = TempDir::new().unwrap();
    let (_, rows) = g4_run(&dir);
    assert!((rows[0].1 - rows[rows.len() - 1].1).abs() < 1e-12);
}

#[test]
fn g4_reflection_about_quarter_turn() {
    let dir = TempDir::new().unwrap();
    let (v, _) = g4_run(&dir);
    assert!(f(&v["max_asymmetry"]) <= 1e-12, "max |G4(t) - G4(pi - t)| = {}", v["max_asymmetry"]);
}
