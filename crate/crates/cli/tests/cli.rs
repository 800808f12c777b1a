use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use starembed::fixtures;
use starembed::io::{parse_embedding, write_problem};
use starembed::Problem;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starembed"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_doc(dir: &TempDir, name: &str, p: &Problem) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, write_problem(p, None, None)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn equilateral_interior_lands_on_centroid() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "tri.json", &fixtures::equilateral_one_interior());
    let o = run(&["--quiet", "embed", s(&input)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (e, report) = parse_embedding(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert!(report.unwrap().valid);
    let u = e.position(3);
    assert!((u.x - 0.5).abs() < 1e-12);
    assert!((u.y - 3f64.sqrt() / 6.0).abs() < 1e-12);
}

#[test]
fn l_shape_needs_the_star_solver() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "l.json", &fixtures::l_shape());
    let o = run(&["embed", s(&input)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("embed-star"));
    assert!(o.stdout.is_empty());

    let out = d.path().join("l.embedding.json");
    let svg = d.path().join("l.svg");
    let o = run(&["--quiet", "embed-star", s(&input), "-o", s(&out), "--svg", s(&svg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, report) = parse_embedding(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.unwrap().valid);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("class=\"kernel\""));
}

#[test]
fn dividing_edge_is_reported_and_rejected() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "diag.json", &fixtures::diagonal_square());
    let o = run(&["--quiet", "validate-mesh", s(&input)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dividing_edges"], serde_json::json!([[0, 2]]));
    assert_eq!(v["warnings"].as_array().unwrap().len(), 2);

    let o = run(&["embed-star", s(&input)]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_input_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    let path = d.path().join("bad.json");
    std::fs::write(&path, "{\"version\": \"1\", \"vertices\": ").unwrap();
    for cmd in ["validate-mesh", "embed", "embed-star", "diagnose"] {
        assert_eq!(code(&run(&[cmd, s(&path)])), 1, "{cmd}");
    }
    assert_eq!(code(&run(&["embed", s(&d.path().join("missing.json"))])), 1);
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn face_out_of_range_is_a_domain_error() {
    let d = TempDir::new().unwrap();
    let path = d.path().join("bad.json");
    let doc = write_problem(&fixtures::equilateral_one_interior(), None, None).replace("\"vertices\": 4", "\"vertices\": 3");
    std::fs::write(&path, doc).unwrap();
    let o = run(&["--json", "validate-mesh", s(&path)]);
    assert_eq!(code(&o), 2);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn weights_file_scheme() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "tri.json", &fixtures::equilateral_one_interior());
    assert_eq!(code(&run(&["embed", s(&input), "--scheme", "file"])), 1);
    let w = d.path().join("w.json");
    std::fs::write(&w, "[[3, 0, 2.0], [3, 1, 1.0], [3, 2, 1.0]]").unwrap();
    let o = run(&["--quiet", "embed", s(&input), "--scheme", "file", "--weights", s(&w)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (e, _) = parse_embedding(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    let u = e.position(3);
    // (2·(0,0) + (1,0) + (1/2, √3/2)) / 4
    assert!((u.x - 0.375).abs() < 1e-12);
    assert!((u.y - 3f64.sqrt() / 8.0).abs() < 1e-12);
}

#[test]
fn diagnose_single_interior_vertex_is_exact() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "tri.json", &fixtures::equilateral_one_interior());
    let o = run(&["--quiet", "diagnose", s(&input), "--eps-sweep", "0.1,1e-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r["inverse_deviation"].as_f64().unwrap() < 1e-12);
        assert!((r["lambda_min_over_eps"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn diagnose_deviation_shrinks_along_the_sweep() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "sq.json", &fixtures::square_two_interior());
    let o = run(&["--quiet", "diagnose", s(&input)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let dev: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["inverse_deviation"].as_f64().unwrap())
        .collect();
    assert_eq!(dev.len(), 6);
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
}

#[test]
fn convex_input_accepts_the_first_epsilon() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "sq.json", &fixtures::square_two_interior());
    let o = run(&["--quiet", "embed-star", s(&input)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["epsilon"], 0.5);
    let o = run(&["--quiet", "validate-mesh", s(&input)]);
    assert_eq!(code(&o), 0);
}

#[test]
fn diagnose_budget_and_range() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "sq.json", &fixtures::square_two_interior());
    assert_eq!(code(&run(&["diagnose", s(&input), "--budget", "1"])), 2);
    assert_eq!(code(&run(&["diagnose", s(&input), "--eps-sweep", "1.5"])), 2);
}

#[test]
fn homotopy_constant_path_repeats_the_base() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "q.json", &fixtures::reflex_quad());
    let path = d.path().join("path.json");
    std::fs::write(&path, "[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]").unwrap();
    let out = d.path().join("frames");
    let o = run(&["--quiet", "homotopy", s(&input), "--path", s(&path), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let frames: Vec<String> = (0..3)
        .map(|k| std::fs::read_to_string(out.join(format!("frame_{k:04}.json"))).unwrap())
        .collect();
    assert_eq!(frames[0], frames[1]);
    assert_eq!(frames[1], frames[2]);
    assert!(out.join("frame_0002.svg").exists());
    let all: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(out.join("path.json")).unwrap()).unwrap();
    assert_eq!(all.len(), 3);
}

#[test]
fn homotopy_circle_is_valid_and_leaving_the_hull_fails() {
    let d = TempDir::new().unwrap();
    let input = write_doc(&d, "q.json", &fixtures::reflex_quad());
    let out = d.path().join("circle");
    let o = run(&["--quiet", "homotopy", s(&input), "--circle", "0.2", "--frames", "12", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..12 {
        let text = std::fs::read_to_string(out.join(format!("frame_{k:04}.json"))).unwrap();
        assert!(parse_embedding(&text).unwrap().1.unwrap().valid, "frame {k}");
    }

    let out = d.path().join("outside");
    let o = run(&["homotopy", s(&input), "--line", "3,3", "--frames", "10", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sample"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists(), "no frames are written on failure");
}

#[test]
fn render_and_generate() {
    let d = TempDir::new().unwrap();
    let input = d.path().join("g.json");
    let o = run(&["--quiet", "generate", "--kind", "star", "--seed", "5", "-o", s(&input)]);
    assert_eq!(code(&o), 0);
    let emb = d.path().join("e.json");
    assert_eq!(code(&run(&["--quiet", "embed-star", s(&input), "-o", s(&emb)])), 0);
    let o = run(&["--quiet", "render", s(&emb), "--kernel"]);
    assert_eq!(code(&o), 0);
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("class=\"kernel\""));
}

#[test]
fn batch_mode_takes_the_worst_exit_code() {
    let d = TempDir::new().unwrap();
    let dir = d.path().join("in");
    std::fs::create_dir(&dir).unwrap();
    std::fs::write(dir.join("a.json"), write_problem(&fixtures::square_two_interior(), None, None)).unwrap();
    std::fs::write(dir.join("b.json"), write_problem(&fixtures::l_shape(), None, None)).unwrap();
    let out = d.path().join("out");
    let o = run(&["--quiet", "--batch", s(&dir), "embed-star", "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(out.join("a.embedding.json").exists() && out.join("b.embedding.json").exists());

    let out = d.path().join("out2");
    let o = run(&["--quiet", "--batch", s(&dir), "embed", "-o", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(out.join("a.embedding.json").exists());
    assert!(!out.join("b.embedding.json").exists());
}

/// Every command writes byte-identical output across repeated runs.
#[test]
fn repeated_runs_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let sq = write_doc(&d, "sq.json", &fixtures::square_two_interior());
    let l = write_doc(&d, "l.json", &fixtures::l_shape());
    let q = write_doc(&d, "q.json", &fixtures::reflex_quad());
    let gen_args = ["--quiet", "generate", "--kind", "star", "--seed", "11", "--random-weights"];
    let emb = d.path().join("l.emb.json");
    assert_eq!(code(&run(&["--quiet", "embed-star", s(&l), "-o", s(&emb)])), 0);
    let cases: Vec<Vec<&str>> = vec![
        vec!["--quiet", "validate-mesh", s(&l)],
        vec!["--quiet", "embed", s(&sq), "--scheme", "random", "--seed", "4"],
        vec!["--quiet", "embed-star", s(&l)],
        vec!["--quiet", "embed-star", s(&q), "--eye", "0.5,0.5"],
        vec!["--quiet", "diagnose", s(&l), "--coupling", "eye"],
        vec!["--quiet", "render", s(&emb), "--kernel"],
        gen_args.to_vec(),
    ];
    for args in &cases {
        let a = run(args);
        assert_eq!(code(&a), 0, "{args:?}");
        for _ in 0..2 {
            assert_eq!(a.stdout, run(args).stdout, "{args:?}");
        }
    }
    let frames = |name: &str| {
        let out = d.path().join(name);
        let o = run(&["--quiet", "homotopy", s(&q), "--circle", "0.3", "--frames", "8", "--out", s(&out)]);
        assert_eq!(code(&o), 0);
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files
            .iter()
            .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap()))
            .collect::<Vec<_>>()
    };
    assert_eq!(frames("h1"), frames("h2"));
}
