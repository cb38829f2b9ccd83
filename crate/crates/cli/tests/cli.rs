use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vtpose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vtpose"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&vtpose(&["--help"])), 0);
    assert_eq!(code(&vtpose(&[])), 1);
    assert_eq!(code(&vtpose(&["bench", "--no-such-flag"])), 1);
    assert_eq!(code(&vtpose(&["frobnicate"])), 1);
}

#[test]
fn gen_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = vtpose(&["gen", "--count", "2", "--seed", "9", "--output", s(dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.len() >= 2 * 5);
    assert_eq!(fa, fb);
}

#[test]
fn gen_with_zero_count_warns_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vtpose(&["gen", "--count", "0", "--output", s(&tmp.path().join("none"))]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("nothing to generate"), "{}", stderr(&out));
    assert!(!tmp.path().join("none").exists());
}

#[test]
fn register_exit_code_reports_success() {
    let out = vtpose(&["register", s(&data("occ98"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("success"));
    let out = vtpose(&["register", "--vision-only", s(&data("occ98"))]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn missing_tactile_cloud_is_only_fatal_when_it_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("scene");
    std::fs::create_dir(&scene).unwrap();
    for (name, bytes) in files(&data("flip180")) {
        if name != Path::new("tactile.ply") {
            std::fs::write(scene.join(name), bytes).unwrap();
        }
    }
    assert_eq!(code(&vtpose(&["register", "--vision-only", s(&scene)])), 0);
    let out = vtpose(&["register", s(&scene)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error"));
}

#[test]
fn missing_scene_and_bad_config_are_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&vtpose(&["register", s(&tmp.path().join("absent"))])), 1);
    let cfg = tmp.path().join("run.ini");
    std::fs::write(&cfg, "[icp]\nmax_iterations = 10\ntol = -1\n").unwrap();
    let out = vtpose(&["--config", s(&cfg), "register", s(&data("flip180"))]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    std::fs::write(&cfg, "[icp]\nmystery = 1\n").unwrap();
    assert_eq!(code(&vtpose(&["--config", s(&cfg), "gen", "--count", "1"])), 1);
}

#[test]
fn metrics_prints_both_modalities() {
    let out = vtpose(&["metrics", s(&data("occ98"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("vision") && text.contains("tactile"), "{text}");
}

#[test]
fn bench_and_sweep_over_saved_scenes() {
    let tmp = tempfile::tempdir().unwrap();
    let scenes = tmp.path().join("scenes");
    let out = vtpose(&["gen", "--count", "10", "--seed", "3", "--output", s(&scenes)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let mut tables = Vec::new();
    for run in ["r1", "r2"] {
        let dir = tmp.path().join(run);
        let out = vtpose(&["bench", "--scenes", s(&scenes), "--output", s(&dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(dir.join("report.json").exists());
        tables.push(std::fs::read_to_string(dir.join("trials.csv")).unwrap());
    }
    assert_eq!(tables[0].lines().count(), 1 + 20);
    assert_eq!(without_runtime(&tables[0]), without_runtime(&tables[1]));

    let dir = tmp.path().join("sweep");
    let out = vtpose(&[
        "sweep",
        "--scenes",
        s(&scenes),
        "--ratios",
        "0.5,1,3.5,12.5,50",
        "--output",
        s(&dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.join("sweep_trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 60);
    assert!(dir.join("sweep.json").exists());
}
