use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use roadprof::geometry::{Breakpoints, ConstraintSet, Parity, SlopeBounds};
use roadprof::probgen::BatchParams;
use roadprof::product::ProductPoint;
use roadprof::{FeasibilityProblem, RunRecord};

fn roadprof(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roadprof"))
        .current_dir(dir)
        .env_remove("ROADPROF_CONFIG")
        .env_remove("ROADPROF_SEED")
        .env_remove("ROADPROF_OUT")
        .env_remove("ROADPROF_MODE")
        .env_remove("ROADPROF_ALGORITHMS")
        .env_remove("ROADPROF_NONCONVEX")
        .env_remove("ROADPROF_JOBS")
        .env_remove("ROADPROF_COUNT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = roadprof(dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn records(path: &Path) -> Vec<RunRecord> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn without_timing(mut r: Vec<RunRecord>) -> Vec<RunRecord> {
    r.iter_mut().for_each(|r| r.wall_seconds = 0.0);
    r
}

/// Writes `problems` under `out/problems` with a manifest that lists them.
fn write_batch(out: &Path, problems: &[FeasibilityProblem]) {
    let dir = out.join("problems");
    fs::create_dir_all(&dir).unwrap();
    let mut entries = Vec::new();
    for p in problems {
        p.save(&dir.join(format!("{}.json", p.id))).unwrap();
        entries.push(serde_json::json!({
            "id": p.id, "file": format!("{}.json", p.id), "seed": 0, "n": p.n(), "certified_feasible": true,
        }));
    }
    let manifest = serde_json::json!({
        "master_seed": 0, "count": problems.len(), "nonconvex": false,
        "params": BatchParams::default(), "generated_unix": 0, "problems": entries,
    });
    fs::write(dir.join("manifest.json"), manifest.to_string()).unwrap();
}

#[test]
fn verify_passes_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(tmp.path(), &["verify"]);
    assert!(out.contains("5 of 5 fixtures passed"), "{out}");
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn verify_fails_loudly_on_a_faulty_projector() {
    let tmp = tempfile::tempdir().unwrap();
    let o = roadprof(tmp.path(), &["verify", "--fault-shift", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("[FAIL] dr-cycling"), "{out}");
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["generate", "--count", "0"][..],
        &["--algorithms", "CycP,Newton", "run"],
        &["--mode", "fast", "run"],
        &["frobnicate"],
    ] {
        let o = roadprof(tmp.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let o = roadprof(tmp.path(), &["--out", "nowhere", "run"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("roadprof generate"));
}

#[test]
fn config_file_and_environment_are_applied() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("h.toml"), "count = 4\nseed = 9\nout = \"from-file\"\n").unwrap();
    ok(tmp.path(), &["--config", "h.toml", "generate"]);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("from-file/problems/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["count"], 4);
    assert_eq!(m["master_seed"], 9);

    let o = Command::new(env!("CARGO_BIN_EXE_roadprof"))
        .current_dir(tmp.path())
        .env("ROADPROF_CONFIG", "h.toml")
        .env("ROADPROF_SEED", "10")
        .env("ROADPROF_OUT", "from-env")
        .args(["generate", "--count", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("from-env/problems/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["count"], 2);
    assert_eq!(m["master_seed"], 10);
}

#[test]
fn generate_is_reproducible_from_seed_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &["--out", "a", "--nonconvex", "generate", "--count", "6", "--seed", "5"],
    );
    ok(
        d,
        &["--out", "b", "--nonconvex", "generate", "--count", "6", "--seed", "5"],
    );
    ok(d, &["--out", "c", "generate", "--manifest", "a/problems/manifest.json"]);
    let files: Vec<String> = (0..6).map(|i| format!("problems/p{i:03}.json")).collect();
    for f in &files {
        let a = fs::read(d.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(d.join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(d.join("c").join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read_dir(d.join("a/problems")).unwrap().count(), 7);
}

#[test]
fn pipeline_is_deterministic_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for out in ["x", "y"] {
        ok(d, &["--out", out, "generate", "--count", "5", "--seed", "2"]);
        ok(
            d,
            &["--out", out, "--mode", "ba", "--algorithms", "hCycP,CycDyk", "run"],
        );
        ok(d, &["--out", out, "--mode", "ba", "--jobs", "1", "report"]);
    }
    for f in ["profile.csv", "proximity.csv", "distances.csv", "summary.txt"] {
        let a = fs::read(d.join("x/reports/ba").join(f)).unwrap();
        assert!(!a.is_empty(), "{f}");
        assert_eq!(a, fs::read(d.join("y/reports/ba").join(f)).unwrap(), "{f}");
    }
    let profile = fs::read_to_string(d.join("x/reports/ba/profile.csv")).unwrap();
    assert!(profile.starts_with("algorithm,kappa,rho\n"));
    let table = fs::read_to_string(d.join("x/reports/ba/distances.csv")).unwrap();
    assert!(table.starts_with("Algorithm,Min,1st Qrt.,Median,3rd Qrt.,Max,Mean,Std.dev\n"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn interrupted_runs_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "full", "generate", "--count", "4", "--seed", "8"]);
    ok(d, &["--out", "full", "run"]);
    let store = d.join("full/runs/feas/records.jsonl");
    let complete = records(&store);
    assert_eq!(complete.len(), 28);
    let mut sorted = complete.clone();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    assert_eq!(complete, sorted);

    // drop some records and tear the last line, as a crash mid-append would
    let text = fs::read_to_string(&store).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let kept = lines[..10].join("\n") + "\n" + &lines[10][..lines[10].len() / 2];
    fs::write(&store, kept).unwrap();
    let out = ok(d, &["--out", "full", "run"]);
    assert!(out.contains("resuming: 10 runs already recorded"), "{out}");
    assert_eq!(without_timing(records(&store)), without_timing(complete.clone()));

    let out = ok(d, &["--out", "full", "run"]);
    assert!(out.contains("(0 new)"), "{out}");
}

#[test]
fn feasible_start_problems_take_no_iterations() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "g", "generate", "--count", "3", "--seed", "4"]);
    let dir = d.join("g/problems");
    let mut p = FeasibilityProblem::load(&dir.join("p000.json")).unwrap();
    let t = p.t.as_slice().to_vec();
    let n = p.n();
    let (a, b) = (p.v[0], p.v[n - 1]);
    p.v = t.iter().map(|s| a + (b - a) * (s - t[0]) / (t[n - 1] - t[0])).collect();
    p.save(&dir.join("p000.json")).unwrap();
    for mode in ["feas", "super", "ba"] {
        ok(d, &["--out", "g", "--mode", mode, "run"]);
        let rs = records(&d.join("g/runs").join(mode).join("records.jsonl"));
        for r in rs.iter().filter(|r| r.problem == "p000") {
            assert_eq!(r.iterations, 0, "{} in {mode}", r.algorithm);
            assert!(r.converged);
        }
        ok(d, &["--out", "g", "--mode", mode, "report"]);
    }
}

#[test]
fn douglas_rachford_cycling_is_reported_as_capped() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let t = Breakpoints::new(vec![0.0, 1.0]).unwrap();
    let sets = vec![
        ConstraintSet::slope(Parity::Odd, SlopeBounds::new(vec![5.0], None).unwrap()).unwrap(),
        ConstraintSet::slope(
            Parity::Odd,
            SlopeBounds::new(vec![f64::INFINITY], Some(vec![5.0])).unwrap(),
        )
        .unwrap(),
    ];
    let mut p = FeasibilityProblem::new("cycle", t, sets, vec![-1.0, 0.0]).unwrap();
    p.dr_start = Some(ProductPoint::from_parts(&[vec![0.0, -1.0], vec![-2.0, 1.0]]).unwrap());
    write_batch(&d.join("o"), &[p]);
    ok(d, &["--out", "o", "--algorithms", "D-R,CycP", "run"]);
    let rs = records(&d.join("o/runs/feas/records.jsonl"));
    let dr = rs.iter().find(|r| r.algorithm == "D-R").unwrap();
    assert!(!dr.converged);
    assert_eq!(dr.iterations, 5000);
    let line = fs::read_to_string(d.join("o/runs/feas/records.jsonl")).unwrap();
    assert!(line.contains("\"status\":\"iteration-cap\""));
    assert!(rs.iter().find(|r| r.algorithm == "CycP").unwrap().converged);

    let summary = ok(d, &["--out", "o", "report"]);
    assert!(summary.contains("D-R             0       1       0"), "{summary}");
}

#[test]
fn single_record_store_gives_valid_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "s", "generate", "--count", "1"]);
    ok(d, &["--out", "s", "--algorithms", "CycP+", "run"]);
    ok(d, &["--out", "s", "report"]);
    let profile = fs::read_to_string(d.join("s/reports/feas/profile.csv")).unwrap();
    assert!(profile.lines().skip(1).all(|l| l.ends_with(",1")), "{profile}");
    let table = fs::read_to_string(d.join("s/reports/feas/distances.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().ends_with(",0.0000"));
}
