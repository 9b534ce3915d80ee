use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use assoc_bench::benchkit::BenchmarkManifest;
use assoc_bench::graph::ingest_matrix;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fx(name: &str) -> &'static str {
    Box::leak(fixture(name).to_str().unwrap().to_string().into_boxed_str())
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_assoc-bench"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn assoc-bench")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn without_latency(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("latency_ms");
            v
        })
        .collect()
}

/// Small image subset so assembly stays quick.
fn small_images(dir: &Path) -> PathBuf {
    let all: Vec<Value> = serde_json::from_str(&fs::read_to_string(fixture("images225.json")).unwrap()).unwrap();
    let picked: Vec<Value> = all.into_iter().step_by(45).collect();
    let out = dir.join("images.json");
    fs::write(&out, serde_json::to_string_pretty(&picked).unwrap()).unwrap();
    out
}

fn assemble_small(dir: &Path, seed: &str, jobs: &str) -> PathBuf {
    let images = small_images(dir);
    let out = dir.join(format!("manifest-{seed}-{jobs}.json"));
    let o = run(&[
        "--jobs", jobs, "assemble",
        "--graph", fx("graph25.csv"),
        "--images", p(&images),
        "--templates", fx("templates.json"),
        "--seed", seed,
        "--generations", "60",
        "--out", p(&out),
    ]);
    let v = json(&o);
    assert_eq!(v["samples"], 5 * 3 * 3);
    assert_eq!(v["per_subtask"]["7T1"], 15);
    out
}

#[test]
fn select_prints_distractors_json() {
    let o = run(&["select", "--graph", fx("graph25.csv"), "--answer", "moon", "--m", "4", "--seed", "5"]);
    let v = json(&o);
    assert_eq!(v["answer"], "moon");
    assert_eq!(v["method"], "ga");
    assert_eq!(v["m"], 4);
    let d = v["distractors"].as_array().unwrap();
    assert_eq!(d.len(), 3);
    assert!(d.iter().all(|x| x != "moon"));
    assert!(v["result"]["stats"]["objective"].is_number());

    let exact = json(&run(&[
        "select", "--graph", fx("graph25.csv"), "--answer", "moon", "--m", "4", "--exhaustive",
    ]));
    assert_eq!(exact["method"], "exhaustive");
    assert_eq!(exact["distractors"], v["distractors"]);
}

#[test]
fn select_is_reproducible_across_jobs() {
    let args = ["select", "--graph", fx("graph25.csv"), "--answer", "cat", "--m", "7", "--seed", "11"];
    let one = run(&[&["--jobs", "1"], &args[..]].concat());
    let two = run(&[&["--jobs", "2"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn sweep_and_audit_are_reproducible_across_jobs() {
    let sweep = [
        "sweep", "--graph", fx("graph25.csv"), "--answer", "star,moon", "--m", "4", "--seed", "3",
        "--method", "ga", "--generations", "40",
    ];
    let a = run(&[&["--jobs", "1"], &sweep[..]].concat());
    let b = run(&[&["--jobs", "2"], &sweep[..]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 2 * 5);

    let audit = [
        "audit", "--graph", fx("graph25.csv"), "--labels", fx("ambiguous25.csv"),
        "--option-counts", "4", "--repetitions", "2", "--seed", "9", "--generations", "30", "--restarts", "2",
    ];
    let a = run(&[&["--jobs", "1"], &audit[..]].concat());
    let b = run(&[&["--jobs", "2"], &audit[..]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("Quantity,Random,Algorithm\n4,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["select", "--bogus"]).status.code(), Some(2));
    let missing_seed = run(&["sweep", "--graph", fx("graph25.csv"), "--m", "4"]);
    assert_eq!(missing_seed.status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    for cmd in ["curate", "graph", "select", "sweep", "audit", "assemble", "validate", "eval", "report"] {
        assert!(stdout(&help).contains(cmd), "help lists {cmd}");
    }
}

#[test]
fn domain_errors_exit_one() {
    let o = run(&["select", "--graph", fx("graph25.csv"), "--answer", "dragon", "--m", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let too_many = run(&["select", "--graph", fx("graph25.csv"), "--answer", "cat", "--m", "26"]);
    assert_eq!(too_many.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_cli_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 3\n\n[select]\nlambda = 5.0\nm = 4\nexhaustive = true\n").unwrap();
    let base = ["--config", p(&cfg), "select", "--graph", fx("graph25.csv"), "--answer", "cup"];
    let from_file = json(&run(&base));
    assert_eq!(from_file["seed"], 3);
    assert_eq!(from_file["m"], 4);
    assert_eq!(from_file["method"], "exhaustive");
    assert_eq!(from_file["result"]["stats"]["lambda"], 5.0);

    let overridden = json(&run(&[&base[..], &["--seed", "8", "--lambda", "0"]].concat()));
    assert_eq!(overridden["seed"], 8);
    assert_eq!(overridden["result"]["stats"]["lambda"], 0.0);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = [\n").unwrap();
    let o = run(&["--config", p(&bad), "select", "--graph", fx("graph25.csv"), "--answer", "cup", "--m", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_from_masks_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let prov = dir.path().join("prov.json");
    let v = json(&run(&[
        "graph", "--masks", fx("masks"), "--out", p(&out), "--provenance", p(&prov),
    ]));
    let expected = ingest_matrix(fixture("graph25.csv"), false).unwrap();
    assert_eq!(v["classes"], 25);
    assert_eq!(v["digest"], expected.digest());
    assert_eq!(ingest_matrix(&out, false).unwrap().digest(), expected.digest());
    assert!(prov.exists());

    let again = dir.path().join("again.csv");
    let w = json(&run(&["graph", "--matrix", p(&out), "--out", p(&again)]));
    assert_eq!(w["digest"], v["digest"]);
    assert_eq!(run(&["graph", "--out", p(&again)]).status.code(), Some(2));
}

#[test]
fn curate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(&[
        "curate",
        "--records", fx("regen_scores.jsonl"),
        "--allowlist", fx("allowlist.txt"),
        "--rankings", fx("rankings"),
        "--out-dir", p(dir.path()),
    ]));
    assert_eq!(v["records"], 625);
    assert_eq!(v["retained"], 151);
    assert_eq!(v["rejected"], 474);
    assert_eq!(v["relevant_picks"], 3);
    let retained = fs::read_to_string(dir.path().join("retained.txt")).unwrap();
    let n = v["retained"].as_u64().unwrap() + v["allowlisted"].as_u64().unwrap();
    assert_eq!(retained.lines().count() as u64, n);
    assert!(retained.lines().any(|l| l == "moon_extra_01"));
    let rejections = fs::read_to_string(dir.path().join("rejections.csv")).unwrap();
    assert_eq!(rejections.lines().count(), 1 + 474);
    let relevant = fs::read_to_string(dir.path().join("relevant.csv")).unwrap();
    assert!(relevant.starts_with("image_id,mask_id\n"));
    assert_eq!(relevant.lines().count(), 4);
}

#[test]
fn assemble_is_reproducible_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let a = assemble_small(dir.path(), "41", "1");
    let b = assemble_small(dir.path(), "41", "2");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = assemble_small(dir.path(), "42", "1");
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let ok = run(&["validate", "--manifest", p(&a)]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("valid: 45 samples"));
}

#[test]
fn validate_reports_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = assemble_small(dir.path(), "7", "1");
    let mut m = BenchmarkManifest::load(&path).unwrap();
    m.samples[0].answer_letter = 'Z';
    let dup = m.samples[1].options[0].label.clone();
    m.samples[1].options[1].label = dup;
    m.samples.pop();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, m.to_json().unwrap()).unwrap();
    let o = run(&["validate", "--manifest", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().count() >= 3, "{text}");
    assert!(text.contains(&m.samples[0].id));
    assert!(text.contains(&m.samples[1].id));
}

#[test]
fn eval_and_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = assemble_small(dir.path(), "5", "1");
    let oracle = dir.path().join("oracle.jsonl");
    let card = dir.path().join("oracle.csv");
    let o = run(&[
        "eval", "--manifest", p(&manifest), "--adapter", "oracle", "--out", p(&oracle), "--scorecard", p(&card),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "model,4T1,7T1,10T1,Avg.\noracle,100.00,100.00,100.00,100.00\n");
    assert_eq!(fs::read_to_string(&card).unwrap(), stdout(&o));
    assert_eq!(fs::read_to_string(&oracle).unwrap().lines().count(), 45);

    let random = dir.path().join("random.jsonl");
    let r1 = run(&["eval", "--manifest", p(&manifest), "--adapter", "random", "--seed", "4", "--out", p(&random)]);
    let first = without_latency(&random);
    let r2 = run(&[
        "eval", "--manifest", p(&manifest), "--adapter", "random", "--seed", "4", "--max-inflight", "1",
        "--out", p(&random),
    ]);
    assert!(r1.status.success() && r2.status.success());
    assert_eq!(without_latency(&random), first);

    assert_eq!(
        run(&["eval", "--manifest", p(&manifest), "--adapter", "http", "--out", p(&random)]).status.code(),
        Some(1)
    );

    let cognition = dir.path().join("cognition.csv");
    fs::write(&cognition, "model,score\noracle,90\nrandom,10\n").unwrap();
    let set_a = format!("oracle={},{}", p(&manifest), p(&oracle));
    let set_b = format!("random={},{}", p(&manifest), p(&random));
    let out_dir = dir.path().join("report");
    let rep = run(&[
        "report", "--manifest", p(&manifest), "--records", p(&oracle), "--records", p(&random),
        "--baseline", "analytic", "--set", &set_a, "--set", &set_b, "--cognition", p(&cognition),
        "--graph", fx("graph25.csv"), "--subset", "moon,star,cat", "--out-dir", p(&out_dir),
    ]);
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    let cards = fs::read_to_string(out_dir.join("scorecards.csv")).unwrap();
    assert_eq!(cards.lines().count(), 4);
    assert!(cards.contains("\noracle,100.00,100.00,100.00,100.00\n"));
    let cmp = fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    assert!(cmp.starts_with("set,subtask,score,reference,delta,near_random\n"));
    assert!(cmp.contains("oracle,Avg.,100.00"));
    let corr: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("correlation.json")).unwrap()).unwrap();
    assert!((corr["pearson"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let heat = fs::read_to_string(out_dir.join("heatmap.csv")).unwrap();
    assert!(heat.starts_with("class,moon,star,cat\nmoon,1.0000,"));
    assert_eq!(heat.lines().count(), 4);

    assert_eq!(run(&["report", "--out-dir", p(&out_dir)]).status.code(), Some(1));
}
