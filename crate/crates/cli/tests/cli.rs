use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use habitseq::simlab::{self, RunConfig};
use habitseq::{HabitModel, ModelConfig, PredictOptions};
use tempfile::TempDir;

fn habitseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_habitseq"))
        .args(args)
        .output()
        .expect("spawn habitseq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The 13-sequence stationary multiset, one sequence per line.
fn stationary_trace() -> String {
    let sc = simlab::stationary_scenario();
    let mut out = String::from("// stationary multiset\n");
    for p in &sc.phases[0] {
        for _ in 0..p.copies {
            out.push_str(&p.tokens.join(" "));
            out.push('\n');
        }
    }
    out
}

fn learned(dir: &TempDir, trace: &str, extra: &[&str]) -> (PathBuf, Output) {
    let input = dir.path().join("trace.txt");
    let model = dir.path().join("model.json");
    fs::write(&input, trace).unwrap();
    let mut args = vec!["learn", "--input", arg(&input), "--model", arg(&model)];
    args.extend_from_slice(extra);
    let out = habitseq(&args);
    (model, out)
}

fn phase4_model(dir: &TempDir) -> PathBuf {
    let run = simlab::run_sequential(&simlab::sequential_scenario(), &RunConfig::sequential()).unwrap();
    let path = dir.path().join("phase4.json");
    run.model.save(&path).unwrap();
    path
}

#[test]
fn learn_reports_shape_of_the_trace() {
    let dir = TempDir::new().unwrap();
    let (model, out) = learned(&dir, &stationary_trace(), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("13 sequences ingested"), "{text}");
    assert!(text.contains("L_max: 5"), "{text}");
    let size: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("model_size: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(size > 0);
    assert!(model.exists());
}

#[test]
fn empty_trace_gives_an_empty_model() {
    let dir = TempDir::new().unwrap();
    let (model, out) = learned(&dir, "", &[]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0 sequences ingested"));
    HabitModel::from_snapshot(&fs::read_to_string(&model).unwrap()).unwrap();

    let stats = habitseq(&["stats", "--model", arg(&model)]);
    let text = stdout(&stats);
    for field in ["model_size: 0", "L_max: 0", "clock: 0", "vocabulary: 0", "window: 200", "order: auto"] {
        assert!(text.contains(field), "missing {field:?} in {text}");
    }
}

#[test]
fn malformed_line_is_named() {
    let dir = TempDir::new().unwrap();
    let trace = "a b\nb c\n// note\n\nc\na b c\na  b\n";
    let (model, out) = learned(&dir, trace, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 7"), "{}", stderr(&out));
    assert!(!model.exists());
}

#[test]
fn hyperparameter_mismatch_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (_, first) = learned(&dir, "a b\n", &["--window", "50"]);
    assert!(first.status.success());
    let (_, again) = learned(&dir, "a b\n", &["--window", "60"]);
    assert_eq!(again.status.code(), Some(1));
    let (_, same) = learned(&dir, "a b\n", &["--window", "50"]);
    assert!(same.status.success());
    let (_, bad) = learned(&dir, "a b\n", &["--order", "zero"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn predict_rows_use_the_report_format() {
    let dir = TempDir::new().unwrap();
    let (model, _) = learned(&dir, &stationary_trace(), &[]);
    let out = habitseq(&["predict", "--model", arg(&model), "--top", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        let (rank, body) = row.split_once('\t').unwrap();
        assert_eq!(rank, (i + 1).to_string());
        let (steps, tail) = body.split_once(" -> ").unwrap();
        assert!(tail.starts_with('(') && tail.ends_with(" dB)"), "{row}");
        tail[1..tail.len() - 4].parse::<i64>().unwrap();
        for step in steps.split(' ') {
            let (_, p) = step.split_once('(').unwrap();
            let p = p.strip_suffix(')').unwrap();
            assert_eq!(p.len(), 4, "{step}");
            p.parse::<f64>().unwrap();
        }
    }
    assert!(rows[0].starts_with("1\t1a("), "{}", rows[0]);

    let tsv = habitseq(&["predict", "--model", arg(&model), "--top", "2", "--format", "tsv"]);
    let tsv = stdout(&tsv);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "rank\tpath\tjoint_probability\tevidence_db");
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1].split('\t').count(), 4);
}

#[test]
fn unknown_prompt_prints_nothing() {
    let dir = TempDir::new().unwrap();
    let (model, _) = learned(&dir, &stationary_trace(), &[]);
    let out = habitseq(&["predict", "--model", arg(&model), "--prompt", "1a zz"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("zz"));
}

#[test]
fn single_path_model_predicts_it_confidently() {
    let dir = TempDir::new().unwrap();
    let trace = "a b c\n".repeat(20);
    let (model, _) = learned(&dir, &trace, &[]);
    let out = habitseq(&["predict", "--model", arg(&model), "--top", "1"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    // twenty decayed observations: sum of (1 - 1/200)^i for i < 20, against reserve 0.5
    let n: f64 = (0..20).map(|i| (1.0 - 1.0 / 200.0f64).powi(i)).sum();
    let step = format!("{:.2}", n / (n + 0.5));
    assert!(text.starts_with(&format!("1\ta({step}) b({step}) c({step}) -> ")), "{text}");
    let db: i64 = text.trim_end().rsplit_once("(").unwrap().1.trim_end_matches(" dB)").parse().unwrap();
    assert!(db >= 10, "{text}");
}

#[test]
fn learn_then_predict_matches_in_memory_ingest() {
    let dir = TempDir::new().unwrap();
    let trace = stationary_trace();
    let (model, _) = learned(&dir, &trace, &["--window", "7.5", "--reserve", "0.25", "--order", "2"]);
    let out = habitseq(&["predict", "--model", arg(&model), "--top", "50", "--p-min", "0", "--format", "tsv"]);

    let config = ModelConfig {
        window: habitseq::Window::new(7.5).unwrap(),
        order: habitseq::MarkovOrder::bounded(2).unwrap(),
        reserve: 0.25,
    };
    let mut m = HabitModel::new(config).unwrap();
    for line in trace.lines().filter(|l| !l.starts_with("//")) {
        m.ingest(&line.split(' ').collect::<Vec<_>>()).unwrap();
    }
    let mut want = String::from("rank\tpath\tjoint_probability\tevidence_db\n");
    for (i, p) in m.predict(&[], &PredictOptions::new(50, 0.0).unwrap()).iter().enumerate() {
        want.push_str(&format!("{}\t{}\t{:e}\t{:.2}\n", i + 1, p.path_string(), p.joint, p.evidence.db()));
    }
    assert_eq!(stdout(&out), want);
    assert_eq!(fs::read_to_string(&model).unwrap(), m.to_snapshot());
}

#[test]
fn export_dot_follows_the_prompt() {
    let dir = TempDir::new().unwrap();
    let model = phase4_model(&dir);
    let dot = dir.path().join("task.dot");
    let out = habitseq(&["export-dot", "--model", arg(&model), "--prompt", "#1 #11", "--out", arg(&dot)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("label=\"#1122\""));
    assert!(!text.contains("#233"));
}

#[test]
fn export_dot_on_empty_model_is_root_only() {
    let dir = TempDir::new().unwrap();
    let (model, _) = learned(&dir, "", &[]);
    let dot = dir.path().join("empty.dot");
    let out = habitseq(&["export-dot", "--model", arg(&model), "--out", arg(&dot)]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.contains("root"));
    assert!(!text.contains("->"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let (model, _) = learned(&dir, "a b\n", &[]);
    let dot = dir.path().join("missing").join("deeper").join("x.dot");
    let out = habitseq(&["export-dot", "--model", arg(&model), "--out", arg(&dot)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_and_corrupt_models() {
    let dir = TempDir::new().unwrap();
    let absent = dir.path().join("absent.json");
    assert_eq!(habitseq(&["stats", "--model", arg(&absent)]).status.code(), Some(3));
    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{\"format_version\": 1, \"window\": ").unwrap();
    assert_eq!(habitseq(&["predict", "--model", arg(&corrupt)]).status.code(), Some(2));
    assert_eq!(habitseq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(habitseq(&["predict"]).status.code(), Some(1));
    assert_eq!(habitseq(&["--help"]).status.code(), Some(0));
}

#[test]
fn stats_after_learning() {
    let dir = TempDir::new().unwrap();
    let trace = stationary_trace();
    let (model, _) = learned(&dir, &trace, &["--window", "inf", "--reserve", "0"]);
    let text = stdout(&habitseq(&["stats", "--model", arg(&model)]));
    let distinct: std::collections::BTreeSet<&str> =
        trace.lines().filter(|l| !l.starts_with("//")).flat_map(|l| l.split(' ')).collect();
    let vocab = format!("vocabulary: {}", distinct.len());
    for field in ["L_max: 5", "clock: 13", &vocab, "window: inf", "order: auto", "reserve: 0"] {
        assert!(text.contains(field), "missing {field:?} in {text}");
    }
}

fn simulate(dir: &Path, scenario: &str) -> Vec<(String, Vec<u8>)> {
    let out = habitseq(&["simulate", scenario, "--out", arg(dir), "--seed", "42"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_stationary_writes_the_manifest() {
    let dir = TempDir::new().unwrap();
    let a = simulate(&dir.path().join("a"), "stationary");
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["phase1.dot", "report.tsv", "report.txt"]);
    let b = simulate(&dir.path().join("b"), "stationary");
    assert_eq!(a, b);
}

#[test]
fn simulate_sequential_writes_four_phases() {
    let dir = TempDir::new().unwrap();
    let a = simulate(&dir.path().join("a"), "sequential");
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["phase1.dot", "phase2.dot", "phase3.dot", "phase4.dot", "report.tsv", "report.txt"]);
    let report = String::from_utf8(a[5].1.clone()).unwrap();
    for i in 1..=4 {
        assert!(report.contains(&format!("phase {i}")), "{report}");
    }
    let b = simulate(&dir.path().join("b"), "sequential");
    assert_eq!(a, b);
}
