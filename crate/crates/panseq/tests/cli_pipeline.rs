//! End-to-end CLI tests: subcommand composition, determinism, and file
//! round-trips through the library readers.

use std::fs;
use std::path::Path;
use std::process::Command;

fn panseq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_panseq"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("spawn panseq");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn translate_then_count_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let fasta = dir.path().join("reads.fasta");
    // Two identical ORFs, one distinct, one with no ATG, one without stop.
    fs::write(
        &fasta,
        ">r1\nATGAAATAA\n>r2\nATGAAATAA\n>r3\nCCATGGGTTGA\n>r4\nCCCCCC\n>r5\nATGAAA\n",
    )
    .unwrap();
    let protein = dir.path().join("protein.fasta");
    let stderr = run_ok(panseq().arg("translate").arg(&fasta).arg(&protein));
    assert!(stderr.contains("3 translated"), "stderr: {stderr}");
    assert!(stderr.contains("1 without ATG"));
    assert!(stderr.contains("1 without stop"));
    let records = panseq::seqio::parse_fasta(read(&protein).as_bytes()).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0].sequence, "MK");

    // Default count drops singletons (MG appears once).
    let counts = dir.path().join("counts.tsv");
    run_ok(panseq().arg("count").arg(&protein).arg(&counts));
    assert_eq!(read(&counts), "sequence\tcount\nMK\t2\n");

    // keep-singletons retains everything; re-running is byte-identical.
    let all = dir.path().join("all.tsv");
    run_ok(panseq().arg("count").arg(&protein).arg(&all).arg("--keep-singletons"));
    assert_eq!(read(&all), "sequence\tcount\nMK\t2\nMG\t1\n");
    let again = dir.path().join("again.tsv");
    run_ok(panseq().arg("count").arg(&protein).arg(&again).arg("--keep-singletons"));
    assert_eq!(read(&all), read(&again));
}

#[test]
fn simulate_is_deterministic_across_processes() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        run_ok(
            panseq()
                .arg("simulate")
                .arg(dir.path())
                .args(["--seed", "7", "--n-vhh", "120", "--n-targets", "3"])
                .args(["--read-depth", "20000"]),
        );
    }
    let mut names: Vec<String> = fs::read_dir(dir_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    // 1 mother + 3 sublibraries + 1 NC + manifest + ground truth.
    assert_eq!(names.len(), 7, "{names:?}");
    for name in &names {
        assert_eq!(
            read(&dir_a.path().join(name)),
            read(&dir_b.path().join(name)),
            "file {name} differs between identical seeded runs"
        );
    }
}

#[test]
fn full_pipeline_composes() {
    let dir = tempfile::tempdir().unwrap();
    let sim_dir = dir.path().join("sim");
    run_ok(
        panseq()
            .arg("simulate")
            .arg(&sim_dir)
            .args(["--seed", "11", "--n-vhh", "250", "--n-targets", "8"])
            .args(["--read-depth", "40000", "--epitope-mode", "--epitope-width", "30"]),
    );

    // Label against the manifest; audit requested.
    let labeled = dir.path().join("labeled.csv");
    let audit = dir.path().join("audit.tsv");
    run_ok(
        panseq()
            .arg("label")
            .arg(sim_dir.join("manifest.txt"))
            .arg(&labeled)
            .arg("--audit")
            .arg(&audit),
    );
    let rows = panseq::dataset::read_labeled_csv(read(&labeled).as_bytes()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.target_id != "NC"));
    assert!(read(&audit).lines().count() > 1);

    // Labels must be consistent with the simulator's ground truth.
    let truth =
        panseq::sim::read_ground_truth_csv(read(&sim_dir.join("ground_truth.csv")).as_bytes())
            .unwrap();
    let mut tp = 0u64;
    let mut fp = 0u64;
    for row in &rows {
        if row.label == panseq::labeler::Label::Binder {
            let bound = truth[&(row.vhh_sequence.clone(), row.target_id.clone())];
            if bound {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    assert!(tp > 20, "expected some true binders, got {tp}");
    assert!(
        (fp as f64) / ((tp + fp) as f64) < 0.05,
        "binder labels disagree with ground truth: tp = {tp}, fp = {fp}"
    );

    // Split: 2 runs over a reduced checkpoint list.
    let split_dir = dir.path().join("splits");
    run_ok(
        panseq()
            .arg("split")
            .arg(&labeled)
            .arg(&split_dir)
            .args(["--seed", "3", "--runs", "2", "--checkpoints", "1,2,4"]),
    );
    assert!(split_dir.join("test.csv").exists());
    assert!(split_dir.join("plan.csv").exists());
    assert!(split_dir.join("run1/ckpt01_train.csv").exists());
    assert!(split_dir.join("run2/ckpt04_train.csv").exists());
    // Checkpoint files grow with the schedule.
    let c1 = read(&split_dir.join("run1/ckpt01_train.csv")).lines().count();
    let c4 = read(&split_dir.join("run1/ckpt04_train.csv")).lines().count();
    assert!(c1 < c4, "checkpoint 1 ({c1} rows) should be smaller than 4 ({c4})");

    // Train/eval LR with a small iteration budget.
    let metrics = dir.path().join("metrics.csv");
    run_ok(
        panseq()
            .arg("train-eval")
            .arg(&split_dir)
            .arg(&metrics)
            .args(["--model", "lr", "--encoding", "onehot", "--max-iterations", "150"]),
    );
    let metrics_text = read(&metrics);
    let mut lines = metrics_text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run,checkpoint,n_antigens,model,precision,recall,f1,pr_auc"
    );
    let data_rows: Vec<&str> = lines.collect();
    assert_eq!(data_rows.len(), 6); // 2 runs x 3 checkpoints
    for line in &data_rows {
        let f1: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&f1));
    }

    // Stats report over the labeled dataset.
    let report = dir.path().join("report.txt");
    run_ok(
        panseq()
            .arg("stats")
            .arg(&labeled)
            .arg(&report)
            .args(["--identity-sample", "40"]),
    );
    let report_text = read(&report);
    assert!(report_text.contains("total_rows"));
    assert!(report_text.contains("[per_antigen]"));
    assert!(report_text.contains("[identity_histogram]"));
}

#[test]
fn split_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sim_dir = dir.path().join("sim");
    run_ok(
        panseq()
            .arg("simulate")
            .arg(&sim_dir)
            .args(["--seed", "5", "--n-vhh", "150", "--n-targets", "5"])
            .args(["--read-depth", "20000"]),
    );
    let labeled = dir.path().join("labeled.csv");
    run_ok(panseq().arg("label").arg(sim_dir.join("manifest.txt")).arg(&labeled));

    let split_a = dir.path().join("a");
    let split_b = dir.path().join("b");
    for out in [&split_a, &split_b] {
        run_ok(
            panseq()
                .arg("split")
                .arg(&labeled)
                .arg(out)
                .args(["--seed", "7", "--runs", "2"]),
        );
    }
    // Byte-identical outputs, recursively.
    fn compare(a: &Path, b: &Path) {
        let mut names: Vec<String> = fs::read_dir(a)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        for name in names {
            let (pa, pb) = (a.join(&name), b.join(&name));
            if pa.is_dir() {
                compare(&pa, &pb);
            } else {
                assert_eq!(read(&pa), read(&pb), "{name} differs");
            }
        }
    }
    compare(&split_a, &split_b);
}

#[test]
fn errors_produce_machine_readable_lines() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.fasta");
    let out = dir.path().join("out.fasta");
    let output = panseq()
        .arg("translate")
        .arg(&missing)
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    assert!(
        line.starts_with("error\t"),
        "expected machine-readable error line, got: {line}"
    );
    assert_eq!(line.split('\t').count(), 3);

    // Bad manifest -> config/parse category, nonzero exit.
    let manifest = dir.path().join("manifest.txt");
    fs::write(&manifest, "not a manifest\n").unwrap();
    let output = panseq()
        .arg("label")
        .arg(&manifest)
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("error\tparse\t"));
}
