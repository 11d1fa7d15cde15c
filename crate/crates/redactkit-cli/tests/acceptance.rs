//! Release gate for the binary: the whole pipeline, run twice on the
//! bundled mini corpus with the same seeds, must produce byte-identical
//! artifacts. Prints `acceptance <name>: PASS` or `FAIL` like the library
//! gate (visible with `--nocapture`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn finish(name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("acceptance {name}: PASS");
        return;
    }
    println!("acceptance {name}: FAIL ({} violation(s))", failures.len());
    for f in &failures {
        println!("  - {f}");
    }
    panic!("acceptance {name}: {} violation(s)", failures.len());
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../redactkit/tests/data")
        .join(name)
}

fn run(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_redactkit"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| format!("spawning redactkit {args:?}: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "redactkit {args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr),
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| format!("redactkit {args:?} stdout: {e}"))
}

const POINTS_CONTENT: &str = concat!(
    r#"[{"fraction": 0.25, "score": 61.2, "strategy": "content"},"#,
    r#" {"fraction": 0.5, "score": 44.6, "strategy": "content"},"#,
    r#" {"fraction": 1.0, "score": 30.8, "strategy": "content"}]"#,
);

const POINTS_RANDOM: &str = concat!(
    r#"[{"fraction": 0.25, "score": 82.4, "strategy": "random"},"#,
    r#" {"fraction": 0.5, "score": 70.1, "strategy": "random"}]"#,
);

fn predictions() -> String {
    (0..200)
        .map(|i| format!("{{\"id\":\"rec{i:03}\",\"prediction\":\"placeholder answer {i}\"}}\n"))
        .collect()
}

const ARTIFACTS: &[&str] = &[
    "redacted_eval.jsonl",
    "redacted_train.jsonl",
    "report.json",
    "scores.csv",
    "plan_random.jsonl",
    "plan_content.jsonl",
    "kept.jsonl",
    "curve.csv",
    "impact.json",
    "score.json",
];

fn pipeline(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
    for name in ["qa_mini.jsonl", "qa_mini_annotations.jsonl"] {
        fs::copy(fixture(name), dir.join(name)).map_err(|e| format!("copying {name}: {e}"))?;
    }
    fs::write(dir.join("points_content.json"), POINTS_CONTENT).map_err(|e| e.to_string())?;
    fs::write(dir.join("points_random.json"), POINTS_RANDOM).map_err(|e| e.to_string())?;
    fs::write(dir.join("predictions.jsonl"), predictions()).map_err(|e| e.to_string())?;

    run(
        dir,
        &[
            "redact", "--input", "qa_mini.jsonl", "--annotations", "qa_mini_annotations.jsonl",
            "--format", "qa", "--emit-map", "--output", "redacted_eval.jsonl",
        ],
    )?;
    run(
        dir,
        &[
            "redact", "--input", "qa_mini.jsonl", "--annotations", "qa_mini_annotations.jsonl",
            "--format", "qa", "--split", "train", "--jobs", "3", "--output",
            "redacted_train.jsonl",
        ],
    )?;
    run(
        dir,
        &[
            "stats", "--input", "qa_mini.jsonl", "--annotations", "qa_mini_annotations.jsonl",
            "--format", "qa", "--json", "--scores-out", "scores.csv", "--output", "report.json",
        ],
    )?;
    run(
        dir,
        &[
            "sample", "--scores", "scores.csv", "--fraction", "0.35", "--strategy", "random",
            "--seed", "20260815", "--output", "plan_random.jsonl",
        ],
    )?;
    run(
        dir,
        &[
            "sample", "--scores", "scores.csv", "--fraction", "0.35", "--strategy",
            "content-high", "--output", "plan_content.jsonl",
        ],
    )?;
    run(
        dir,
        &[
            "sample", "--scores", "scores.csv", "--fraction", "0.4", "--mode", "repair",
            "--strategy", "content", "--output", "kept.jsonl",
        ],
    )?;
    run(
        dir,
        &["curve", "points_content.json", "points_random.json", "--output", "curve.csv"],
    )?;
    run(
        dir,
        &["impact", "--none", "65.8", "--redact", "57.8", "--json", "--output", "impact.json"],
    )?;
    run(
        dir,
        &[
            "score", "--predictions", "predictions.jsonl", "--gold", "qa_mini.jsonl",
            "--metric", "token-f1", "--json", "--output", "score.json",
        ],
    )?;
    let validate = run(dir, &["validate", "--input", "qa_mini.jsonl", "--format", "qa", "--json"])?;

    let mut artifacts = BTreeMap::new();
    for name in ARTIFACTS {
        let bytes =
            fs::read(dir.join(name)).map_err(|e| format!("reading artifact {name}: {e}"))?;
        artifacts.insert(name.to_string(), bytes);
    }
    artifacts.insert("validate.stdout".to_string(), validate.into_bytes());
    Ok(artifacts)
}

fn lines_in(artifacts: &BTreeMap<String, Vec<u8>>, name: &str) -> usize {
    artifacts[name].split(|&b| b == b'\n').filter(|l| !l.is_empty()).count()
}

#[test]
fn pipeline_runs_are_byte_identical() {
    let mut failures = Vec::new();
    let tmp = tempfile::tempdir().unwrap();

    let first = pipeline(&tmp.path().join("run_a"));
    let second = pipeline(&tmp.path().join("run_b"));
    match (first, second) {
        (Ok(a), Ok(b)) => {
            for (name, bytes) in &a {
                match b.get(name) {
                    Some(other) if other == bytes => {}
                    Some(_) => failures.push(format!("{name} differs between the two runs")),
                    None => failures.push(format!("{name} missing from the second run")),
                }
            }
            let eval_lines = lines_in(&a, "redacted_eval.jsonl");
            if eval_lines != 200 {
                failures.push(format!("redacted_eval.jsonl has {eval_lines} records, not 200"));
            }
            let train_lines = lines_in(&a, "redacted_train.jsonl");
            if train_lines >= eval_lines {
                failures.push(format!(
                    "the train split kept {train_lines} records, the eval split {eval_lines}; \
                     train must drop the records whose answers were redacted",
                ));
            }
        }
        (Err(e), _) => failures.push(format!("first run: {e}")),
        (_, Err(e)) => failures.push(format!("second run: {e}")),
    }

    finish("pipeline_runs_are_byte_identical", failures);
}
