use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn callcost(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_callcost"))
        .args(args)
        .current_dir(cwd)
        .env("CALLCOST_NO_COLOR", "1")
        .output()
        .expect("spawn callcost")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn metadata(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

const SMALL: &[&str] = &[
    "--synthetic",
    "--docs",
    "60",
    "--vocab",
    "400",
    "--mean-dl",
    "20",
    "--quiet",
];

#[test]
fn ingest_text_directory_then_run_from_index() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("docs");
    fs::create_dir(&corpus).unwrap();
    fs::write(
        corpus.join("a.txt"),
        "Rocket rocket engines. The rocket launch.",
    )
    .unwrap();
    fs::write(corpus.join("b.txt"), "A rocket and a launch pad.").unwrap();
    fs::write(corpus.join("c.txt"), "Fuel tanks, no engines here.").unwrap();

    ok(&callcost(
        &["ingest", "--corpus", "docs", "--out", "index.json"],
        tmp.path(),
    ));
    let index: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(index["d"], 3);
    let rocket = index["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e[0] == "rocket")
        .unwrap();
    assert_eq!(rocket[1], 2);

    ok(&callcost(
        &[
            "run",
            "--index",
            "index.json",
            "--quiet",
            "--out-dir",
            "out",
        ],
        tmp.path(),
    ));
    let meta = metadata(&tmp.path().join("out"));
    assert_eq!(meta["command"], "run");
    assert_eq!(meta["results"].as_array().unwrap().len(), 3);
    for r in meta["results"].as_array().unwrap() {
        assert_eq!(r["inline_checksum"], r["call_checksum"]);
    }
    for name in ["raw.csv", "summary.csv", "report.md"] {
        assert!(tmp.path().join("out").join(name).is_file(), "{name}");
    }
}

#[test]
fn report_rerenders_the_run_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--out-dir", "out", "--unit", "ns"];
    args.extend_from_slice(SMALL);
    ok(&callcost(&args, tmp.path()));

    let out = callcost(
        &["report", "--raw", "out/raw.csv", "--unit", "ns"],
        tmp.path(),
    );
    ok(&out);
    assert_eq!(
        out.stdout,
        fs::read(tmp.path().join("out/report.md")).unwrap()
    );

    let csv = callcost(
        &["report", "--raw", "out/raw.csv", "--format", "csv"],
        tmp.path(),
    );
    ok(&csv);
    assert!(String::from_utf8(csv.stdout)
        .unwrap()
        .contains("Inline code"));
}

#[test]
fn scale_writes_plot_data_and_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "scale",
        "--out-dir",
        "out",
        "--factors",
        "1,2,3",
        "--models",
        "bm25,tfidf",
    ];
    args.extend_from_slice(SMALL);
    ok(&callcost(&args, tmp.path()));
    let out = tmp.path().join("out");
    for name in [
        "plot_tfidf.csv",
        "plot_bm25.csv",
        "raw.csv",
        "summary.csv",
        "report.md",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let plot = fs::read_to_string(out.join("plot_bm25.csv")).unwrap();
    assert!(plot.starts_with("element_count,inline_mean,call_mean\n"));
    assert_eq!(plot.lines().filter(|l| l.starts_with("#fit")).count(), 2);
    let meta = metadata(&out);
    assert_eq!(meta["fits"].as_array().unwrap().len(), 2);
    assert_eq!(meta["results"].as_array().unwrap().len(), 6);
}

#[test]
fn scale_schedules_agree_on_workload() {
    let tmp = tempfile::tempdir().unwrap();
    for (schedule, dir) in [("sequential", "seq"), ("interleaved", "int")] {
        let mut args = vec![
            "scale",
            "--factors",
            "1,4",
            "--schedule",
            schedule,
            "--out-dir",
            dir,
        ];
        args.extend_from_slice(SMALL);
        ok(&callcost(&args, tmp.path()));
    }
    let (a, b) = (
        metadata(&tmp.path().join("seq")),
        metadata(&tmp.path().join("int")),
    );
    assert_eq!(a["config"]["schedule"], "sequential");
    assert_eq!(b["config"]["schedule"], "interleaved");
    for (x, y) in a["results"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["results"].as_array().unwrap())
    {
        assert_eq!(x["element_count"], y["element_count"]);
        assert_eq!(x["weight_count"], y["weight_count"]);
        assert_eq!(x["inline_checksum"], y["inline_checksum"]);
    }

    fs::write(tmp.path().join("bad.toml"), "schedule = \"random\"\n").unwrap();
    let out = callcost(&["scale", "--config", "bad.toml", "--quiet"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bench.toml"),
        "docs = 30\nvocab = 100\nmean_dl = 10\nreps = 2\nmodels = \"tfidf\"\nseed = 9\n",
    )
    .unwrap();
    ok(&callcost(
        &[
            "run",
            "--config",
            "bench.toml",
            "--reps",
            "4",
            "--quiet",
            "--out-dir",
            "out",
        ],
        tmp.path(),
    ));
    let meta = metadata(&tmp.path().join("out"));
    assert_eq!(meta["config"]["reps"], 4);
    assert_eq!(meta["config"]["models"], serde_json::json!(["tfidf"]));
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["config"]["source"]["num_docs"], 30);
}

#[test]
fn waiver_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "run",
        "--out-dir",
        "out",
        "--waive-ordering",
        "shared runner",
    ];
    args.extend_from_slice(SMALL);
    ok(&callcost(&args, tmp.path()));
    let meta = metadata(&tmp.path().join("out"));
    assert_eq!(meta["ordering"]["waiver"], "shared runner");
    assert!(meta["toolchain"].as_str().unwrap().starts_with("rustc"));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--bogus"][..],
        &["run", "--index", "x.json", "--synthetic"],
        &["run", "--reps", "0"],
        &["run", "--models", "nope"],
        &["frobnicate"],
    ] {
        assert_eq!(
            callcost(args, tmp.path()).status.code(),
            Some(1),
            "{args:?}"
        );
    }
    assert_eq!(callcost(&["--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn bad_input_files_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("broken.json"), "{\"version\": 1, \"d\": ").unwrap();
    fs::write(tmp.path().join("raw.csv"), "model,form\n").unwrap();
    for args in [
        &["run", "--index", "missing.json"][..],
        &["run", "--index", "broken.json"],
        &["report", "--raw", "raw.csv"],
        &["report", "--raw", "missing.csv"],
    ] {
        let out = callcost(args, tmp.path());
        assert_eq!(
            out.status.code(),
            Some(3),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn no_color_output_is_plain() {
    let tmp = tempfile::tempdir().unwrap();
    let out = callcost(&["run", "--index", "missing.json"], tmp.path());
    assert!(!out.stderr.contains(&0x1b));
}
