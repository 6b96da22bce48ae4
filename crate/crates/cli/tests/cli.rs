//! End-to-end runs of the `chandas` binary, checked against the library.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use chandas::decode::{generate, DecodeConfig, GenerateRequest};
use chandas::eval::{evaluate, ingest, Format};
use chandas::lm::{LocalLm, NgramModel};
use chandas::meter::MeterSpec;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn chandas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chandas"))
        .args(args)
        .env_remove("CHANDAS_METER_PATH")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Trains a model on the synthetic corpus into `dir`.
fn train(dir: &Path) -> PathBuf {
    let path = dir.join("model.json");
    let corpus = data("anustubh_synthetic.tsv");
    stdout(&chandas(&[
        "train-lm",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]));
    path
}

#[test]
fn scan_of_the_first_pada() {
    let out = stdout(&chandas(&["scan", "--text", "mā viṣādaṃ mahābāho", "--script", "iast", "--json"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["weights"], "glgglggg");
    assert_eq!(v["syllables"], 8);
    assert_eq!(v["ganas"], serde_json::json!(["ra", "ra"]));
    assert_eq!(v["remainder"], "gg");
}

#[test]
fn syllabify_keeps_source_spelling() {
    let out = stdout(&chandas(&["syllabify", "--text", "धर्मक्षेत्रे", "--json"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["syllables"], serde_json::json!(["ध", "र्म", "क्षे", "त्रे"]));
    assert_eq!(v["iast"], serde_json::json!(["dha", "rma", "kṣe", "tre"]));
}

#[test]
fn validate_json_matches_library() {
    let path = data("valmiki_samples.tsv");
    let out = stdout(&chandas(&["validate", "--meter", "anustubh", "--file", path.to_str().unwrap(), "--json"]));
    let lib = evaluate(&ingest(&path, Format::Tsv).unwrap(), &MeterSpec::anustubh()).unwrap();
    assert_eq!(out.trim_end(), lib.to_json());
    assert_eq!(lib.full_pct, 100.0);
}

#[test]
fn validate_reads_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verses.jsonl");
    std::fs::write(
        &path,
        concat!(
            r#"{"id":1,"english":"","sanskrit":"mā niṣāda pratiṣṭhāṃ tvam agamaḥ śāśvatīḥ samāḥ | yat krauñcamithunād ekam avadhīḥ kāmamohitam ||"}"#,
            "\n",
            r#"{"id":2,"english":"","sanskrit":"rāmo rājā"}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = stdout(&chandas(&["validate", "--file", path.to_str().unwrap(), "--json"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["records"], 2);
    assert_eq!(v["verdicts"][1]["verdict"], "invalid");
}

#[test]
fn meter_search_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tiny.toml"),
        "name = \"tiny\"\npada_count = 1\npada_len = 4\nconstraints = \"..lg\"\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_chandas"))
        .args(["validate", "--meter", "tiny", "--text", "rāmo rāma", "--json"])
        .env("CHANDAS_METER_PATH", dir.path())
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pattern"], "..lg");
    assert_eq!(v["verdicts"][0]["verdict"], "partial");

    let out = chandas(&["validate", "--meter", "tiny", "--text", "rāmo"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_is_deterministic_and_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let args = [
        "generate", "--meter", "anustubh", "--lm", model.to_str().unwrap(), "--sampler", "greedy",
        "--seed", "7", "--json", "--no-timing",
    ];
    let first = stdout(&chandas(&args));
    let second = stdout(&chandas(&args));
    assert_eq!(first, second);

    let ngram = NgramModel::load(&model).unwrap();
    let config = DecodeConfig { seed: 7, ..DecodeConfig::default() };
    let g = generate(&mut LocalLm::new(&ngram), &MeterSpec::anustubh(), &config, &GenerateRequest::default()).unwrap();
    assert_eq!(first.trim_end(), serde_json::to_string(&g.record(false)).unwrap());
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["verdict"], "full");
    assert_eq!(v["syllables"], 32);
}

#[test]
fn generate_with_prefix_and_sampler_options() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let out = stdout(&chandas(&[
        "generate", "--lm", model.to_str().unwrap(), "--sampler", "nucleus", "--top-p", "0.8",
        "--count", "3", "--prefix", "रामः ", "--seed", "1",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in lines {
        assert!(line.starts_with("रामः "), "{line}");
        assert!(line.ends_with("\tfull"), "{line}");
    }
}

#[test]
fn train_reports_perplexity_below_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("m.json");
    let corpus = data("anustubh_synthetic.tsv");
    let out = stdout(&chandas(&[
        "train-lm", "--corpus", corpus.to_str().unwrap(), "--holdout-every", "10", "--out",
        out_path.to_str().unwrap(), "--json",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["held_out"], 30);
    assert!(v["perplexity"].as_f64().unwrap() < v["uniform_perplexity"].as_f64().unwrap());
    assert!(NgramModel::load(&out_path).is_ok());
}

#[test]
fn eval_writes_csv_and_reports_generations() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let csv = dir.path().join("verdicts.csv");
    let out = stdout(&chandas(&[
        "eval", "--lm", model.to_str().unwrap(), "--count", "5", "--json", "--csv", csv.to_str().unwrap(),
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["full_pct"], 100.0);
    assert_eq!(v["dead_end_rate"], 0.0);
    let csv = std::fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("id,verdict,syllables,first_violation,weights,error"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn bench_compares_cache_settings() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let out = stdout(&chandas(&["bench", "--lm", model.to_str().unwrap(), "--count", "4", "--compare-cache", "--json"]));
    let reports: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["label"], "cache 1000");
    assert_eq!(reports[1]["cache_hit_rate"], 0.0);
    assert!(reports[0]["cache_hit_rate"].as_f64().unwrap() > 0.5);
    assert!(reports[0]["latency_mean_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn serve_mask_over_stdio() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_chandas"))
        .arg("serve-mask")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let session = concat!(
        r#"{"type":"hello","specials":["<eos>"]}"#, "\n",
        r#"{"type":"accept","token":"रामो"}"#, "\n",
        r#"{"type":"accept","token":"रामो"}"#, "\n",
        r#"{"type":"mask","candidates":["का","क","<eos>"]}"#, "\n",
        r#"{"type":"bye"}"#, "\n",
    );
    child.stdin.take().unwrap().write_all(session.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["type"], "ok");
    assert_eq!(lines[2]["weights"], "gggg");
    // Position five of a pada must be laghu.
    assert_eq!(lines[3]["indices"], serde_json::json!([1, 2]));
}

#[test]
fn exit_codes() {
    assert_eq!(chandas(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(chandas(&["generate"]).status.code(), Some(2));
    assert_eq!(chandas(&["scan", "--text", "rāmaX"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "1\tonly two\n").unwrap();
    assert_eq!(chandas(&["validate", "--file", bad.to_str().unwrap()]).status.code(), Some(1));
    let model = train(dir.path());
    let m = model.to_str().unwrap();
    let dead = chandas(&["generate", "--lm", m, "--prefix", "काकाकाका", "--k-init", "1", "--k-max", "1", "--json"]);
    assert_eq!(dead.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&dead.stdout).unwrap();
    assert_eq!(v["verdict"], "dead_end");
    let off_meter = chandas(&["generate", "--lm", m, "--prefix", "काकाकाकाका"]);
    assert_eq!(off_meter.status.code(), Some(1));
}
