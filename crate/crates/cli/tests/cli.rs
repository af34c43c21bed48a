use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bp() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bp"));
    cmd.env_remove("BP_DENSE_LIMIT").env("RUST_LOG", "error");
    cmd
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[derive(Debug)]
struct Row {
    n: usize,
    param: String,
    closed: Option<f64>,
    exact: Option<f64>,
    mc: Option<f64>,
    stderr: Option<f64>,
}

fn field(s: &str) -> Option<f64> {
    (!s.is_empty()).then(|| s.parse().unwrap())
}

fn rows(csv_text: &str) -> Vec<Row> {
    let body: String = csv_text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            Row {
                n: r[col("n")].parse().unwrap(),
                param: r[col("param")].to_string(),
                closed: field(&r[col("var_closed")]),
                exact: field(&r[col("var_exact")]),
                mc: field(&r[col("var_mc")]),
                stderr: field(&r[col("stderr")]),
            }
        })
        .collect()
}

fn check_shipped(name: &str, expected_rows: usize) {
    let out = run(bp().args(["experiment", "--config"]).arg(config(name)));
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), expected_rows);
    for r in &rows {
        let closed = r.closed.expect("closed form");
        let exact = r.exact.expect("exact variance");
        assert!((closed - exact).abs() <= 1e-10, "{r:?}");
        let (mc, se) = (r.mc.expect("mc"), r.stderr.expect("stderr"));
        assert!((mc - closed).abs() <= 5.0 * se + 1e-12, "{name} {r:?}: {:.2} SE", (mc - closed) / se);
    }
}

#[test]
fn gaussian_config_matches_closed_forms() {
    check_shipped("gaussian.json", 10);
}

#[test]
fn magic_config_matches_closed_forms() {
    check_shipped("magic.json", 10);
}

#[test]
fn nonfermionic_config_matches_closed_forms() {
    check_shipped("nonfermionic.json", 4);
}

#[test]
fn gaussian_rows_hold_expected_values() {
    let out = run(bp().args(["experiment", "--experiment", "gaussian", "--n", "4", "--samples", "0"]));
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    let params: Vec<&str> = rows.iter().map(|r| r.param.as_str()).collect();
    assert_eq!(params, ["1", "2", "3", "4"]);
    // C(4,m)/C(8,2m), with zero at m = n.
    let want = [4.0 / 28.0, 6.0 / 70.0, 4.0 / 28.0, 0.0];
    for (r, w) in rows.iter().zip(want) {
        assert_eq!(r.n, 4);
        assert!((r.closed.unwrap() - w).abs() < 1e-15);
        assert!((r.exact.unwrap() - w).abs() < 1e-12);
        assert!(r.mc.is_none() && r.stderr.is_none());
    }
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let body = |path: &Path| -> Vec<String> {
        std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with("# generated_at=")).map(String::from).collect()
    };
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let path = scratch(&format!("rerun-{i}.csv"));
        run(bp()
            .args(["experiment", "--experiment", "magic", "--n", "4", "--grid", "0.5,2", "--samples", "300", "--seed", "9"])
            .args(["--workers", workers, "--output"])
            .arg(&path));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# generated_at="));
        outputs.push(body(&path));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].len(), 3);
}

#[test]
fn json_output_has_rows() {
    let out = run(bp().args(["experiment", "--experiment", "nonfermionic", "--n", "3", "--samples", "0", "--format", "json"]));
    let doc = json(&out);
    assert!(doc["generated_at"].is_u64());
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // 4α²β² C(2,0)/C(6,1) with α = β = 1/√2.
    assert!((rows[0]["var_closed"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    assert!(rows[0]["var_mc"].is_null());
}

#[test]
fn custom_experiment_uses_state_and_observable() {
    let out = run(bp().args([
        "experiment", "--experiment", "custom", "--n", "2", "--state", "zero", "--observable", "ZI", "--samples", "0",
    ]));
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert!(rows[0].closed.is_none());
    assert!((rows[0].exact.unwrap() - 2.0 / 6.0).abs() < 1e-12);
}

#[test]
fn dense_limit_is_honored() {
    let out = run(bp()
        .env("BP_DENSE_LIMIT", "3")
        .args(["experiment", "--experiment", "gaussian", "--n", "4", "--grid", "1", "--samples", "0"]));
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    assert!(rows[0].closed.is_some());
    assert!(rows[0].exact.is_none());
}

#[test]
fn bad_configs_exit_with_code_two() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"experiment": "magic", "n": [6]}"#).unwrap();
    let out = bp().args(["experiment", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divisible by 4"));

    std::fs::write(&path, r#"{"experiment": "gaussian", "n": [2], "colour": 1}"#).unwrap();
    let out = bp().args(["experiment", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bp().args(["experiment", "--experiment", "gaussian", "--n", "3", "--samples", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bp().args(["variance", "--n", "2", "--state", "zero", "--observable", "q:1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dla_of_matchgates() {
    let doc = json(&run(bp().args(["dla", "--matchgate", "3"])));
    assert_eq!(doc["dla_dim"], 15);
    let mut sizes: Vec<u64> = doc["components"].as_array().unwrap().iter().map(|c| c["size"].as_u64().unwrap()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, [1, 1, 6, 6, 15, 15, 20]);
    assert_eq!(sizes.iter().sum::<u64>(), 64);
}

#[test]
fn dla_from_generator_file() {
    let path = scratch("gens.txt");
    std::fs::write(&path, "# single X\nX\n").unwrap();
    let doc = json(&run(bp().arg("dla").arg(&path)));
    assert_eq!(doc["dla_dim"], 1);
    assert_eq!(doc["linear_symmetries"], serde_json::json!(["I", "X"]));
    assert_eq!(doc["quadratic_count"], 6);

    std::fs::write(&path, "XX\nZQ\n").unwrap();
    let out = bp().arg("dla").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn decompose_zero_state() {
    let doc = json(&run(bp().args(["decompose", "--state", "zero", "--n", "2"])));
    let p: Vec<f64> = doc["purities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let want = [0.25, 0.0, 0.5, 0.0, 0.25];
    assert!(p.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-14), "{p:?}");
    assert!((doc["fermion"]["S2"].as_f64().unwrap()).abs() < 1e-12);
    assert!((doc["fermion"]["g_purity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn decompose_magic_state() {
    let tau = std::f64::consts::FRAC_PI_2.to_string();
    let doc = json(&run(bp().args(["decompose", "--state", &format!("magic:{tau}"), "--n", "4"])));
    let p2 = doc["purities"][2].as_f64().unwrap();
    assert!((p2 - 1.0 / 8.0).abs() < 1e-12, "{p2}");
    assert!((doc["fermion"]["g_purity"].as_f64().unwrap() - p2).abs() < 1e-12);
    assert!((doc["fermion"]["S2"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn decompose_operator() {
    let doc = json(&run(bp().args(["decompose", "--operator", "XX", "--n", "2"])));
    let p: Vec<f64> = doc["purities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    // XX = -i c2 c3 has degree 2, and Tr[XX XX] = 4.
    assert!((p[2] - 4.0).abs() < 1e-12 && (doc["total"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!(doc.get("fermion").is_none());
}

#[test]
fn variance_methods_agree() {
    let doc = json(&run(bp().args([
        "variance", "--n", "3", "--state", "superposition:0.6,0.8", "--observable", "x:2", "--method", "all", "--samples", "4000",
        "--layers", "18",
    ])));
    let exact = doc["exact"]["variance"].as_f64().unwrap();
    // 4α²β² C(2,1)/C(6,3).
    let closed = 4.0 * 0.36 * 0.64 * 2.0 / 20.0;
    assert!((exact - closed).abs() < 1e-12);
    assert!((doc["oracle"]["variance"].as_f64().unwrap() - exact).abs() < 1e-10);
    let mc = doc["mc"]["var_hat"].as_f64().unwrap();
    let se = doc["mc"]["stderr_var"].as_f64().unwrap();
    assert!((mc - exact).abs() <= 5.0 * se);
    // Neither input commutes with the parity operator, so the parity route is reported as an error.
    assert!(doc["parity"]["error"].as_str().unwrap().contains("parity"));
}

#[test]
fn selfcheck_passes() {
    let out = bp().arg("selfcheck").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 10);
}
