use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn nml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nml")).env_remove("NML_CORES").args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn advise_sort_prints_choice() {
    let o = nml(&["advise-sort", "--n", "1000", "--cores", "8", "--k", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "SS\n");
    let o = nml(&["advise-sort", "--n", "1000", "--cores", "8", "--k", "7"]);
    assert_eq!(stdout(&o), "QS\n");
}

#[test]
fn backends_print_identical_labels() {
    let (m, d) = (fixture("lr_digits.nml"), fixture("digits_test.nds"));
    let run = |backend| nml(&["infer", "--model", path(&m), "--data", path(&d), "--cores", "1", "--backend", backend]);
    let (native, emulated) = (run("native"), run("emulated"));
    assert!(native.status.success() && emulated.status.success());
    assert_eq!(native.stdout, emulated.stdout);
    let golden = std::fs::read_to_string(fixture("lr_digits.labels")).unwrap();
    assert_eq!(stdout(&native), golden);
}

#[test]
fn cores_come_from_environment() {
    let (m, d) = (fixture("gnb_digits.nml"), fixture("digits_test.nds"));
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = Command::new(env!("CARGO_BIN_EXE_nml"))
        .env("NML_CORES", "4")
        .args(["bench", "--model", path(&m), "--data", path(&d), "--report", report.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v[0]["n_cores"], 4);
}

#[test]
fn bench_report_for_knn() {
    let (m, d) = (fixture("knn_asd.nml"), fixture("asd_test.nds"));
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("knn.json");
    let o =
        nml(&["bench", "--model", path(&m), "--data", path(&d), "--cores", "8", "--report", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let r = &v[0];
    assert_eq!(r["kernel"], "knn");
    assert_eq!(r["backend"], "emulated");
    assert_eq!(r["labels_match"], true);
    let achieved = r["speedup"]["achieved"].as_f64().unwrap();
    let theoretical = r["speedup"]["theoretical"].as_f64().unwrap();
    assert!(achieved <= theoretical && theoretical <= 8.0);
    assert!(achieved >= 7.5);
    assert_eq!(r["speedup"]["per_worker_ops"].as_array().unwrap().len(), 8);
}

#[test]
fn runs_are_byte_identical() {
    let (m, d) = (fixture("kmeans_asd.nml"), fixture("asd_train.nds"));
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let report = dir.path().join(format!("{i}.json"));
            let o = nml(&[
                "infer",
                "--model",
                path(&m),
                "--data",
                path(&d),
                "--cores",
                "8",
                "--report",
                report.to_str().unwrap(),
            ]);
            assert!(o.status.success());
            let mut bytes = o.stdout;
            bytes.extend(std::fs::read(&report).unwrap());
            bytes
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn overrides_reach_the_kernel() {
    let (m, d) = (fixture("kmeans_asd.nml"), fixture("asd_train.nds"));
    let o = nml(&["infer", "--model", path(&m), "--data", path(&d), "--k", "3", "--max-iters", "2"]);
    assert!(o.status.success());
    let ids: Vec<u32> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(ids.len(), 1000);
    assert!(ids.contains(&2) && ids.iter().all(|&c| c < 3));

    let svm = nml(&[
        "infer",
        "--model",
        path(&fixture("lr_mnist.nml")),
        "--data",
        path(&fixture("mnist_test.nds")),
        "--kernel",
        "svm",
    ]);
    assert!(svm.status.success());
}

#[test]
fn usage_errors_exit_two() {
    let (m, d) = (fixture("gnb_digits.nml"), fixture("digits_test.nds"));
    for args in [
        vec!["advise-sort", "--n", "1000", "--cores", "8"],
        vec!["infer", "--model", path(&m), "--data", path(&d), "--cores", "0"],
        vec!["infer", "--model", path(&m), "--data", path(&d), "--backend", "fpu"],
        vec!["infer", "--model", path(&m), "--data", path(&d), "--k", "3"],
        vec!["infer", "--model", path(&m), "--data", path(&d), "--kernel", "rf"],
        vec!["infer", "--model", "/no/such/model.nml", "--data", path(&d)],
        vec!["frobnicate"],
    ] {
        let o = nml(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_one_and_write_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("never.json");
    let garbage = dir.path().join("garbage.nml");
    std::fs::write(&garbage, b"NML1 but not really").unwrap();
    let cases = [
        // Feature count mismatch.
        (fixture("knn_asd.nml"), fixture("digits_test.nds")),
        (garbage, fixture("digits_test.nds")),
        // Dataset where a model is expected.
        (fixture("digits_test.nds"), fixture("digits_test.nds")),
    ];
    for (m, d) in &cases {
        for cmd in ["infer", "bench"] {
            let o = nml(&[cmd, "--model", path(m), "--data", path(d), "--report", report.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(1), "{cmd} {m:?}");
            assert!(!o.stderr.is_empty());
            assert!(!report.exists());
        }
    }
    // k larger than the chunk each core holds.
    let o = nml(&[
        "bench",
        "--model",
        path(&fixture("knn_asd.nml")),
        "--data",
        path(&fixture("asd_test.nds")),
        "--k",
        "400",
        "--cores",
        "8",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!report.exists());
}

#[test]
fn conformance_smoke() {
    let o = nml(&["conformance", "--pairs", "2000", "--seed", "7"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.ends_with("PASS\n"));
    assert!(!out.contains("FAIL"));
    assert!(["add", "sub", "mul", "div", "lt", "le", "eq"].iter().all(|op| out.contains(op)));
}
