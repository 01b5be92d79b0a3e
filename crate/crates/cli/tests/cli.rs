use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_littlewood"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn count_census() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["count", "+--+"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(
        (v["distinct"].as_u64(), v["mult"].as_u64()),
        (Some(2), Some(3))
    );
    assert_eq!((v["z1"].as_u64(), v["zm1"].as_u64()), (Some(2), Some(1)));
    let leading_minus = run(dir.path(), &["count", "-++-"]);
    assert_eq!(json(&leading_minus)["mult"].as_u64(), Some(3));
}

#[test]
fn family_g_zero_has_two_roots() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["families", "g", "--index", "0", "--count-roots"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["roots"].as_u64(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(
        run(dir.path(), &["count", "+--+", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(dir.path(), &["structure", "++++"]).status.code(),
        Some(2)
    );
}

#[test]
fn domain_errors_exit_1_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["count", "++-"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"], "NotReciprocal");

    let coeffs = dir.path().join("neg.json");
    std::fs::write(&coeffs, "[1.0, -2.0]").unwrap();
    let o = run(
        dir.path(),
        &["factor", "--coeffs", coeffs.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"], "NotNonnegative");

    let o = run(dir.path(), &["probe-kappa", "--k", "4", "--M", "8"]);
    assert_eq!(json(&o)["error"], "BudgetExceeded");
}

#[test]
fn oddcase_identity_keeps_integers_as_strings() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "oddcase", "identity", "--D", "4", "--eps", "0,1,0,-1", "--terms", "5:1",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["groups"][0]["lhs"], "192");
    assert_eq!(v["groups"][0]["rhs"], "192");
}

#[test]
fn oddcase_kappa_from_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("k.json");
    std::fs::write(
        &spec,
        r#"{"eps":[0,1,0,-1],"s1":[[5,1]],"region":{"around":{"c":0.5}},"resolution":4096}"#,
    )
    .unwrap();
    let o = run(
        dir.path(),
        &["oddcase", "kappa", "--spec", spec.to_str().unwrap()],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(json(&o)["selection"]["r"].is_u64());
}

#[test]
fn factor_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("w.json");
    std::fs::write(&coeffs, "[5.0, 2.0]").unwrap();
    let o = run(
        dir.path(),
        &["factor", "--coeffs", coeffs.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["round_trip_error"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn manifest_checksums_match_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["table", "--to", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let m: Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("table_mult.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["subcommand"], "table");
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    for f in outputs {
        let bytes = std::fs::read(f["path"].as_str().unwrap()).unwrap();
        assert_eq!(
            f["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
    }
    assert!(dir.path().join("zl_mult.csv").exists());
    assert!(!std::fs::read_dir(dir.path()).unwrap().any(|e| e
        .unwrap()
        .path()
        .extension()
        .is_some_and(|x| x == "tmp")));
}

#[test]
fn reproducible_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            run(
                d.path(),
                &["probe-kappa", "--k", "2", "--M", "6", "--res", "512"]
            )
            .status
            .code(),
            Some(0)
        );
        assert_eq!(
            run(
                d.path(),
                &["avg", "--degree", "12", "--sample", "50", "--seed", "9"]
            )
            .status
            .code(),
            Some(0)
        );
        assert_eq!(
            run(d.path(), &["search", "--degree", "5"]).status.code(),
            Some(0)
        );
    }
    for f in ["probe_kappa.json", "avg.json", "search.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn csv_output_is_quoted() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["search", "--degree", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let i = headers.iter().position(|h| h == "minimum").unwrap();
    assert_eq!(&row[i], "2");
    let j = headers.iter().position(|h| h == "histogram").unwrap();
    assert!(serde_json::from_str::<Value>(&row[j]).is_ok());
}

#[test]
fn structure_reports_exact_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["structure", "+-+-+-+-+", "--period", "2", "--aligned"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["geometric"]["exact"], true);
    assert_eq!(v["corollary"]["exact"], true);
    let o = run(dir.path(), &["structure", "+-+-+-+-+", "--scan", "4"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 4);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["selftest", "--seed", "1"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr)
        .lines()
        .all(|l| l.starts_with("PASS")));
}
