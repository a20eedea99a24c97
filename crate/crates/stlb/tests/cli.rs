use std::path::Path;
use std::process::{Command, Output};

fn stlb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stlb")).args(args).env_remove("STLB_PRECISION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn classify_periodic_preset() {
    let o = stlb(&["classify", "--bc", "periodic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["case"], "Case1");
    assert_eq!(v["regular_not_strongly"], true);
    assert_eq!(v["theorem1_family"], false);
}

#[test]
fn classify_theorem1_preset() {
    let v = json(&stlb(&["classify", "--bc", "theorem1:b0=1"]));
    assert_eq!(v["theorem1_family"], true);
    assert_eq!(v["canonical"]["kind"], "theorem1");
}

#[test]
fn rank_one_matrix_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("rank1.json");
    std::fs::write(&f, r#"{"rows": [[1, 2, 0, 1], [2, 4, 0, 2]]}"#).unwrap();
    let o = stlb(&["classify", "--bc", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("linearly dependent"));
}

#[test]
fn free_periodic_spectrum_has_double_clusters() {
    let o = stlb(&["spectrum", "--zero", "--bc", "periodic", "--nmax", "3"]);
    assert!(o.status.success());
    let pts = lines(&o);
    for n in 1..=3u64 {
        let c: Vec<_> = pts.iter().filter(|p| p["cluster"] == n).collect();
        let mult: u64 = c.iter().map(|p| p["multiplicity"].as_u64().unwrap()).sum();
        assert_eq!(mult, 2, "cluster {n}");
    }
}

#[test]
fn mathieu_spectrum_matches_fixture() {
    let fixture: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mathieu1_periodic.json"))
            .unwrap(),
    )
    .unwrap();
    let want: Vec<f64> = fixture["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let o = stlb(&["spectrum", "--mathieu", "1", "--bc", "periodic", "--nmax", "8"]);
    assert!(o.status.success());
    let mut got = Vec::new();
    for p in lines(&o) {
        let re = p["lambda"][0].as_f64().unwrap();
        for _ in 0..p["multiplicity"].as_u64().unwrap() {
            got.push(re);
        }
    }
    got.sort_by(f64::total_cmp);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-6 * w.abs().max(1.0), "{g} vs {w}");
    }
}

#[test]
fn bad_potential_file_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    std::fs::write(&q, "{\n  \"terms\": [\n    {\"re\": 1.0, \"k\": \"one\"}\n  ]\n}\n").unwrap();
    let out = dir.path().join("spectrum.jsonl");
    let o =
        stlb(&["spectrum", "--potential", q.to_str().unwrap(), "--bc", "periodic", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn output_does_not_depend_on_jobs() {
    let run =
        |j: &str| stlb(&["--jobs", j, "spectrum", "--mathieu", "1", "--bc", "theorem1:b0=-2", "--nmax", "12"]).stdout;
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
    let csv = |j: &str| stlb(&["--jobs", j, "asymptotics", "--mathieu", "1", "--kmin", "10", "--kmax", "20"]).stdout;
    assert_eq!(csv("1"), csv("3"));
}

#[test]
fn output_file_is_written_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gaps.csv");
    let o = stlb(&[
        "gaps",
        "--two-term",
        "0.5,1",
        "--nmax",
        "7",
        "--precision",
        "extended",
        "--out",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    for col in ["measured", "predicted", "ratio"] {
        assert!(header.iter().any(|h| h == col), "{header:?}");
    }
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    let ratio_col = header.iter().position(|h| h == "ratio").unwrap();
    // rows are n = 1..=7; even n has a vanishing prediction at t = 1
    for i in [1, 3, 5] {
        assert_eq!(&rows[i][ratio_col], "");
    }
    for i in [2, 4, 6] {
        let r: f64 = rows[i][ratio_col].parse().unwrap();
        assert!((r - 1.0).abs() < 0.3, "gamma_{} ratio {r}", i + 1);
    }
}

#[test]
fn precision_environment_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_stlb"))
        .args(["gaps", "--mathieu", "1", "--nmax", "2"])
        .env("STLB_PRECISION", "quad")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("STLB_PRECISION"));
    let o = Command::new(env!("CARGO_BIN_EXE_stlb"))
        .args(["gaps", "--mathieu", "1", "--nmax", "2", "--out", "json"])
        .env("STLB_PRECISION", "extended")
        .output()
        .unwrap();
    assert_eq!(json(&o)["precision"], "extended");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"potential": {"terms": [{"re": 19.739208802178716, "k": 1}]}, "bc": "periodic", "nmax": 2}"#,
    )
    .unwrap();
    let o = stlb(&["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = &lines(&o)[0];
    assert!((first["lambda"][0].as_f64().unwrap() + 4.492037970204409).abs() < 1e-6);

    std::fs::write(&cfg, r#"{"solver": {"rtol": -1}}"#).unwrap();
    assert_eq!(
        stlb(&["--config", cfg.to_str().unwrap(), "spectrum", "--zero", "--bc", "periodic"]).status.code(),
        Some(2)
    );
    std::fs::write(&cfg, r#"{"sovler": {}}"#).unwrap();
    assert_eq!(stlb(&["--config", cfg.to_str().unwrap(), "classify", "--bc", "periodic"]).status.code(), Some(2));
}

#[test]
fn unresolved_cluster_exits_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"solver": {"max_newton": 1}}"#).unwrap();
    let o = stlb(&[
        "--config",
        cfg.to_str().unwrap(),
        "spectrum",
        "--mathieu",
        "1",
        "--bc",
        "type-star:a,d0=2",
        "--nmax",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("certification summary"));
}

#[test]
fn basis_check_type_star_mathieu() {
    let o = stlb(&["basis-check", "--mathieu", "1", "--bc", "type-star:a,d0=2", "--nmax", "16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["verdict"], "not_basis_thm2_simple");
}

#[test]
fn asymptotics_trends_pass() {
    let o = stlb(&["asymptotics", "--mathieu", "1", "--out", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    for t in v["trends"].as_array().unwrap() {
        assert_eq!(t[1]["pass"], true, "{t}");
    }
    assert_eq!(v["rows"].as_array().unwrap().len(), 41);
}

#[test]
fn coincidence_report() {
    let o = stlb(&["coincide", "--mathieu", "1", "--family", "1", "--b", "2", "--nmax", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["coincide"], true);
    assert_eq!(v["reference"], "periodic");
    assert_eq!(stlb(&["coincide", "--zero", "--family", "3", "--b", "-1"]).status.code(), Some(2));
    assert_eq!(stlb(&["coincide", "--zero", "--family", "5", "--b", "2"]).status.code(), Some(2));
}

#[test]
fn fundsol_reports_wronskian_drift() {
    let o = stlb(&["fundsol", "--two-term", "1,1", "--mu", "10", "--mu", "50+0.5i", "--mu", "314.1592653589793"]);
    assert!(o.status.success());
    let rows = lines(&o);
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["wronskian_drift"].as_f64().unwrap() < 1e-7);
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert!(stlb(&["--help"]).status.success());
    assert!(stlb(&["--version"]).status.success());
    assert_eq!(stlb(&["spectrum", "--nmax", "x"]).status.code(), Some(2));
}
