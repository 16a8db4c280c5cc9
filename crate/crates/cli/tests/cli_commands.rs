mod support;

use depcov::embed::BasisModel;
use serde_json::Value;
use support::*;

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn compute_two_point_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.csv", "x1,y1\n0,0\n1,2\n");
    let v = json(&["compute", "--paired", &p]);
    assert_schema("compute", &v);
    assert_eq!(num(&v, "v_xy"), 0.5);
    assert_eq!(num(&v, "r"), 1.0);
    assert_eq!(
        (v["n"].as_u64(), v["p"].as_u64(), v["q"].as_u64()),
        (Some(2), Some(1), Some(1))
    );
    assert!(v["seed"].is_null());
    assert_eq!(v["config"]["input"]["layout"], "vectors");
}

#[test]
fn constant_column_has_zero_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.csv", "3\n3\n3\n3\n");
    let y = write(dir.path(), "y.csv", "1\n4\n2\n8\n");
    let v = json(&["compute", "--x", &x, "--y", &y]);
    assert_eq!(num(&v, "r"), 0.0);
    assert_eq!(num(&v, "v_xy"), 0.0);
}

#[test]
fn csv_report_has_header_and_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.csv", "x1,y1\n0,0\n1,2\n");
    let out = String::from_utf8(run_ok(&["compute", "--paired", &p, "--format", "csv"])).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,p,q,t1,t2,t3,v_xy,v_xx,v_yy,r");
    assert_eq!(lines[1], "2,1,1,1.0,0.5,0.5,0.5,0.25,1.0,1.0");
    assert_eq!(lines.len(), 2);
}

#[test]
fn weighted_norms_from_list_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.csv", "x1,x2,y1\n0,0,0\n1,1,2\n2,0,1\n");
    let m = write(dir.path(), "a.csv", "2,0.5\n0.5,1\n");
    let v = json(&["compute", "--paired", &p, "--norm-x", &m, "--norm-y", "diag:4"]);
    assert_schema("compute", &v);
    assert_eq!(v["norm_specs"]["x"]["kind"], "weighted");
    assert_eq!(v["norm_specs"]["y"]["weight"][0][0], 4.0);
    let bad = write(dir.path(), "bad.csv", "1,2\n2,1\n");
    assert_eq!(code(&["compute", "--paired", &p, "--norm-x", &bad]), 6);
    assert_eq!(code(&["compute", "--paired", &p, "--norm-x", "diag:1,1,1"]), 4);
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = write(dir.path(), "r.csv", "x1,y1\n1,2\n3\n");
    let out = run(&["compute", "--paired", &ragged]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));

    let a = write(dir.path(), "a.csv", "1\n2\n");
    let b = write(dir.path(), "b.csv", "1\n2\n3\n");
    assert_eq!(code(&["compute", "--x", &a, "--y", &b]), 4);
    assert_eq!(code(&["compute", "--x", "/nonexistent/x.csv", "--y", &a]), 7);
    assert_eq!(
        code(&["test", "--x", "/nonexistent/x.csv", "--y", &a, "--seed", "1"]),
        7
    );
    assert_eq!(
        code(&["oracle", "--joint", data("bad_probs.json").to_str().unwrap()]),
        5
    );
    assert_eq!(
        code(&["test", "--x", &a, "--y", &a, "--alpha", "1.5", "--seed", "1"]),
        6
    );
    assert_eq!(code(&["compute"]), 2);
    assert_eq!(code(&["--threads", "0", "compute", "--x", &a, "--y", &a]), 6);
    let out = tempfile::tempdir().unwrap();
    let unwritable = out.path().join("missing/dir/out.json");
    assert_eq!(
        code(&["compute", "--x", &a, "--y", &a, "--out", unwritable.to_str().unwrap()]),
        7
    );
}

#[test]
fn one_replicate_p_values() {
    let demo = data("demo_paired.csv");
    for seed in 0..20 {
        let v = json(&[
            "test",
            "--paired",
            demo.to_str().unwrap(),
            "--B",
            "1",
            "--seed",
            &seed.to_string(),
        ]);
        let p = num(&v, "p_value");
        assert!(p == 0.5 || p == 1.0, "p = {p}");
    }
}

#[test]
fn test_exits_zero_either_way() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.csv", "1\n2\n3\n4\n5\n6\n");
    let y = write(dir.path(), "y.csv", "3\n1\n6\n2\n5\n4\n");
    let v = json(&["test", "--x", &x, "--y", &y, "--B", "99", "--seed", "7"]);
    assert_schema("test", &v);
    assert_eq!(v["reject"], false);
    let v = json(&[
        "test",
        "--x",
        &x,
        "--y",
        &x,
        "--B",
        "999",
        "--seed",
        "7",
        "--statistic",
        "r_n",
    ]);
    assert_schema("test", &v);
    assert_eq!(v["reject"], true);
    assert_eq!(v["statistic_kind"], "r_n");
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn missing_seed_is_drawn_and_recorded() {
    let demo = data("demo_paired.csv");
    let out = run(&["test", "--paired", demo.to_str().unwrap(), "--B", "9"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let seed = v["seed"].as_u64().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains(&seed.to_string()));
}

/// The golden file is produced by the binary itself; set DEPCOV_BLESS=1 to
/// regenerate it after an intended output change.
#[test]
fn golden_demo_report() {
    let args = [
        "test",
        "--paired",
        "tests/data/demo_paired.csv",
        "--B",
        "199",
        "--seed",
        "42",
    ];
    let golden = data("demo_test_seed42.golden.json");
    let actual = run_ok(&args);
    if std::env::var_os("DEPCOV_BLESS").is_some() {
        std::fs::write(&golden, &actual).unwrap();
    }
    let expected = std::fs::read(&golden).unwrap();
    assert!(actual == expected, "report differs from {}", golden.display());
    assert_schema("test", &serde_json::from_slice(&actual).unwrap());
}

#[test]
fn oracle_reference_joints() {
    let v = json(&["oracle", "--joint", data("coin_equal.json").to_str().unwrap()]);
    assert_schema("oracle", &v);
    assert_eq!(num(&v, "v0"), 0.25);
    assert!(num(&v, "brownian_delta") <= 1e-10);
    assert!(num(&v["cf"], "relative_delta") <= 0.01);

    let v = json(&["oracle", "--joint", data("coin_independent.json").to_str().unwrap()]);
    assert_schema("oracle", &v);
    assert_eq!(num(&v, "v0"), 0.0);
    assert_eq!(num(&v, "r0"), 0.0);
}

#[test]
fn oracle_multivariate_skips_cf() {
    let dir = tempfile::tempdir().unwrap();
    let j = write(
        dir.path(),
        "j.json",
        r#"{"atoms": [{"x": [0, 1], "y": [0], "p": 0.5}, {"x": [1, 0], "y": [2], "p": 0.5}]}"#,
    );
    let v = json(&["oracle", "--joint", &j, "--norm-x", "diag:1,3"]);
    assert_schema("oracle", &v);
    assert!(v["cf"].is_null());
    assert!(num(&v, "brownian_delta") <= 1e-10);
}

#[test]
fn simulate_first_eigenfunction_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let out = out.to_str().unwrap();
    run_ok(&[
        "simulate",
        "--out",
        out,
        "--lambdas",
        "1,0,0",
        "--z",
        "rademacher",
        "--n",
        "4",
        "--grid",
        "64",
        "--seed",
        "3",
    ]);
    let phi1 = BasisModel::fourier(64, vec![1.0, 0.0, 0.0])
        .unwrap()
        .reconstruct(&[1.0]);
    let text = std::fs::read_to_string(format!("{out}/x.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let sign = row[0].signum() * phi1[0].signum();
        for (a, b) in row.iter().zip(&phi1) {
            assert!((a - sign * b).abs() <= 1e-12, "{a} vs {}", sign * b);
        }
    }
}

#[test]
fn simulate_manifest_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    run_ok(&[
        "simulate",
        "--out",
        first.to_str().unwrap(),
        "--n",
        "12",
        "--grid",
        "128",
        "--seed",
        "11",
        "--shared",
        "2",
    ]);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(first.join("manifest.json")).unwrap()).unwrap();
    assert_schema("simulate", &manifest);
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["basis_id"], "fourier");
    assert_eq!(manifest["grid_size"], 128);
    assert_eq!(manifest["lambdas"].as_array().unwrap().len(), 20);
    run_ok(&[
        "simulate",
        "--out",
        second.to_str().unwrap(),
        "--from-manifest",
        first.join("manifest.json").to_str().unwrap(),
    ]);
    for f in ["x.csv", "y.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(first.join(f)).unwrap(),
            std::fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn simulated_data_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for layout in ["functional", "ell2"] {
        let out = dir.path().join(layout);
        let o = out.to_str().unwrap();
        run_ok(&[
            "simulate", "--out", o, "--n", "25", "--grid", "64", "--seed", "5", "--shared", "20", "--layout", layout,
        ]);
        let (x, y) = (format!("{o}/x.csv"), format!("{o}/y.csv"));
        let v = json(&["compute", "--x", &x, "--y", &y, "--layout", layout, "--trunc", "6"]);
        assert_schema("compute", &v);
        assert_eq!(v["p"], 6);
        assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());
        assert!((num(&v, "r") - 1.0).abs() <= 1e-12, "identical margins give r = 1");
        let t = json(&[
            "test", "--x", &x, "--y", &y, "--layout", layout, "--trunc", "6", "--B", "99", "--seed", "1",
        ]);
        assert_schema("test", &t);
        assert_eq!(t["reject"], true);
    }
}

#[test]
fn power_reports() {
    let v = json(&[
        "power",
        "--scenario",
        "null",
        "--dim",
        "2",
        "--n",
        "30",
        "--B",
        "99",
        "--replications",
        "60",
        "--seed",
        "9",
    ]);
    assert_schema("power", &v);
    let r = &v["results"][0];
    assert!(num(r, "ci_lower") <= 0.05 && 0.05 <= num(r, "ci_upper"), "{r}");

    let v = json(&[
        "power",
        "--scenario",
        "identity",
        "--n",
        "30",
        "--B",
        "99",
        "--replications",
        "20",
        "--seed",
        "9",
        "--norm-x",
        "euclidean",
        "--norm-x",
        "diag:5",
    ]);
    assert_schema("power", &v);
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(num(r, "rate"), 1.0);
    }

    let v = json(&[
        "power",
        "--scenario",
        "functional",
        "--grid",
        "64",
        "--lambdas",
        "geometric:0.5:8",
        "--trunc",
        "4",
        "--n",
        "20",
        "--B",
        "19",
        "--replications",
        "2",
        "--seed",
        "1",
        "--first-weights",
        "0.5,2",
    ]);
    assert_schema("power", &v);
    assert_eq!(v["scenario"]["dim_x"], 4);

    assert_eq!(code(&["power", "--alpha", "0", "--seed", "1"]), 6);
    assert_eq!(code(&["power", "--alpha", "1", "--seed", "1"]), 6);
}
