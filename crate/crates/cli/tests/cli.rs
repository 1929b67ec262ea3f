use std::fs;
use std::path::Path;

use rlasso_cli::example::{RND_CSV, RND_RESTRICTIONS};
use rlasso_cli::{load_csv, parse_csv, run, DataError};
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rlasso(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("rlasso").chain(args.iter().copied()), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn estimates(v: &Value) -> Vec<f64> {
    v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["estimate"].as_f64().unwrap())
        .collect()
}

#[test]
fn load_csv_embedded_data_with_intercept() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "rnd.csv", RND_CSV);
    let d = load_csv(Path::new(&path), "Y", true).unwrap();
    assert_eq!((d.n(), d.p()), (10, 5));
    assert_eq!(d.names()[0], "b1_intercept");

    assert!(matches!(load_csv(Path::new(&path), "Z", true), Err(DataError::MissingTarget(_))));
    let missing = dir.path().join("nope.csv");
    assert!(matches!(load_csv(&missing, "Y", true), Err(DataError::Io { .. })));
    let empty = write(dir.path(), "empty.csv", "");
    assert!(matches!(load_csv(Path::new(&empty), "Y", true), Err(DataError::EmptyFile)));
}

#[test]
fn non_numeric_cell_reports_location() {
    let err = parse_csv("Y,X1\n1,2\n3,abc\n", "Y", false).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("row 2") && msg.contains("column 2") && msg.contains("abc"), "{msg}");
}

#[test]
fn rlasso_fit_satisfies_restrictions() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "rnd.csv", RND_CSV);
    let restr = write(dir.path(), "r.txt", RND_RESTRICTIONS);
    for extra in [&["--lambda", "0.1"][..], &["--cv", "--seed", "3"][..]] {
        let mut args = vec![
            "fit", "--data", &data, "--target", "Y", "--intercept", "--method", "rlasso",
            "--restrictions", &restr, "--format", "json",
        ];
        args.extend_from_slice(extra);
        let o = rlasso(&args);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o.stdout);
        let b = estimates(&v);
        // The printed values are rounded, so check the residual field itself.
        assert!(v["restriction_residual"].as_f64().unwrap() <= 1e-8);
        assert!((b.iter().sum::<f64>() - 1.2170).abs() < 1e-4);
        assert_eq!(v["method"], "Res-LASSO");
    }
}

#[test]
fn ols_ignores_restrictions_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "rnd.csv", RND_CSV);
    let restr = write(dir.path(), "r.txt", RND_RESTRICTIONS);
    let with = rlasso(&[
        "fit", "--data", &data, "--target", "Y", "--intercept", "--method", "ols", "--restrictions",
        &restr,
    ]);
    assert_eq!(with.code, 0);
    assert!(with.stderr.contains("warning") && with.stderr.contains("ignored"));
    let without = rlasso(&["fit", "--data", &data, "--target", "Y", "--intercept", "--method", "ols"]);
    assert_eq!(with.stdout, without.stdout);
    assert!(without.stderr.is_empty());
}

#[test]
fn lasso_at_zero_lambda_equals_ols() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "rnd.csv", RND_CSV);
    let base = ["fit", "--data", data.as_str(), "--target", "Y", "--intercept", "--format", "json"];
    let ols = rlasso(&[&base[..], &["--method", "ols"]].concat());
    let lasso = rlasso(&[&base[..], &["--method", "lasso", "--lambda", "0"]].concat());
    assert_eq!(ols.code, 0);
    assert_eq!(lasso.code, 0);
    let a = estimates(&json(&ols.stdout));
    let b = estimates(&json(&lasso.stdout));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "rnd.csv", RND_CSV);
    let restr = write(dir.path(), "r.txt", RND_RESTRICTIONS);

    // Missing restrictions for a restricted method.
    let o = rlasso(&["fit", "--data", &data, "--target", "Y", "--intercept", "--method", "rols"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("arguments"));

    // --lambda and --cv together.
    let o = rlasso(&[
        "fit", "--data", &data, "--target", "Y", "--method", "lasso", "--lambda", "1", "--cv",
    ]);
    assert_eq!(o.code, 2);

    // Unknown target column.
    let o = rlasso(&["fit", "--data", &data, "--target", "Q", "--method", "ols"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("load data"));

    // Restrictions referring to b5 without the intercept column (p = 4).
    let o = rlasso(&[
        "fit", "--data", &data, "--target", "Y", "--method", "rols", "--restrictions", &restr,
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("parse restrictions"));

    // Two identical columns: not identifiable.
    let dup = write(dir.path(), "dup.csv", "y,a,b\n1,1,1\n2,2,2\n3,3,3.0\n5,4,4\n");
    let o = rlasso(&["fit", "--data", &dup, "--target", "y", "--method", "ols"]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    assert!(o.stderr.contains("fit"));

    let o = rlasso(&["simulate", "--scenario", "cauchy", "--n", "50", "--reps", "1"]);
    assert_eq!(o.code, 2);
}

#[test]
fn cv_command_reports_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "rnd.csv", RND_CSV);
    let restr = write(dir.path(), "r.txt", RND_RESTRICTIONS);
    let o = rlasso(&[
        "cv", "--data", &data, "--target", "Y", "--intercept", "--no-penalize-intercept",
        "--method", "rlasso", "--restrictions", &restr, "--grid-points", "12", "--format", "json",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = json(&o.stdout);
    let curve = v["curve"].as_array().unwrap();
    assert_eq!(curve.len(), 12);
    assert_eq!(curve.iter().filter(|c| c["chosen"] == true).count(), 1);
    assert!(curve.iter().all(|c| c["mean_error"].as_f64().unwrap() >= 0.0));
}

#[test]
fn simulate_single_replication_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("est.csv");
    let o = rlasso(&[
        "simulate", "--scenario", "t3", "--n", "40,60", "--reps", "1", "--seed", "5", "--format",
        "csv", "--dump-estimates", dump.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let mut reader = csv::Reader::from_reader(o.stdout.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let rate: f64 = r[2].parse().unwrap();
        assert!(rate == 0.0 || rate == 1.0);
        assert_eq!(r[5], r[6], "mean and median MSE differ for one replication");
    }
    let dumped = fs::read_to_string(&dump).unwrap();
    let mut lines = dumped.lines();
    assert_eq!(lines.next().unwrap(), "n,rep,method,lambda,b1,b2,b3,b4,b5,b6,error");
    assert_eq!(lines.count(), 8);
}

#[test]
fn csv_round_trip_to_printed_precision() {
    let o = rlasso(&["simulate", "--scenario", "normal", "--n", "30", "--reps", "3", "--format", "csv"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let j = rlasso(&["simulate", "--scenario", "normal", "--n", "30", "--reps", "3", "--format", "json"]);
    let rows = json(&j.stdout);
    // Reload the emitted CSV as a data set keyed on one numeric column.
    let numeric: String = o
        .stdout
        .lines()
        .map(|l| l.split(',').skip(1).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n");
    let d = parse_csv(&numeric, "mean_mse", false).unwrap();
    for (i, row) in rows.as_array().unwrap().iter().enumerate() {
        assert_eq!(d.y()[i], row["mean_mse"].as_f64().unwrap());
        assert_eq!(d.x()[(i, 1)], row["correctly_fitted_rate"].as_f64().unwrap());
    }
}

#[test]
fn example_report_layout() {
    let o = rlasso(&["example"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("Selected variables"));
    for label in ["OLS", "Res-OLS", "LASSO", "Res-LASSO"] {
        let line = o
            .stdout
            .lines()
            .find(|l| l.split_whitespace().next() == Some(label))
            .unwrap_or_else(|| panic!("no row for {label}"));
        let sel = line.split_whitespace().nth(1).unwrap();
        assert!(sel.starts_with('(') && sel.ends_with(')'), "{line}");
    }
    assert!(o.stdout.contains("prior beta0"));
    let again = rlasso(&["example"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn help_exits_zero() {
    let o = rlasso(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("simulate"));
}
