use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_bigint::BigInt;
use signeq::characters::principal;
use signeq::cyclotomic::Cyclotomic;
use signeq::halfint::HalfIntegralForm;
use signeq::shimura::{delta_lifted, delta_preimage_squares};
use signeq::Execution;

fn signeq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signeq")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// The preimage of Δ as a form file, with `a(n²)` negated for `n = 3m`,
/// `m > 1`, when `break_multiplicativity` is set.
fn write_form(path: &Path, top: usize, break_multiplicativity: bool) {
    let tau = delta_lifted(top, Execution::Sequential);
    let a_sq = delta_preimage_squares(tau.coeffs(), top, Execution::Sequential).unwrap();
    let values: Vec<Cyclotomic> = a_sq
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let v: BigInt = if break_multiplicativity && n % 3 == 0 && n > 3 { -v } else { v.clone() };
            Cyclotomic::integer(1, v)
        })
        .collect();
    let form = HalfIntegralForm::from_square_class(4, 6, principal(4).unwrap(), 1, &values).unwrap();
    fs::write(path, form.to_text()).unwrap();
}

#[test]
fn gen_builds_verifies_and_extends() {
    let dir = tempfile::tempdir().unwrap();
    let o = signeq(dir.path(), &["gen", "--form", "delta-preimage", "--T", "2000", "--cache", "c"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("cache built"));
    let text = fs::read_to_string(dir.path().join("c/delta__-.series")).unwrap();
    let body: Vec<&str> = text.split("---\n").nth(1).unwrap().lines().collect();
    assert_eq!(&body[..4], &["0", "1", "-24", "252"]);

    let o = signeq(dir.path(), &["gen", "--T", "2000", "--cache", "c"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("cache valid"));
    let o = signeq(dir.path(), &["gen", "--T", "3000", "--cache", "c"]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("cache extended"));

    let o = signeq(dir.path(), &["density", "--xmax", "5000", "--cache", "c"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("signeq gen"));
    let o = signeq(dir.path(), &["density", "--xmax", "3000", "--cache", "c", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let o = signeq(dir.path(), &["density", "--xmax", "3000", "--cache", "missing"]);
    assert_eq!(code(&o), 4);
    assert_eq!(code(&signeq(dir.path(), &["gen", "--T", "2000"])), 2);
}

#[test]
fn density_report_has_one_row_per_class() {
    let dir = tempfile::tempdir().unwrap();
    let o = signeq(dir.path(), &["density", "--q", "5", "--xmax", "100000", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&dir.path().join("o/density.csv"));
    assert_eq!(rows.len(), 4);
    for (row, d) in rows.iter().zip(1..) {
        assert_eq!(row[1], d.to_string());
        let ratio: f64 = row[7].parse().unwrap();
        assert!((0.45..=0.55).contains(&ratio));
    }
    let text = fs::read_to_string(dir.path().join("o/density.csv")).unwrap();
    let meta: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    assert!(meta[0].starts_with("# signeq "));
    assert!(meta[1].starts_with("# config-sha256 "));
    assert!(meta[2].contains("\"xmax\":100000"));
    let delange = data_rows(&dir.path().join("o/density_delange.csv"));
    assert!(delange.iter().filter(|r| r[1] == "100000").all(|r| r[2].parse::<f64>().unwrap() <= 0.05));
}

#[test]
fn satotate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = signeq(dir.path(), &["satotate", "--q", "4", "--d", "1", "--xmax", "100000", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stats = data_rows(&dir.path().join("o/satotate_stats.csv"));
    assert_eq!(stats.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), vec!["all", "1mod4"]);
    assert!(stats[1][4].parse::<f64>().unwrap() <= 0.05);
    assert_eq!(data_rows(&dir.path().join("o/satotate_hist.csv")).len(), 40);

    let o = signeq(dir.path(), &["fit", "--q", "4", "--d", "1", "--xmax", "100000", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/fit.json")).unwrap()).unwrap();
    let first = &fit["fits"][0];
    for key in ["C", "alpha", "residual"] {
        assert!(first[key].is_number(), "{fit}");
    }
    assert_eq!(fit["config"]["q"], 4);

    let o = signeq(dir.path(), &["fit", "--out", "elsewhere"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--xmax", "20000", "--q", "5"];
    let run = |out: &str, extra: &[&str]| {
        let mut args = vec!["report", "--out", out];
        args.extend_from_slice(&common);
        args.extend_from_slice(extra);
        let o = signeq(dir.path(), &args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a", &[]);
    run("b", &[]);
    run("c", &["--sequential"]);
    let names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.len() >= 12);
    for name in names {
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(&name)).unwrap(), "{name:?}");
        assert_eq!(a, fs::read(dir.path().join("c").join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), "q = 7\nxmax = 5000\ndelta-grid = [0.2, 0.1]\nout = \"from-file\"\n").unwrap();
    let o = signeq(dir.path(), &["density", "--config", "exp.toml", "--xmax", "3000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&dir.path().join("from-file/density.csv"));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[0] == "7" && r[2] == "3000"));

    fs::write(dir.path().join("bad.toml"), "q = 7\nbogus = 1\n").unwrap();
    assert_eq!(code(&signeq(dir.path(), &["density", "--config", "bad.toml"])), 2);
    assert_eq!(code(&signeq(dir.path(), &["density", "--q", "6", "--d", "2"])), 2);
    assert_eq!(code(&signeq(dir.path(), &["density", "--xmax", "10"])), 2);
    assert_eq!(code(&signeq(dir.path(), &["density", "--delta-grid", "0.01,0.1"])), 2);
    assert_eq!(code(&signeq(dir.path(), &["density", "--t", "3"])), 2);
    assert_eq!(code(&signeq(dir.path(), &["density", "--form", "no-such-file"])), 2);
}

#[test]
fn form_files_and_assertion_failures() {
    let dir = tempfile::tempdir().unwrap();
    write_form(&dir.path().join("good.form"), 1000, false);
    for cmd in ["signs", "density"] {
        let o = signeq(dir.path(), &[cmd, "--form", "good.form", "--xmax", "1000", "--out", "g"]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let from_file = data_rows(&dir.path().join("g/density.csv"));
    let o = signeq(dir.path(), &["density", "--xmax", "1000", "--out", "p"]);
    assert_eq!(code(&o), 0);
    assert_eq!(from_file, data_rows(&dir.path().join("p/density.csv")));
    assert_eq!(code(&signeq(dir.path(), &["density", "--form", "good.form", "--xmax", "2000"])), 2);

    write_form(&dir.path().join("bad.form"), 1000, true);
    let o = signeq(dir.path(), &["density", "--form", "bad.form", "--xmax", "1000", "--out", "b"]);
    assert_eq!(code(&o), 3);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b/failure.json")).unwrap()).unwrap();
    assert_eq!(record["assertion"], "multiplicativity");
    assert_eq!(record["status"], "assertion-failure");
}
