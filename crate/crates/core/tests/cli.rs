use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use retscale::io::read_volatility_csv;
use retscale::synthetic::{clustered_volatility, long_memory_gaussian, prices_to_csv, synthetic_prices, PriceModel};

fn retscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retscale")).args(args).env("RETSCALE_THREADS", "2").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_prices(dir: &Path, id: &str, model: &PriceModel) {
    fs::write(dir.join(format!("{id}.csv")), prices_to_csv(&synthetic_prices(id, model))).unwrap();
}

/// Writes `day,minute,v` rows for a bare value series.
fn write_values(file: &Path, v: &[f64]) {
    let mut s = String::from("day,minute,v\n");
    for (i, x) in v.iter().enumerate() {
        s.push_str(&format!("{},{},{x}\n", i / 390, i % 390));
    }
    fs::write(file, s).unwrap();
}

fn alpha_table(file: &Path) -> Vec<(f64, f64, f64)> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("m,"))
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(3).map(|x| x.parse().unwrap()).collect();
            (f[0], f[1], f[2])
        })
        .collect()
}

#[test]
fn volatility_writes_series_profile_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    write_prices(&input, "AAA", &PriceModel { n_days: 3, ..Default::default() });
    let out = tmp.path().join("out");
    let res = retscale(&["volatility", "--input", path(&input), "--out", path(&out), "--seed", "5"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let series = fs::read_to_string(out.join("AAA.volatility.csv")).unwrap();
    assert!(series.starts_with("# retscale "));
    assert!(series.contains("# config_hash ") && series.contains("# seed 5"));
    assert_eq!(read_volatility_csv(series.as_bytes()).unwrap().len(), 3 * 390);
    assert!(out.join("AAA.profile.csv").exists());
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 5") && manifest.contains("AAA.profile.csv"));
}

#[test]
fn empty_input_directory_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let res = retscale(&["volatility", "--input", path(tmp.path()), "--out", path(&tmp.path().join("o"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no instruments found"));
}

#[test]
fn bad_price_file_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("BAD.csv");
    fs::write(&f, "date,minute,price\n2001-01-02,0,10\n2001-01-02,1,-3\n").unwrap();
    let res = retscale(&["volatility", "--input", path(&f), "--out", path(&tmp.path().join("o"))]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("BAD.csv") && err.contains("line 3"), "{err}");
}

#[test]
fn invalid_plan_and_range_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("plan.json");
    fs::write(&cfg, r#"{"simulation": {"finite_size": {"gamma": 0.3, "sizes": [20000], "n_realizations": 2, "m_values": []}}}"#).unwrap();
    let res = retscale(&["simulate", "--config", path(&cfg), "--out", path(&tmp.path().join("o"))]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("simulation.finite_size.m_values"));

    let res = retscale(&["analyze", "--range", "100:10", "--input", path(tmp.path())]);
    assert_eq!(res.status.code(), Some(1));
    let res = retscale(&["simulate", "--range", "abc"]);
    assert_eq!(res.status.code(), Some(1));
    assert_eq!(retscale(&["--help"]).status.code(), Some(0));
}

#[test]
fn explicit_default_range_matches_default_output() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("X.volatility.csv");
    write_values(&f, &clustered_volatility(60_000, 0.8, 0.4, 3));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(retscale(&["analyze", "--input", path(&f), "--out", path(&a)]).status.success());
    assert!(retscale(&["analyze", "--input", path(&f), "--out", path(&b), "--range", "10:100"]).status.success());
    for name in ["X.alpha.csv", "X.moments.csv", "X.sweep.csv", "ensemble_alpha.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn short_instrument_is_skipped_not_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    write_values(&tmp.path().join("LONG.volatility.csv"), &clustered_volatility(60_000, 0.8, 0.4, 4));
    write_values(&tmp.path().join("TINY.volatility.csv"), &clustered_volatility(300, 0.8, 0.4, 4));
    let out = tmp.path().join("out");
    let res = retscale(&["analyze", "--input", path(tmp.path()), "--out", path(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("LONG.alpha.csv").exists());
    assert!(!out.join("TINY.alpha.csv").exists());
    assert!(fs::read_to_string(out.join("skipped.csv")).unwrap().contains("TINY,"));
}

#[test]
fn surrogate_alpha_differs_on_nonlinear_data() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("NL.volatility.csv");
    write_values(&f, &clustered_volatility(300_000, 1.2, 0.4, 12));
    let out = tmp.path().join("out");
    let res = retscale(&["analyze", "--surrogate", "--input", path(&f), "--out", path(&out), "--seed", "1"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let orig = alpha_table(&out.join("NL.alpha.csv"));
    let surr = alpha_table(&out.join("NL.surrogate.alpha.csv"));
    assert_eq!(orig.len(), surr.len());
    let differing = orig
        .iter()
        .zip(&surr)
        .filter(|(o, s)| (o.1 - s.1).abs() > 2.0 * (o.2.powi(2) + s.2.powi(2)).sqrt())
        .count();
    assert!(differing > 0, "{orig:?}\n{surr:?}");
    assert!(out.join("ensemble_alpha.surrogate.csv").exists());
}

#[test]
fn surrogate_alpha_agrees_on_linear_gaussian_data() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("LIN.volatility.csv");
    let g: Vec<f64> = long_memory_gaussian(1 << 19, 0.4, 31).iter().map(|x| x + 6.0).collect();
    write_values(&f, &g);
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"analysis": {"m_values": [0.5, 2.0], "q_values": []}}"#).unwrap();
    let out = tmp.path().join("out");
    let res = retscale(&["analyze", "--surrogate", "--config", path(&cfg), "--input", path(&f), "--out", path(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let orig = alpha_table(&out.join("LIN.alpha.csv"));
    let surr = alpha_table(&out.join("LIN.surrogate.alpha.csv"));
    // The OLS stderr ignores correlated errors along a single curve and
    // understates realization-to-realization spread, so the comparison uses
    // the absolute i.i.d. tolerance instead.
    assert_eq!(orig.len(), 2);
    for (o, s) in orig.iter().zip(&surr) {
        assert!((o.1 - s.1).abs() <= 0.02, "m={}: {} vs {}", o.0, o.1, s.1);
    }
}

#[test]
fn surrogate_command_preserves_values() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("S.volatility.csv");
    let v = clustered_volatility(4096, 0.7, 0.5, 2);
    write_values(&f, &v);
    let out = tmp.path().join("out");
    assert!(retscale(&["surrogate", "--input", path(&f), "--out", path(&out)]).status.success());
    let pts = read_volatility_csv(fs::File::open(out.join("S.surrogate.volatility.csv")).unwrap()).unwrap();
    let mut a: Vec<f64> = pts.iter().map(|p| p.v).collect();
    let mut b = v.clone();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a, b);
}

#[test]
fn corpus_run_lists_every_instrument() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    for i in 0..25 {
        write_prices(&input, &format!("S{i:03}"), &PriceModel { n_days: 2, seed: i, ..Default::default() });
    }
    let out = tmp.path().join("out");
    let res = retscale(&["volatility", "--input", path(&input), "--out", path(&out), "--seed", "3"]);
    assert!(res.status.success());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["data"]["outputs"].as_array().unwrap().len(), 50);
    assert_eq!(manifest["meta"]["seed"], 3);
    assert_eq!(manifest["meta"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("plan.json");
    fs::write(
        &cfg,
        r#"{"simulation": {
            "discreteness": {"gamma": 0.3, "sizes": [3000], "resolutions": [0, 1, 5, 10], "n_realizations": 3, "m_values": [0.5, 2]},
            "finite_size": {"gamma": 0.3, "sizes": [20000], "n_realizations": 3, "m_values": [0.5, 8]}
        }}"#,
    )
    .unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(retscale(&["simulate", "--config", path(&cfg), "--out", path(&a)]).status.success());
    let res = Command::new(env!("CARGO_BIN_EXE_retscale"))
        .args(["simulate", "--config", path(&cfg), "--out", path(&b)])
        .env("RETSCALE_THREADS", "1")
        .output()
        .unwrap();
    assert!(res.status.success());
    for name in ["discreteness.csv", "finite_size.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let text = fs::read_to_string(a.join("discreteness.csv")).unwrap();
    assert!(text.lines().nth(3).unwrap().starts_with("resolution,m,mean_tau,mu_m"));
}

#[test]
fn shipped_plans_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("plans");
    let load = |name: &str| -> retscale::cli::RunConfig {
        serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
    };
    let (full, desk) = (load("full.json"), load("desk.json"));
    full.validate().unwrap();
    desk.validate().unwrap();
    assert_eq!(full.simulation.finite_size.as_ref().unwrap().n_realizations, 500);
    assert_eq!(full.simulation.discreteness.as_ref().unwrap().n_realizations, 100);
    assert_eq!(desk.simulation.finite_size.as_ref().unwrap().n_realizations, 50);
    assert!(full.simulation.discreteness.as_ref().unwrap().target_mean_taus.contains(&30.0));
}
