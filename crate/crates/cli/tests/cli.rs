use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heatwave_core::generator::{simulate_summer, summer_rng};
use heatwave_core::model::ModelParams;

fn theta() -> ModelParams {
    ModelParams {
        a0: 0.03,
        a1: 0.75,
        u: 34.0,
        sigma: 2.0,
        xi: -0.2,
        mu: 24.0,
        sigma_n2: 9.0,
        phi: 0.6,
        alpha: 0.6,
        alpha01: 0.7,
    }
}

fn heatwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatwave")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = heatwave(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two-column station file, 1990-2011, with a seasonal cycle on top of
/// simulated summers and two missing days.
fn station_csv(dir: &Path) -> PathBuf {
    let mut text = String::from("date,tmax\n");
    for (i, year) in (1990..=2011).enumerate() {
        let summer = simulate_summer(&theta(), 92, &mut summer_rng(99, 0, i)).unwrap();
        let mut t = 0;
        for (month, days) in [(6, 30), (7, 31), (8, 31)] {
            for day in 1..=days {
                let season = 2.0 * ((t as f64 - 45.0) / 92.0 * std::f64::consts::PI).cos();
                let v = format!("{:.1}", summer.values[t] + season - 2.0);
                let v = if year == 2005 && (t == 10 || t == 60) { "NA".to_string() } else { v };
                text.push_str(&format!("{year}-{month:02}-{day:02},{v}\n"));
                t += 1;
            }
        }
        text.push_str(&format!("{year}-09-01,20.0\n"));
    }
    let p = dir.join("station.csv");
    fs::write(&p, text).unwrap();
    p
}

struct Pipeline {
    _tmp: tempfile::TempDir,
    dir: PathBuf,
    segments: PathBuf,
    samples: PathBuf,
}

fn pipeline() -> Pipeline {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_path_buf();
    let raw = station_csv(&dir);
    let pre = dir.join("pre");
    ok(&["preprocess", s(&raw), "--out", s(&pre)]);
    let fit = dir.join("fit");
    ok(&["fit", s(&pre.join("segments.csv")), "--iterations", "400", "--burnin", "200", "--thin", "10", "--out", s(&fit), "--seed", "5"]);
    Pipeline { segments: pre.join("segments.csv"), samples: fit.join("samples.csv"), dir, _tmp: tmp }
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn preprocess_writes_segments_curve_and_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = station_csv(tmp.path());
    let out = tmp.path().join("a");
    let stdout = ok(&["preprocess", s(&raw), "--out", s(&out)]);
    assert!(stdout.contains("22 summers"), "{stdout}");
    assert!(stdout.contains("2 missing values"), "{stdout}");
    let seg = rows(&out.join("segments.csv"));
    assert_eq!(seg.len(), 22 * 92);
    assert_eq!(seg.iter().filter(|r| r[3] == "1").count(), 2);
    assert_eq!(rows(&out.join("seasonal_curve.csv")).len(), 92);
    assert!(fs::read_to_string(out.join("VERSION")).unwrap().starts_with("heatwave "));
    let cfg = fs::read_to_string(out.join("preprocess.config.toml")).unwrap();
    assert!(cfg.contains("year_from = 1990"), "{cfg}");

    let again = tmp.path().join("b");
    ok(&["preprocess", s(&raw), "--out", s(&again)]);
    for f in ["segments.csv", "seasonal_curve.csv", "raw_segments.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn malformed_input_exits_2_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.csv");
    fs::write(&p, "date,tmax\n1990-06-01,30.0\n1990-06-02,warm\n").unwrap();
    let o = heatwave(&["preprocess", s(&p), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("run.toml");
    fs::write(&c, "[mcmc]\nn_iterations = 10\nspeed = 3\n").unwrap();
    let o = heatwave(&["--config", s(&c), "fit", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn sampler_initialization_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("segments.csv");
    let mut text = String::from("year,day_of_season,value,missing\n");
    for y in 2000..2003 {
        for d in 1..=92 {
            let v = if y == 2001 && d == 40 { 1e200 } else { 24.0 + ((d * 7 + y) % 11) as f64 * 0.5 };
            text.push_str(&format!("{y},{d},{v},0\n"));
        }
    }
    fs::write(&p, text).unwrap();
    let o = heatwave(&["fit", s(&p), "--iterations", "5", "--burnin", "1", "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fit_is_reproducible_and_probabilities_are_valid() {
    let p = pipeline();
    let fit = p.dir.join("fit");
    let probs = rows(&fit.join("state_probs.csv"));
    assert_eq!(probs.len(), 22 * 92);
    for r in &probs {
        let v: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert_eq!(rows(&p.samples).len(), 20);
    let imputed = rows(&fit.join("imputed.csv"));
    assert_eq!(imputed.len(), 20 * 2);

    let again = p.dir.join("fit2");
    let stdout = ok(&["fit", s(&p.segments), "--iterations", "400", "--burnin", "200", "--thin", "10", "--out", s(&again), "--seed", "5"]);
    assert!(stdout.contains("accept"), "{stdout}");
    for f in ["samples.csv", "state_probs.csv", "state_draws.csv", "runs.csv", "trace.csv", "acceptance.csv"] {
        assert_eq!(fs::read(fit.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_compares_three_definitions() {
    let p = pipeline();
    let out = p.dir.join("sim");
    ok(&[
        "simulate", s(&p.samples), "--observed", s(&p.segments), "--states", s(&p.dir.join("fit/state_draws.csv")),
        "--summers-per-draw", "30", "--write-summers", "--out", s(&out),
    ]);
    let cmp = rows(&out.join("definition_comparison.csv"));
    let rules: Vec<&str> = cmp.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(rules, ["implicit", "huth", "worst_annual"]);
    assert!(cmp.iter().all(|r| r[1] == "600"));

    let dur = rows(&out.join("duration_pmf.csv"));
    let worst: Vec<_> = dur.iter().filter(|r| r[0] == "worst_annual").collect();
    assert_eq!(worst.len(), 1);
    assert_eq!(worst[0][1], "3");
    let freq = rows(&out.join("frequency_pmf.csv"));
    let worst: Vec<_> = freq.iter().filter(|r| r[0] == "worst_annual").collect();
    assert_eq!((worst.len(), worst[0][1].as_str()), (1, "1"));

    assert_eq!(rows(&out.join("summers.csv")).len(), 600 * 92);
    assert_eq!(rows(&out.join("definition_summaries.csv")).len(), 600 * 3);
    let events = rows(&out.join("events.csv"));
    assert_eq!(events.iter().filter(|r| r[2] == "worst_annual").count(), 600);
    assert!(out.join("retrospective_duration_pmf.csv").exists());

    let again = p.dir.join("sim1");
    ok(&["--threads", "1", "simulate", s(&p.samples), "--observed", s(&p.segments), "--summers-per-draw", "30", "--out", s(&again)]);
    for f in ["definition_comparison.csv", "duration_pmf.csv", "frequency_pmf.csv", "temperature_density.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_without_huth_thresholds_is_an_input_error() {
    let p = pipeline();
    let o = heatwave(&["simulate", s(&p.samples), "--summers-per-draw", "2", "--out", s(&p.dir.join("x"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn diagnose_with_and_without_samples() {
    let p = pipeline();
    let plain = p.dir.join("diag");
    ok(&["diagnose", s(&p.segments), "--out", s(&plain)]);
    for f in ["chi.csv", "pacf.csv", "extremal_index.csv", "pairs_lag1.csv", "pairs_lag1_frechet.csv"] {
        assert!(plain.join(f).exists(), "{f}");
    }
    assert!(!plain.join("ppc.csv").exists());

    let tmp = p.dir.join("cfg.toml");
    fs::write(&tmp, "[diagnostics]\nppc_thresholds = [28.0, 32.0, 60.0]\n").unwrap();
    let with = p.dir.join("diag_ppc");
    let stdout = ok(&["--config", s(&tmp), "diagnose", s(&p.segments), "--samples", s(&p.samples), "--out", s(&with)]);
    assert!(stdout.contains("q0.025") && stdout.contains("inside"), "{stdout}");
    let ppc = rows(&with.join("ppc.csv"));
    assert_eq!(ppc.len(), 9);
    let undefined = ppc.iter().find(|r| r[0] == "chi1(60)").unwrap();
    assert_eq!(undefined[2], "NA");
}
