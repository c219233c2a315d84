use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chromatomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chromatomo")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identical_seeds_give_identical_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = chromatomo(&["simulate", "--n-exp", "1", "--n-tot", "1000", "--seed", "7", "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["runs.csv", "coefficients.csv", "histogram.csv", "counts_run0.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let header = fs::read_to_string(a.join("counts_run0.csv")).unwrap();
    assert!(header.starts_with("# {\"protocol_hash\""));
    assert!(header.lines().next().unwrap().contains("\"seed\":7"));
}

#[test]
fn unknown_preset_lists_the_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let o = chromatomo(&["simulate", "--preset", "fig9", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fig3-cube-ideal") && err.contains("fig7-model-compare"), "{err}");
}

#[test]
fn invalid_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"n_tot": 0}"#).unwrap();
    let o = chromatomo(&["simulate", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let missing = chromatomo(&["simulate", "--config", "/nonexistent.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "").unwrap();
    let o = chromatomo(&["simulate", "--n-exp", "1", "--n-tot", "100", "--out", path(&file.join("sub"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn fig3_preset_lands_in_its_band() {
    let dir = tempfile::tempdir().unwrap();
    let o = chromatomo(&["simulate", "--preset", "fig3-cube-ideal", "--out", path(dir.path())]);
    assert!(o.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let predicted = summary["predicted_loss"].as_f64().unwrap();
    assert!((predicted - 3.267).abs() <= 0.03, "predicted L {predicted}");
    let (l, se) = (summary["L"].as_f64().unwrap(), summary["L_stderr"].as_f64().unwrap());
    assert!((l - predicted).abs() <= 3.0 * se, "L {l} +- {se}");
    assert_eq!(summary["config"]["seed"], 1);
}

#[test]
fn compare_shares_counts_and_coincides_when_monochromatic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mono.json");
    fs::write(&cfg, r#"{"delta_lambda_nm": 0, "n_exp": 5, "n_tot": 100000}"#).unwrap();
    let out = dir.path().join("cmp");
    let o = chromatomo(&["compare", "--config", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("comparison.json")).unwrap()).unwrap();
    assert!((report["ratio"].as_f64().unwrap() - 1.0).abs() < 0.1);
    assert_eq!(report["paired"], true);
    let hashes = |arm: &str| -> Vec<String> {
        fs::read_to_string(out.join(arm).join("runs.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().to_string())
            .collect()
    };
    assert_eq!(hashes("standard"), hashes("fuzzy"));
    assert_eq!(fs::read(out.join("standard/counts_run0.csv")).unwrap(), fs::read(out.join("fuzzy/counts_run0.csv")).unwrap());
}

#[test]
fn plot_draws_one_curve_per_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for dl in ["0", "10", "20", "40"] {
        let cfg = dir.path().join(format!("{dl}.json"));
        fs::write(&cfg, format!(r#"{{"delta_lambda_nm": {dl}, "n_exp": 20, "spectral_points": 16}}"#)).unwrap();
        let out = dir.path().join(format!("c{dl}"));
        assert!(chromatomo(&["simulate", "--config", path(&cfg), "--out", path(&out)]).status.success());
        dirs.push(out);
    }
    let plot = dir.path().join("plot");
    let mut args = vec!["plot", "--out", path(&plot)];
    args.extend(dirs.iter().map(|d| path(d)));
    let o = chromatomo(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(plot.join("density.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(plot.join("histogram_40nm.csv").exists());

    let heights: Vec<f64> = String::from_utf8_lossy(&o.stdout)
        .lines()
        .filter_map(|l| l.split("mode height ").nth(1))
        .map(|x| x.trim().parse().unwrap())
        .collect();
    assert_eq!(heights.len(), 4);
    assert!(heights.windows(2).all(|w| w[1] < w[0]), "{heights:?}");

    let single = dir.path().join("single");
    let o = chromatomo(&["plot", "--out", path(&single), path(&dirs[0])]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(single.join("density.svg")).unwrap().matches("<polyline").count(), 1);
}

#[test]
fn plot_rejects_empty_or_missing_campaigns() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    fs::write(empty.join("runs.csv"), "").unwrap();
    let o = chromatomo(&["plot", "--out", path(&dir.path().join("p")), path(&empty)]);
    assert_eq!(o.status.code(), Some(2));
    let o = chromatomo(&["plot", "--out", path(&dir.path().join("p")), path(&dir.path().join("nothing"))]);
    assert_eq!(o.status.code(), Some(2));
}
