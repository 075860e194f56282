use std::fs;
use std::path::Path;
use std::process::Command;

use bgvar_cli::pipeline::{bundle_files, INCOMPLETE};
use bgvar_cli::{run, run_report, RunConfig, Stage};
use bgvar_testkit::fixtures_dir;

fn quick_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&fixtures_dir().join("report.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg.bgvar.schedule.n_draws = 200;
    cfg.bgvar.schedule.n_burn = 200;
    cfg
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn report_bundle_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    run_report(&cfg).unwrap();
    let out = dir.path();
    assert!(!out.join(INCOMPLETE).exists());

    let prov = cfg.provenance();
    for f in bundle_files(out).unwrap() {
        let text = fs::read_to_string(&f).unwrap();
        assert!(text.lines().take(2).any(|l| l.contains(&prov)), "{} lacks provenance", f.display());
    }
    let names: Vec<String> =
        bundle_files(out).unwrap().iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for stem in [
        "00_config.toml",
        "01_stationarity_adf.csv",
        "02_rolling_regression.csv",
        "03_johansen.csv",
        "04_model_summary.txt",
        "05_girf_China_mpi.svg",
    ] {
        assert!(names.iter().any(|n| n == stem), "missing {stem}");
    }

    let adf = read(out, "01_stationarity_adf.csv");
    assert_eq!(adf.lines().count(), 6);
    assert!(csv_rows(&adf).iter().all(|r| r.len() == 9));

    let joh = csv_rows(&read(out, "03_johansen.csv"));
    assert_eq!(joh.len(), 1 + 5 * 8);
    for (i, row) in joh[1..].iter().enumerate() {
        let r = i % 8;
        for (j, cell) in row[2..].iter().enumerate() {
            match r.cmp(&j) {
                std::cmp::Ordering::Greater => assert_eq!(cell, ""),
                std::cmp::Ordering::Equal => assert_eq!(cell, "-"),
                std::cmp::Ordering::Less => {
                    let digits = cell.trim_end_matches('*');
                    assert!(digits.parse::<f64>().is_ok(), "cell '{cell}'");
                }
            }
        }
    }

    let w = csv_rows(&read(out, "04_weights_table6.csv"));
    for i in 1..=5 {
        assert_eq!(w[i][i], "0");
    }
    assert_eq!(w[1][5], "1.0000");

    let summary = read(out, "04_model_summary.txt");
    assert!(summary.contains("Number of posterior draws: 200/1=200"));
    assert!(summary.contains("out of 1000 variables' z-values exceed the 1.96 threshold"));
}

#[test]
fn conditional_fans_respect_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    run(&cfg, &[Stage::Bgvar, Stage::Forecast]).unwrap();
    let china_mpi = |name: &str| -> Vec<Vec<f64>> {
        csv_rows(&read(dir.path(), name))
            .into_iter()
            .filter(|r| r[0] == "China/mpi")
            .map(|r| r[2..].iter().map(|x| x.parse().unwrap()).collect())
            .collect()
    };
    let fixed = china_mpi("05_forecast_china_mpi_fixed.csv");
    let band = china_mpi("05_forecast_china_mpi_band.csv");
    let free = china_mpi("05_forecast_unconditional.csv");
    let level = fixed[0][0];
    for h in 0..5 {
        assert!(fixed[h].iter().all(|q| *q == level));
        let spread = band[h][4] - band[h][0];
        assert!(spread > 0.0 && spread <= 0.002 * level * (1.0 + 1e-12), "band spread {spread}");
        assert!(band[h][0] >= level / 1.001 - 1e-9 && band[h][4] <= level * 1.001 + 1e-9);
        assert!(free[h][4] - free[h][0] > spread);
    }
}

#[test]
fn forecast_subcommand_matches_report_via_draw_file() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&quick_config(a.path()), &[Stage::Bgvar, Stage::Forecast, Stage::Girf]).unwrap();
    let cfg_b = quick_config(b.path());
    run(&cfg_b, &[Stage::Bgvar]).unwrap();
    run(&cfg_b, &[Stage::Forecast, Stage::Girf]).unwrap();
    for f in ["05_forecast_unconditional.csv", "05_forecast_china_mpi_band.csv", "05_girf_China_mpi.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

fn bgvar(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bgvar")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad = d.join("bad.toml");
    fs::write(&bad, "schema_version = 1\nsede = 3\n").unwrap();
    let (code, err) = bgvar(&["report", "-c", bad.to_str().unwrap(), "--output-dir", d.join("o1").to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("sede"));

    let cfg = fixtures_dir().join("report.toml");
    let (code, err) = bgvar(&[
        "gvar",
        "-c",
        cfg.to_str().unwrap(),
        "--data",
        "/no/such/panel.csv",
        "--output-dir",
        d.join("o2").to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(fs::read_to_string(d.join("o2").join(INCOMPLETE)).unwrap().contains("ingest"));

    // Explosive data: every posterior draw is unstable, so stable-only
    // forecasting has nothing to work with.
    let mut csv = String::from("country,variable,date,value\n");
    let mut flows = String::from("From/To,A,B\nA,0,1\nB,1,0\n");
    flows.push('\n');
    for (c, g) in [("A", 1.08), ("B", 1.06)] {
        let mut x = 1.0f64;
        for t in 0..60 {
            x = g * x + 0.05 * ((t * 7 + c.len()) as f64).sin();
            csv.push_str(&format!("{c},x,{},{x}\n", 2000 + t));
        }
    }
    fs::write(d.join("panel.csv"), csv).unwrap();
    fs::write(d.join("flows.csv"), flows.trim_end()).unwrap();
    fs::write(
        d.join("explosive.toml"),
        "[data]\npanel = \"panel.csv\"\nweights = \"flows.csv\"\n[bgvar.schedule]\nn_draws = 100\nn_burn = 100\n",
    )
    .unwrap();
    let out = d.join("o3");
    let (code, err) =
        bgvar(&["bgvar", "-c", d.join("explosive.toml").to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (code, err) =
        bgvar(&["forecast", "-c", d.join("explosive.toml").to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("forecast"));
    assert!(out.join(INCOMPLETE).exists());
}
