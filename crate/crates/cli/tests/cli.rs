use std::fs;
use std::path::Path;
use std::process::Command;

use sqzhd::gaussian::{pump_curve, Branch};
use sqzhd::presets::ReferenceSetup;
use sqzhd_cli::config::ExperimentConfig;
use sqzhd_cli::run;

fn sqzhd(args: &[&str]) -> i32 {
    let mut v = vec!["sqzhd"];
    v.extend_from_slice(args);
    run(v)
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn small_config(frames: usize) -> String {
    format!("[acquisition]\nframes = {frames}\nrecord_duration_ns = 12.8\nsamples_per_frame = 2048\n")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_config_is_full_acquisition() {
    let c = ExperimentConfig::default();
    assert_eq!(c.acquisition.frames, 8192);
    assert_eq!(c.acquisition.samples_per_frame, 12512);
    let a = c.acquisition.build().unwrap();
    assert!((a.sample_interval() - 6.25e-12).abs() < 1e-20);
}

#[test]
fn single_frame_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config(1));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        assert_eq!(
            sqzhd(&["--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap(), "simulate"]),
            0
        );
    }
    let read = |d: &Path| fs::read(d.join("signal.sqztrace")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(read(&a).len(), 64 + 2048 * 8);
    // small runs also get CSV copies
    assert!(a.join("signal.csv").exists());
    assert_eq!(json(&a.join("summary.json"))["schema_version"], 1);
}

#[test]
fn invalid_stage_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[[chain.stages]]\nkind = \"loss\"\neta = 1.7\n");
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--config", &cfg, "--out", out.to_str().unwrap(), "simulate"]), 2);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[acquisition\nframes = ");
    assert_eq!(sqzhd(&["--config", &cfg, "plan-wdm"]), 2);
}

#[test]
fn missing_config_file_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nope.toml");
    assert_eq!(sqzhd(&["--config", p.to_str().unwrap(), "plan-wdm"]), 4);
}

#[test]
fn analyze_vacuum_against_itself_is_zero_db() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{}\n[chain]\nstages = []\n", small_config(8)));
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(sqzhd(&["--config", &cfg, "--out", o, "simulate"]), 0);
    let sig = out.join("signal.sqztrace");
    let s = sig.to_str().unwrap();
    assert_eq!(sqzhd(&["--config", &cfg, "--out", o, "analyze", "--signal", s, "--shot", s]), 0);
    let r = json(&out.join("report.json"));
    assert_eq!(r["level"]["level_db"].as_f64().unwrap(), 0.0);
    assert_eq!(r["plateau"]["mean_db"].as_f64().unwrap(), 0.0);
    let rel = fs::read_to_string(out.join("relative.csv")).unwrap();
    assert!(rel.starts_with("freq_hz,power_rel,power_db\n"));
}

#[test]
fn analyze_reference_setup_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[acquisition]\nframes = 128\n");
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(sqzhd(&["--config", &cfg, "--out", o, "simulate"]), 0);
    let s = out.join("signal.sqztrace");
    let n = out.join("shot.sqztrace");
    assert_eq!(
        sqzhd(&["--config", &cfg, "--out", o, "analyze", "--signal", s.to_str().unwrap(), "--shot", n.to_str().unwrap()]),
        0
    );
    let r = json(&out.join("report.json"));
    let mean = r["plateau"]["mean_db"].as_f64().unwrap();
    assert!((mean + 5.2).abs() <= 0.5, "{mean}");
    assert!(out.join("histogram_signal.csv").exists());
}

#[test]
fn analyze_without_shot_is_usage_error() {
    assert_eq!(sqzhd(&["analyze", "--signal", "x.sqztrace"]), 2);
}

#[test]
fn analyze_missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("absent.sqztrace");
    let p = p.to_str().unwrap();
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--out", out.to_str().unwrap(), "analyze", "--signal", p, "--shot", p]), 4);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("sub");
    assert_eq!(sqzhd(&["--out", out.to_str().unwrap(), "plan-wdm"]), 4);
}

fn levels_csv(dir: &Path, big_l: f64, a: f64, branches: &[Branch]) -> String {
    let mut text = String::from("pump_mw,level_db,branch,sigma_db\n");
    for &b in branches {
        for k in 1..=8 {
            let p = 0.438 * k as f64 / 8.0;
            let db = 10.0 * pump_curve(p, big_l, a, b).unwrap().log10();
            let name = match b {
                Branch::AntiSqueezing => "anti_squeezing",
                Branch::Squeezing => "squeezing",
            };
            text.push_str(&format!("{},{},{},0.1\n", p * 1e3, db, name));
        }
    }
    let path = dir.join("levels.csv");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fit_exact_csv_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let input = levels_csv(dir.path(), 0.29, 7.0, &[Branch::AntiSqueezing, Branch::Squeezing]);
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--out", out.to_str().unwrap(), "fit", "--input", &input]), 0);
    let r = json(&out.join("fit_report.json"));
    let est = &r["estimates"];
    assert_eq!(est["coupling"], "shared");
    assert!((est["big_l"].as_f64().unwrap() - 0.29).abs() < 1e-6);
    assert!((est["a_coeff"].as_f64().unwrap() / 7.0 - 1.0).abs() < 1e-6);
}

#[test]
fn fit_reference_squeezing_branch() {
    let dir = tempfile::tempdir().unwrap();
    let s = ReferenceSetup::default();
    let input = levels_csv(dir.path(), s.big_l, s.a_coeff, &[Branch::Squeezing]);
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--out", out.to_str().unwrap(), "fit", "--input", &input]), 0);
    let l = json(&out.join("fit_report.json"))["estimates"]["big_l"].as_f64().unwrap();
    assert!((l - 0.29).abs() < 0.01, "{l}");
}

#[test]
fn fit_empty_csv_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    fs::write(&p, "pump_mw,level_db,branch,sigma_db\n").unwrap();
    assert_eq!(sqzhd(&["fit", "--input", p.to_str().unwrap()]), 2);
    fs::write(&p, "").unwrap();
    assert_eq!(sqzhd(&["fit", "--input", p.to_str().unwrap()]), 2);
}

#[test]
fn fit_starved_of_iterations_is_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = levels_csv(dir.path(), 0.29, 7.0, &[Branch::AntiSqueezing, Branch::Squeezing]);
    let cfg = write_config(dir.path(), "[fit]\nmax_iterations = 1\n");
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--config", &cfg, "--out", out.to_str().unwrap(), "fit", "--input", &input]), 3);
}

#[test]
fn sweep_loss_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--out", out.to_str().unwrap(), "sweep-loss"]), 0);
    let text = fs::read_to_string(out.join("loss_sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "gain_db,added_loss,squeezing_db_oracle,squeezing_db_mc");
    assert_eq!(lines.count(), 20);
}

#[test]
fn sweep_loss_with_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{}\n[sweep]\nadded_loss = [0.0, 0.5]\nmc_frames = 16\n", small_config(4)),
    );
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--config", &cfg, "--out", out.to_str().unwrap(), "sweep-loss", "--monte-carlo"]), 0);
    let r = json(&out.join("loss_sweep.json"));
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|row| row["squeezing_db_mc"].is_number()));
}

#[test]
fn plan_wdm_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(sqzhd(&["--out", out.to_str().unwrap(), "plan-wdm"]), 0);
    let r = json(&out.join("wdm_plan.json"));
    assert_eq!(r["pairs"].as_array().unwrap().len(), 30);
    let text = fs::read_to_string(out.join("wdm_plan.csv")).unwrap();
    assert!(text.starts_with("pair_index,lower_hz,upper_hz,width_hz\n"));
}

#[test]
fn plan_wdm_bad_width_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[wdm]\nwidth_ghz = 200.0\n");
    assert_eq!(sqzhd(&["--config", &cfg, "plan-wdm"]), 2);
}

#[test]
fn environment_overrides_match_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config(2));
    let bin = env!("CARGO_BIN_EXE_sqzhd");
    let by_flag = dir.path().join("flag");
    let by_env = dir.path().join("env");
    let status = Command::new(bin)
        .args(["--config", &cfg, "--seed", "99", "--threads", "1", "--out", by_flag.to_str().unwrap(), "simulate"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let status = Command::new(bin)
        .env("SQZHD_CONFIG", &cfg)
        .env("SQZHD_SEED", "99")
        .env("SQZHD_THREADS", "1")
        .env("SQZHD_OUT", &by_env)
        .arg("simulate")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(
        fs::read(by_flag.join("shot.sqztrace")).unwrap(),
        fs::read(by_env.join("shot.sqztrace")).unwrap()
    );
}

#[test]
fn binary_reports_validation_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[acquisition]\nframes = 0\n");
    let status = Command::new(env!("CARGO_BIN_EXE_sqzhd"))
        .args(["--config", &cfg, "--out", dir.path().join("o").to_str().unwrap(), "simulate"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
