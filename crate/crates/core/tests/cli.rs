use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use acfilter::io::touchstone::{write_touchstone, TouchstoneFormat};
use acfilter::io::Report;
use acfilter::network::one_port_sweep;
use acfilter::resonator::{BranchKind, MotionalBranch, ResonatorModel};

fn acfilter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acfilter"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Report {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    Report::parse(&String::from_utf8_lossy(&out.stdout))
}

fn num(r: &Report, key: &str) -> f64 {
    r.get(key).unwrap_or_else(|| panic!("missing {key}")).parse().unwrap()
}

fn stderr_line(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(text.lines().count(), 1, "{text}");
    text.trim().to_string()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = acfilter(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).starts_with("usage: "));
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = acfilter(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("synth"));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = acfilter(dir.path(), &["fitloss", "--csv", "nope.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("io: "));
}

#[test]
fn out_of_table_wavelength_is_a_range_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = acfilter(dir.path(), &["dispersion", "--table", "SH0", "--lambda", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("range: "));
}

#[test]
fn dispersion_reports_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&acfilter(
        dir.path(),
        &["dispersion", "--table", "S0", "--lambda", "1.5e-6"],
    ));
    assert!((num(&r, "frequency_hz") - 4.4e9).abs() / 4.4e9 < 5e-3);
    assert_eq!(r.get("mode"), Some("S0"));
    assert!(r.get("regime").is_some());
}

#[test]
fn resonator_then_analyze_recovers_q() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("geom.toml"),
        "lambda = 4.5e-6\npairs_n = 100\naperture_w = 20e-6\neps_eff = 5e-10\nq_assumed = 3000.0\n",
    )
    .unwrap();
    let first = report(&acfilter(
        dir.path(),
        &["resonator", "--table", "SH0", "--geom", "geom.toml"],
    ));
    let (fr, fa, q) = (num(&first, "fr_hz"), num(&first, "fa_hz"), num(&first, "q_analytic"));
    assert!(dir.path().join("geom.s1p").exists());
    assert!(dir.path().join("geom.report.txt").exists());

    let half = 0.3 * (fa - fr);
    let grid = format!("{},{},4001", fr - half, fr + half);
    report(&acfilter(
        dir.path(),
        &[
            "resonator",
            "--table",
            "SH0",
            "--geom",
            "geom.toml",
            "--grid",
            &grid,
            "--out",
            "win",
        ],
    ));
    let a = report(&acfilter(
        dir.path(),
        &["analyze", "--snp", "win/geom.s1p", "--out", "win"],
    ));
    assert!((num(&a, "qmax") - q).abs() / q < 0.02, "{a}");
    let csv = fs::read_to_string(dir.path().join("win/geom.bodeq.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("frequency_hz,bode_q"));
    assert_eq!(csv.lines().count(), 4002);
}

#[test]
fn synth_filter_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&acfilter(dir.path(), &["synth", "--preset", "F1", "--out", "a"]));
    assert!(num(&r, "fc_error").abs() < 0.01);
    assert!(num(&r, "fbw_error").abs() < 0.10);
    assert_eq!(r.get("mode"), Some("SH0"));

    // same inputs, same bytes
    report(&acfilter(dir.path(), &["synth", "--preset", "F1", "--out", "b"]));
    for file in ["F1.s2p", "F1.topology.toml", "F1.report.txt"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }

    // the topology file feeds the filter command and reproduces the metrics;
    // in-band ripple can dip below the 3 dB line, so name the band
    let f = report(&acfilter(
        dir.path(),
        &[
            "filter",
            "--topology",
            "a/F1.topology.toml",
            "--grid",
            "1.3e9,1.5e9,8001",
            "--band",
            "1.3769e9",
            "1.4231e9",
            "--out",
            "c",
        ],
    ));
    assert!(
        (num(&f, "fc_hz") - num(&r, "fc_hz")).abs() / num(&r, "fc_hz") < 1e-3,
        "{f}"
    );
    assert!(num(&f, "passivity_margin") > -1e-9);

    // two-port analyze agrees with filter
    let a = report(&acfilter(
        dir.path(),
        &[
            "analyze",
            "--snp",
            "c/F1.topology.s2p",
            "--two-port",
            "--band",
            "1.3769e9",
            "1.4231e9",
        ],
    ));
    assert_eq!(a.get("fc_hz"), f.get("fc_hz"));
}

#[test]
fn synth_from_spec_file_and_presets_command() {
    let dir = tempfile::tempdir().unwrap();
    report(&acfilter(dir.path(), &["presets", "--out", "specs"]));
    for i in 1..=8 {
        assert!(dir.path().join(format!("specs/F{i}.toml")).exists());
    }
    let r = report(&acfilter(
        dir.path(),
        &["synth", "--spec", "specs/F8.toml", "--out", "o"],
    ));
    assert_eq!(r.get("mode"), Some("S0"));
    assert!(num(&r, "fc_error").abs() < 0.01);
}

#[test]
fn infeasible_spec_reports_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("wide.toml"),
        "spec_version = 1\nfc_target = 1.45e9\nfbw_target = 0.15\nil_max_db = 3.0\nstage_count = 4\nq_assumed = 2000.0\n",
    )
    .unwrap();
    let out = acfilter(dir.path(), &["synth", "--spec", "wide.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("feasibility: "));
}

#[test]
fn fit_and_fitloss_reports() {
    let dir = tempfile::tempdir().unwrap();
    let main = MotionalBranch::new(0.5, 100e-9, 0.12e-12, BranchKind::Main).unwrap();
    let truth = ResonatorModel::new(1.0e-12, 1.2, 0.6, main, vec![]).unwrap();
    let res = truth.resonance_frequencies();
    let grid: Vec<f64> = (0..2001)
        .map(|i| res.fr * 0.9 + (res.fa * 1.1 - res.fr * 0.9) * i as f64 / 2000.0)
        .collect();
    let set = one_port_sweep(&truth, &grid, 50.0).unwrap();
    fs::write(dir.path().join("dut.s1p"), write_touchstone(&set, TouchstoneFormat::Ma)).unwrap();
    let r = report(&acfilter(dir.path(), &["fit", "--sNp", "dut.s1p"]));
    assert_eq!(r.get("converged"), Some("true"));
    assert!((num(&r, "rs_ohm") - 0.6).abs() / 0.6 < 1e-3);
    assert!((num(&r, "fr_hz") - res.fr).abs() / res.fr < 1e-6);

    let mut csv = String::from("gap_wavelengths,s21_mag\n");
    for g in [10.0, 50.0, 100.0, 150.0] {
        csv.push_str(&format!(
            "{g},{}\n",
            0.9 * (-0.002 * 2.0 * std::f64::consts::PI * g).exp()
        ));
    }
    fs::write(dir.path().join("dl.csv"), csv).unwrap();
    let r = report(&acfilter(dir.path(), &["fitloss", "--csv", "dl.csv"]));
    assert!((num(&r, "delta") - 0.002).abs() < 1e-9);
}

#[test]
fn run_config_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "spec_version = 1\noutput_dir = \"results\"\n",
    )
    .unwrap();
    report(&acfilter(
        dir.path(),
        &["--config", "run.toml", "synth", "--preset", "F1"],
    ));
    assert!(dir.path().join("results/F1.s2p").exists());
}
