//! Config file, command line and report formats.

use std::path::Path;
use std::process::{Command, Stdio};
use toeplab::config::{derive_seed, grid_level, LabConfig, Overrides};
use toeplab::experiments::{kernel_diag, ExperimentReport, ROW_HEADER};
use toeplab::runner::{run, run_experiments, Subcommand, DEFAULT_OUT, OUT_ENV};
use toeplab::LabError;

fn toeplab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_toeplab"));
    c.stdout(Stdio::null()).stderr(Stdio::null());
    c
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn default_config_round_trips_through_toml() {
    let cfg = LabConfig::default();
    let back = LabConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, back);
    assert_eq!(LabConfig::from_toml("").unwrap(), cfg);
}

#[test]
fn config_errors_are_reported() {
    let cases = [
        "unknown_key = 1",
        "[kernel]\nk_grid = [64, 32]",
        "[kernel]\nk_grid = []",
        "[expectation_cr]\ntrials = 99",
        "[cutoff]\ndelta1 = 0.8\ndelta2 = 0.2",
        "[zeros]\ndeltas = [1e-3, 1e-2]",
        "jobs = 0",
        "seed = \"x\"",
        "[embedding]\nkappa = 2",
        "[equi_cr]\nlevel = 2",
    ];
    for text in cases {
        match LabConfig::from_toml(text) {
            Err(LabError::Config(_)) => {}
            other => panic!("{text:?} gave {other:?}"),
        }
    }
}

#[test]
fn overrides_replace_every_section() {
    let mut cfg = LabConfig::default();
    let o = Overrides {
        k_grid: Some(vec![20.0, 40.0]),
        trials: Some(150),
        level: Some(24),
        seed: Some(3),
        ..Default::default()
    };
    cfg.apply(&o).unwrap();
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.equi_cr.k_grid, vec![20.0, 40.0]);
    assert_eq!(cfg.variance_cr.k0, 20.0);
    assert_eq!(cfg.expectation_domain.trials, 150);
    assert_eq!(cfg.expectation_cr.level, Some(24));
    let bad = Overrides {
        trials: Some(10),
        ..Default::default()
    };
    assert!(cfg.apply(&bad).is_err());
}

#[test]
fn hash_ignores_output_location_and_workers() {
    let a = LabConfig::default();
    let mut b = a.clone();
    b.out = Some("/elsewhere".into());
    b.jobs = 4;
    b.strict = true;
    assert_eq!(a.hash(), b.hash());
    b.seed += 1;
    assert_ne!(a.hash(), b.hash());
    let mut c = a.clone();
    c.cutoff.delta2 = 0.8;
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn seeds_and_levels_are_deterministic() {
    assert_eq!(derive_seed(1, "a"), derive_seed(1, "a"));
    assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
    assert_ne!(derive_seed(1, "a"), derive_seed(2, "a"));
    assert_eq!(grid_level(16.0, 0.75), 24);
    assert_eq!(grid_level(128.0, 0.75), 64);
    let levels: Vec<usize> = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
        .iter()
        .map(|&k| grid_level(k, 0.75))
        .collect();
    assert!(levels.windows(2).all(|w| w[1] >= w[0]));
    assert!(levels.iter().all(|l| l % 8 == 0));
}

#[test]
fn subcommand_names_parse() {
    for c in Subcommand::ALL {
        assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
    }
    assert!(matches!(
        "nope".parse::<Subcommand>(),
        Err(LabError::UnknownSubcommand(_))
    ));
}

#[test]
fn reports_have_stable_formats() {
    let rep = kernel_diag(&LabConfig::default()).unwrap();
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), ROW_HEADER.join(","));
    assert_eq!(
        ROW_HEADER,
        [
            "k",
            "quantity",
            "value",
            "reference",
            "abs_err",
            "rel_err",
            "observed_order",
            "std_err"
        ]
    );
    assert_eq!(csv.lines().count(), rep.rows.len() + 1);
    let mut json = Vec::new();
    rep.write_json(&mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    for key in ["id", "passed", "verdicts", "warnings", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["seed", "config_hash", "version"] {
        assert!(
            v["provenance"].get(key).is_some(),
            "missing provenance.{key}"
        );
    }
    assert!(v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d["name"].is_string() && d["passed"].is_boolean()));
}

#[test]
fn empty_report_writes_no_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let rep = ExperimentReport::new("empty", &LabConfig::default());
    assert!(rep
        .emit_plotdata(&dir.path().join("plotdata"))
        .unwrap()
        .is_empty());
    assert!(!dir.path().join("plotdata").exists());
    assert!(rep.passed(true));
}

#[test]
fn runs_write_manifest_reports_and_identical_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = LabConfig::default();
    let mut bodies = Vec::new();
    for sub in ["a", "b"] {
        cfg.out = Some(dir.path().join(sub).display().to_string());
        let outcome = run(Subcommand::KernelDiag, &cfg, None).unwrap();
        assert!(outcome.passed);
        let out = &outcome.out_dir;
        let manifest: serde_json::Value =
            serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
        assert_eq!(manifest["config_hash"], cfg.hash());
        assert_eq!(manifest["subcommand"], "kernel-diag");
        assert!(out.join("kernel-diag.json").exists());
        assert!(out
            .join("plotdata")
            .join("kernel-diag__diag_ratio.csv")
            .exists());
        bodies.push(read(&out.join("kernel-diag.csv")));
        // nothing escapes the output directory
        for e in walk(out) {
            assert!(e.starts_with(out));
        }
    }
    assert_eq!(bodies[0], bodies[1]);
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        }
        out.push(p);
    }
    out
}

#[test]
fn in_memory_runs_match_the_callback_stream() {
    let cfg = LabConfig::default();
    let mut seen = Vec::new();
    let reports = run_experiments(Subcommand::KernelDiag, &cfg, |r, _| {
        seen.push(r.id.clone());
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, vec!["kernel-diag".to_string()]);
    assert_eq!(reports.len(), 1);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let s = toeplab()
        .args(["kernel-diag", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(0));
    assert!(out.join("manifest.json").exists());

    let s = toeplab()
        .args(["kernel-diag", "--k-grid", "2,3", "--out"])
        .arg(dir.path().join("fail"))
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(1));

    let s = toeplab().arg("no-such-experiment").status().unwrap();
    assert_eq!(s.code(), Some(2));

    let s = toeplab()
        .args(["kernel-diag", "--trials", "5"])
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(2));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[kernel]\nbogus = 1\n").unwrap();
    let s = toeplab()
        .args(["kernel-diag", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(2));
}

#[test]
fn cli_reads_config_and_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    std::fs::write(&cfg, "seed = 11\n[kernel]\nk_grid = [32, 64, 128, 256]\n").unwrap();
    let out = dir.path().join("env-out");
    let s = toeplab()
        .args(["kernel-diag", "--config"])
        .arg(&cfg)
        .env(OUT_ENV, &out)
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(
        manifest["config"]["kernel"]["k_grid"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
    assert!(!dir.path().join(DEFAULT_OUT).exists());
}

#[test]
fn shipped_config_equals_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../toeplab.toml");
    assert_eq!(LabConfig::load(&path).unwrap(), LabConfig::default());
}
