use std::fs;
use std::path::Path;
use std::process::Command;

use tdope_harness::commands::{self, EssInput, RunRecord};
use tdope_harness::pipeline;
use tdope_harness::{DopingLevel, ExperimentConfig, HarnessError};

fn tdope(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tdope")).args(args).output().unwrap()
}

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        n_qubits: vec![6],
        n_t: vec![DopingLevel::Count(0), DopingLevel::Count(3), DopingLevel::Universal],
        realizations: 3,
        out: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn heat_outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let st = tdope(&["heat", "--n", "6", "--nt", "0,2", "--realizations", "2", "--out", d.path().to_str().unwrap()]);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    for f in ["heat_series.csv", "heat_summary.csv"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
    // Records embed the output directory; everything else must match.
    let rec = |d: &Path| {
        let mut r: RunRecord = serde_json::from_str(&read(&d.join("records/heat_N6_nt2.json"))).unwrap();
        r.config.out = Default::default();
        r
    };
    assert_eq!(rec(a.path()), rec(b.path()));
    let header = read(&a.path().join("heat_series.csv")).lines().next().unwrap().to_string();
    assert_eq!(header, "n_qubits,n_t,realization,seed,gate,s_bar_bits");
}

#[test]
fn serial_and_parallel_runs_agree() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = small(d.path());
    cfg.parallelism = 1;
    let serial = commands::run_ensemble(&cfg, "fluct", pipeline::fluct_run).unwrap();
    cfg.parallelism = 0;
    let parallel = commands::run_ensemble(&cfg, "fluct", pipeline::fluct_run).unwrap();
    assert_eq!(serial.iter().map(|r| &r.realizations).collect::<Vec<_>>(), parallel.iter().map(|r| &r.realizations).collect::<Vec<_>>());
}

#[test]
fn stored_records_reproduce_from_their_seed() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small(d.path());
    commands::cmd_heat(&cfg).unwrap();
    let rec: RunRecord = serde_json::from_str(&read(&d.path().join("records/heat_N6_nt3.json"))).unwrap();
    for run in &rec.realizations {
        let again = pipeline::heat_run(&rec.config, rec.n_qubits, rec.n_t, run.index).unwrap();
        assert_eq!(&again, run);
        assert_eq!(again.seed, rec.config.seed(run.index));
    }
}

#[test]
fn heating_saturates() {
    let d = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n_qubits: vec![8],
        n_t: vec![DopingLevel::Count(0), DopingLevel::Universal],
        realizations: 3,
        out: d.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let (rows, _) = commands::cmd_heat(&cfg).unwrap();
    assert_eq!(rows[0].gate_count, 640);
    // Stabilizer plateaus fluctuate by whole bits on single cuts, so only
    // the universal family is held to a tight bound.
    assert!(rows[0].min_saturation_ratio >= 0.7, "{:?}", rows[0]);
    assert!(rows[1].min_saturation_ratio >= 0.95, "{:?}", rows[1]);
}

#[test]
fn ess_tables_and_record_reuse() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small(d.path());
    let (fresh, _) = commands::cmd_ess(&cfg, EssInput::Fresh).unwrap();
    let hist = read(&d.path().join("ess_hist_N6_ntU.csv"));
    assert_eq!(hist.lines().count(), 1 + cfg.binning.bins);
    assert!(hist.starts_with("bin_lo,bin_hi,count,density,gue_density"));
    // Pure Clifford: no ratios, reported through the degenerate count.
    let clifford = fresh.iter().find(|r| r.n_t == DopingLevel::Count(0)).unwrap();
    assert!(clifford.d_kl.is_none() && clifford.degenerate_count > 0);

    let paths: Vec<_> = ["ess_N6_nt0.json", "ess_N6_nt3.json", "ess_N6_ntU.json"]
        .iter()
        .map(|f| d.path().join("records").join(f))
        .collect();
    let reuse_dir = d.path().join("reuse");
    let cfg2 = ExperimentConfig { out: reuse_dir.clone(), ..cfg };
    let (reused, _) = commands::cmd_ess(&cfg2, EssInput::Records(&paths)).unwrap();
    for (a, b) in fresh.iter().zip(&reused) {
        assert_eq!(a.d_kl, b.d_kl);
        assert_eq!(a.ratio_count, b.ratio_count);
    }
    assert_eq!(read(&d.path().join("ess_dkl.csv")), read(&reuse_dir.join("ess_dkl.csv")));
}

#[test]
fn cool_requires_a_baseline() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = small(d.path());
    cfg.n_t = vec![DopingLevel::Count(2)];
    match commands::cmd_cool(&cfg) {
        Err(HarnessError::MissingBaseline { n_qubits: 6, .. }) => {}
        other => panic!("expected a missing-baseline error, got {other:?}"),
    }
    let out = tdope(&["cool", "--n", "6", "--nt", "2", "--out", d.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("universal baseline"));

    // A run that includes universal circuits writes the manifest; later
    // doped-only runs with the same settings reuse it.
    cfg.n_t = vec![DopingLevel::Count(0), DopingLevel::Universal];
    let (rows, _) = commands::cmd_cool(&cfg).unwrap();
    let universal = rows.iter().find(|r| r.n_t == DopingLevel::Universal).unwrap();
    assert_eq!(universal.success.mean, 0.0);
    assert!(universal.reversibility.abs() <= 2.0 * universal.reversibility_sem + 1e-12);
    let clifford = rows.iter().find(|r| r.n_t == DopingLevel::Count(0)).unwrap();
    assert_eq!(clifford.success.mean, 1.0);
    cfg.n_t = vec![DopingLevel::Count(2)];
    assert!(commands::cmd_cool(&cfg).is_ok());
    assert!(read(&d.path().join("cool.csv")).lines().next().unwrap().contains("reversibility_bits_per_qubit"));
}

#[test]
fn fluct_units_follow_the_log_base() {
    let d = tempfile::tempdir().unwrap();
    let out = tdope(&["fluct", "--n", "6", "--nt", "universal", "--realizations", "2", "--log-base", "e", "--out", d.path().to_str().unwrap()]);
    assert!(out.status.success());
    let header = read(&d.path().join("fluct.csv")).lines().next().unwrap().to_string();
    assert_eq!(header, "n_qubits,n_t,realizations,var_mean_nats2,var_sem_nats2,var_fit_nats2");
}

#[test]
fn render_refuses_odd_sizes_and_writes_pgms() {
    let d = tempfile::tempdir().unwrap();
    let out = tdope(&["render", "--n", "5", "--out", d.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let ok = tdope(&["render", "--n", "8", "--nt", "2", "--realizations", "1", "--out", d.path().to_str().unwrap()]);
    assert!(ok.status.success());
    let img = fs::read(d.path().join("render/N8_nt2_r0_stage1.pgm")).unwrap();
    let text = String::from_utf8_lossy(&img[..120]);
    assert!(text.starts_with("P5\n# N=8 family=doped-clifford-t n_T=2 seed="));
    assert!(text.contains("scale=log\n16 16\n255\n"));
    assert_eq!(fs::read(d.path().join("render/N8_nt2_r0_stage2.pgm")).unwrap(), img);
}

#[test]
fn config_file_errors_name_the_field() {
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("cfg.json");
    fs::write(&path, r#"{"n_qubits": [6], "cooling": {"beta": -2.0}}"#).unwrap();
    let out = tdope(&["cool", "--config", path.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cooling.beta"));

    fs::write(&path, r#"{"n_qubits": [6], "realizations": 1, "n_t": ["universal"], "plot_script": true}"#).unwrap();
    let out = tdope(&["fluct", "--config", path.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.path().join("fluct.gp").exists());
    let summary: serde_json::Value = serde_json::from_str(&read(&d.path().join("run_fluct.json"))).unwrap();
    // Every default is materialised in the config echo.
    assert_eq!(summary["config"]["cooling"]["budget_per_n2"], 40);
    assert_eq!(summary["config"]["binning"]["bins"], 50);
}

#[test]
fn fits_table() {
    let d = tempfile::tempdir().unwrap();
    let (rows, slopes) = commands::cmd_fits(&small(d.path()), 8, 40).unwrap();
    assert_eq!(rows.len(), 33);
    assert!(rows.iter().all(|r| r.nt_min_ess == r.n_qubits as f64 + 2.0));
    let asym: Vec<f64> = slopes.iter().map(|s| s.slope_asymptotic).collect();
    for (got, want) in asym.iter().zip([1.0, 1.0, 1.4]) {
        assert!((got - want).abs() < 0.01, "{asym:?}");
    }
    assert_eq!(read(&d.path().join("fits.csv")).lines().count(), 34);
}
