//! The six experiment commands. Each writes its tables, per-point run
//! records and a run summary under `cfg.out`, and returns its rows.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tdope_core::analysis::{
    dkl_fit, dkl_universal, loglog_slope, min_doping, reversibility_fit, solve_min_doping_from_fit, var_fit,
    var_universal, EnsembleResult, FitValue, MeanStat, MinDopingKind, RealizationRecord, UniversalBaseline,
};
use tdope_core::colormap::{amplitude_grid, encode_pgm};
use tdope_core::entanglement::LogBase;
use tdope_core::ess::{empirical_distribution, kl_divergence, Density, WignerDyson};
use tdope_core::parallel::{try_map_indexed, with_threads, Execution};

use crate::config::{CoolingSettings, DopingLevel, ExperimentConfig};
use crate::error::{io_err, HarnessError, Result};
use crate::output::{ensure_dir, num, read_json, write_json, write_plot_script, Table};
use crate::pipeline::{self, RealizationRun};

/// All realizations of one `(N, n_T)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub n_qubits: usize,
    pub n_t: DopingLevel,
    pub config: ExperimentConfig,
    pub realizations: Vec<RealizationRun>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary<'a, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
    pub outputs: &'a [PathBuf],
    pub rows: &'a [R],
}

fn execution(cfg: &ExperimentConfig) -> Execution {
    if cfg.parallelism == 1 {
        Execution::Serial
    } else {
        Execution::Parallel
    }
}

type RunFn = fn(&ExperimentConfig, usize, DopingLevel, usize) -> Result<RealizationRun>;

/// Runs every realization of every point, ordered by point then index.
pub fn run_ensemble(cfg: &ExperimentConfig, command: &str, f: RunFn) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let exec = execution(cfg);
    with_threads(cfg.parallelism, || {
        cfg.points()
            .into_iter()
            .map(|(n, level)| {
                let realizations = try_map_indexed(cfg.realizations, exec, |i| f(cfg, n, level, i))?;
                Ok(RunRecord { command: command.into(), n_qubits: n, n_t: level, config: cfg.clone(), realizations })
            })
            .collect()
    })
}

fn records_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg.out.join("records");
    ensure_dir(&dir)?;
    Ok(dir)
}

fn write_records(cfg: &ExperimentConfig, records: &[RunRecord], outputs: &mut Vec<PathBuf>) -> Result<()> {
    let dir = records_dir(cfg)?;
    for r in records {
        let path = dir.join(format!("{}_N{}_{}.json", r.command, r.n_qubits, r.n_t.tag()));
        write_json(&path, r)?;
        outputs.push(path);
    }
    Ok(())
}

fn finish<R: Serialize>(cfg: &ExperimentConfig, command: &str, mut outputs: Vec<PathBuf>, rows: &[R]) -> Result<()> {
    let path = cfg.out.join(format!("run_{command}.json"));
    outputs.push(path.clone());
    let summary = RunSummary { command, version: env!("CARGO_PKG_VERSION"), config: cfg, outputs: &outputs, rows };
    write_json(&path, &summary)
}

fn core_records(runs: &[RealizationRun]) -> Vec<RealizationRecord> {
    runs.iter()
        .map(|r| RealizationRecord {
            index: r.index,
            seed: r.seed,
            temporal_variance: r.temporal_variance,
            final_entropy: r.cooling_summary.as_ref().map(|c| c.final_entropy),
            ratios: r.ratios.clone(),
        })
        .collect()
}

fn maybe_plot(
    cfg: &ExperimentConfig,
    name: &str,
    csv: &str,
    x: (usize, &str),
    y: (usize, &str),
    log_y: bool,
    outputs: &mut Vec<PathBuf>,
) -> Result<()> {
    if cfg.plot_script {
        outputs.push(write_plot_script(&cfg.out.join(name), csv, x, y, log_y)?);
    }
    Ok(())
}

/// Entropy-squared unit for variance columns.
fn unit2(base: LogBase) -> String {
    format!("{}2", base.unit())
}

/// Fits are stated in bits; rescale to the configured base.
fn from_bits(x: f64, base: LogBase, power: i32) -> f64 {
    match base {
        LogBase::Two => x,
        LogBase::E => x * std::f64::consts::LN_2.powi(power),
    }
}

// ---------------------------------------------------------------- heat

#[derive(Clone, Debug, Serialize)]
pub struct HeatRow {
    pub n_qubits: usize,
    pub n_t: DopingLevel,
    pub gate_count: usize,
    pub final_entropy: MeanStat,
    /// Smallest ratio of the final S̄ to the running maximum over realizations.
    pub min_saturation_ratio: f64,
}

pub fn cmd_heat(cfg: &ExperimentConfig) -> Result<(Vec<HeatRow>, Vec<RunRecord>)> {
    let records = run_ensemble(cfg, "heat", pipeline::heat_run)?;
    ensure_dir(&cfg.out)?;
    let u = cfg.log_base.unit();
    let mut series = Table::new(
        cfg.out.join("heat_series.csv"),
        &["n_qubits", "n_t", "realization", "seed", "gate", &format!("s_bar_{u}")],
    );
    let mut summary = Table::new(
        cfg.out.join("heat_summary.csv"),
        &[
            "n_qubits",
            "n_t",
            "realizations",
            "gate_count",
            &format!("final_s_bar_mean_{u}"),
            &format!("final_s_bar_sem_{u}"),
            "min_final_over_running_max",
        ],
    );
    let mut rows = Vec::new();
    for rec in &records {
        let mut ratios = Vec::new();
        for run in &rec.realizations {
            let s = run.heating.as_ref().expect("heat runs record their series");
            for (k, v) in s.values.iter().enumerate() {
                let gate = ((k + 1) * cfg.stride).min(run.gate_count);
                series.row(vec![
                    rec.n_qubits.to_string(),
                    rec.n_t.to_string(),
                    run.index.to_string(),
                    run.seed.to_string(),
                    gate.to_string(),
                    v.to_string(),
                ]);
            }
            if let (Some(last), Some(max)) = (s.last(), s.max()) {
                ratios.push(if max > 0.0 { last / max } else { 1.0 });
            }
        }
        let finals: Vec<f64> = rec.realizations.iter().map(|r| r.heated_entropy).collect();
        let row = HeatRow {
            n_qubits: rec.n_qubits,
            n_t: rec.n_t,
            gate_count: rec.realizations[0].gate_count,
            final_entropy: MeanStat::from_values(&finals)?,
            min_saturation_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        };
        summary.row(vec![
            row.n_qubits.to_string(),
            row.n_t.to_string(),
            rec.realizations.len().to_string(),
            row.gate_count.to_string(),
            row.final_entropy.mean.to_string(),
            row.final_entropy.sem.to_string(),
            row.min_saturation_ratio.to_string(),
        ]);
        rows.push(row);
    }
    let mut outputs = vec![series.write()?, summary.write()?];
    maybe_plot(cfg, "heat_series.gp", "heat_series.csv", (5, "gate"), (6, &format!("S̄ [{u}]")), false, &mut outputs)?;
    write_records(cfg, &records, &mut outputs)?;
    finish(cfg, "heat", outputs, &rows)?;
    Ok((rows, records))
}

// ----------------------------------------------------------------- ess

#[derive(Clone, Debug, Serialize)]
pub struct EssRow {
    pub n_qubits: usize,
    pub n_t: DopingLevel,
    pub realizations: usize,
    pub ratio_count: usize,
    pub degenerate_count: usize,
    pub out_of_range_fraction: Option<f64>,
    /// Pooled D_KL against GUE in nats; `None` when undefined.
    pub d_kl: Option<f64>,
    pub d_kl_fit: FitValue,
    pub mean_retained_rank: f64,
}

pub enum EssInput<'a> {
    /// Heat fresh realizations from the configuration.
    Fresh,
    /// Reuse stored `heat` or `ess` run records.
    Records(&'a [PathBuf]),
}

fn load_records(paths: &[PathBuf]) -> Result<Vec<RunRecord>> {
    let mut out: Vec<RunRecord> = Vec::new();
    for p in paths {
        let rec: RunRecord = read_json(p)?;
        if rec.realizations.iter().any(|r| r.ratios.is_none()) {
            return Err(HarnessError::Usage(format!("{} has no spacing ratios; use heat or ess records", p.display())));
        }
        match out.iter_mut().find(|o| o.n_qubits == rec.n_qubits && o.n_t == rec.n_t) {
            Some(o) => o.realizations.extend(rec.realizations),
            None => out.push(rec),
        }
    }
    Ok(out)
}

pub fn cmd_ess(cfg: &ExperimentConfig, input: EssInput) -> Result<(Vec<EssRow>, Vec<RunRecord>)> {
    let records = match input {
        EssInput::Fresh => run_ensemble(cfg, "ess", pipeline::ess_run)?,
        EssInput::Records(paths) => {
            cfg.validate()?;
            load_records(paths)?
        }
    };
    ensure_dir(&cfg.out)?;
    let edges = cfg.binning.edges();
    let gue = WignerDyson::gue();

    let mut collapse = Table::new(
        cfg.out.join("ess_dkl.csv"),
        &[
            "n_qubits",
            "n_t",
            "n_t_over_n",
            "d_kl_nats",
            "ratio_count",
            "degenerate_count",
            "out_of_range_fraction",
            "d_kl_fit_nats",
            "fit_in_validity_range",
            "bins",
            "r_max",
        ],
    );
    let mut per_real = Table::new(
        cfg.out.join("ess_realizations.csv"),
        &["n_qubits", "n_t", "realization", "seed", "ratio_count", "degenerate_count", "retained_rank", "d_kl_nats"],
    );
    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    for rec in &records {
        let ens = EnsembleResult::aggregate(
            rec.n_qubits,
            rec.n_t.count(),
            cfg.seed_base,
            core_records(&rec.realizations),
            &cfg.binning,
            None,
        )?;
        let fit = match rec.n_t {
            DopingLevel::Count(k) => dkl_fit(k as f64, rec.n_qubits),
            DopingLevel::Universal => FitValue { value: dkl_universal(rec.n_qubits), in_validity_range: true },
        };
        let ranks: Vec<f64> = rec.realizations.iter().filter_map(|r| r.retained_rank).map(|r| r as f64).collect();
        let mean_rank = ranks.iter().sum::<f64>() / ranks.len().max(1) as f64;
        if mean_rank < 3.0 {
            eprintln!("warning: N={} n_T={}: mean retained Schmidt rank {mean_rank} < 3", rec.n_qubits, rec.n_t);
        }
        if ens.d_kl.is_none() {
            eprintln!(
                "warning: N={} n_T={}: D_KL undefined ({} ratios, {} degenerate gaps)",
                rec.n_qubits, rec.n_t, ens.ratio_count, ens.degenerate_count
            );
        }
        for r in &rec.realizations {
            let ratios = r.ratios.as_ref().expect("ratios are present");
            let kl = empirical_distribution(&ratios.values, &edges)
                .ok()
                .and_then(|h| kl_divergence(&h, &gue).ok())
                .map(|k| k.value);
            per_real.row(vec![
                rec.n_qubits.to_string(),
                rec.n_t.to_string(),
                r.index.to_string(),
                r.seed.to_string(),
                ratios.values.len().to_string(),
                ratios.degenerate_count.to_string(),
                r.retained_rank.map(|k| k.to_string()).unwrap_or_default(),
                num(kl),
            ]);
        }

        // Pooled histogram for this point.
        let pooled: Vec<f64> =
            rec.realizations.iter().flat_map(|r| r.ratios.as_ref().unwrap().values.iter().copied()).collect();
        let mut hist_table = Table::new(
            cfg.out.join(format!("ess_hist_N{}_{}.csv", rec.n_qubits, rec.n_t.tag())),
            &["bin_lo", "bin_hi", "count", "density", "gue_density"],
        );
        let hist = (!pooled.is_empty()).then(|| empirical_distribution(&pooled, &edges)).transpose()?;
        for (i, w) in edges.windows(2).enumerate() {
            let width = w[1] - w[0];
            let (count, density) = hist.as_ref().map(|h| (h.counts[i], h.densities[i])).unwrap_or((0, 0.0));
            hist_table.row(vec![
                w[0].to_string(),
                w[1].to_string(),
                count.to_string(),
                density.to_string(),
                (gue.mass(w[0], w[1]) / width).to_string(),
            ]);
        }
        outputs.push(hist_table.write()?);

        let row = EssRow {
            n_qubits: rec.n_qubits,
            n_t: rec.n_t,
            realizations: rec.realizations.len(),
            ratio_count: ens.ratio_count,
            degenerate_count: ens.degenerate_count,
            out_of_range_fraction: ens.out_of_range_fraction,
            d_kl: ens.d_kl,
            d_kl_fit: fit,
            mean_retained_rank: mean_rank,
        };
        collapse.row(vec![
            row.n_qubits.to_string(),
            row.n_t.to_string(),
            num(row.n_t.count().map(|k| k as f64 / row.n_qubits as f64)),
            num(row.d_kl),
            row.ratio_count.to_string(),
            row.degenerate_count.to_string(),
            num(row.out_of_range_fraction),
            fit.value.to_string(),
            fit.in_validity_range.to_string(),
            cfg.binning.bins.to_string(),
            cfg.binning.r_max.to_string(),
        ]);
        rows.push(row);
    }
    outputs.push(collapse.write()?);
    outputs.push(per_real.write()?);
    maybe_plot(cfg, "ess_dkl.gp", "ess_dkl.csv", (3, "n_T / N"), (4, "D_KL [nats]"), true, &mut outputs)?;
    if matches!(input, EssInput::Fresh) {
        write_records(cfg, &records, &mut outputs)?;
    }
    finish(cfg, "ess", outputs, &rows)?;
    Ok((rows, records))
}

// --------------------------------------------------------------- fluct

#[derive(Clone, Debug, Serialize)]
pub struct FluctRow {
    pub n_qubits: usize,
    pub n_t: DopingLevel,
    /// Mean temporal variance over realizations, in squared entropy units.
    pub variance: MeanStat,
    pub var_fit: f64,
}

pub fn cmd_fluct(cfg: &ExperimentConfig) -> Result<(Vec<FluctRow>, Vec<RunRecord>)> {
    let records = run_ensemble(cfg, "fluct", pipeline::fluct_run)?;
    ensure_dir(&cfg.out)?;
    let u2 = unit2(cfg.log_base);
    let mut table = Table::new(
        cfg.out.join("fluct.csv"),
        &[
            "n_qubits",
            "n_t",
            "realizations",
            &format!("var_mean_{u2}"),
            &format!("var_sem_{u2}"),
            &format!("var_fit_{u2}"),
        ],
    );
    let mut rows = Vec::new();
    for rec in &records {
        let ens = EnsembleResult::aggregate(
            rec.n_qubits,
            rec.n_t.count(),
            cfg.seed_base,
            core_records(&rec.realizations),
            &cfg.binning,
            None,
        )?;
        let fit_bits = match rec.n_t {
            DopingLevel::Count(k) => var_fit(k as f64, rec.n_qubits),
            DopingLevel::Universal => var_universal(rec.n_qubits),
        };
        let row = FluctRow {
            n_qubits: rec.n_qubits,
            n_t: rec.n_t,
            variance: ens.mean_var.expect("fluct runs carry variances"),
            var_fit: from_bits(fit_bits, cfg.log_base, 2),
        };
        table.row(vec![
            row.n_qubits.to_string(),
            row.n_t.to_string(),
            row.variance.count.to_string(),
            row.variance.mean.to_string(),
            row.variance.sem.to_string(),
            row.var_fit.to_string(),
        ]);
        rows.push(row);
    }
    let mut outputs = vec![table.write()?];
    maybe_plot(cfg, "fluct.gp", "fluct.csv", (2, "n_T"), (4, &format!("Var [{u2}]")), true, &mut outputs)?;
    write_records(cfg, &records, &mut outputs)?;
    finish(cfg, "fluct", outputs, &rows)?;
    Ok((rows, records))
}

// ---------------------------------------------------------------- cool

/// Identifies the runs a universal baseline was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineKey {
    pub n_qubits: usize,
    pub cooling: CoolingSettings,
    pub log_base: LogBase,
    pub block_size: usize,
    pub seed_base: u64,
    pub first_realization: u64,
    pub realizations: usize,
}

impl BaselineKey {
    pub fn for_config(cfg: &ExperimentConfig, n_qubits: usize) -> Self {
        BaselineKey {
            n_qubits,
            cooling: cfg.cooling,
            log_base: cfg.log_base,
            block_size: cfg.block_size_for(n_qubits),
            seed_base: cfg.seed_base,
            first_realization: cfg.first_realization,
            realizations: cfg.realizations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub key: BaselineKey,
    pub mean_final_entropy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineManifest {
    pub entries: Vec<BaselineEntry>,
}

impl BaselineManifest {
    pub fn load_or_empty(path: &Path) -> Result<Self> {
        if path.exists() {
            read_json(path)
        } else {
            Ok(BaselineManifest::default())
        }
    }

    pub fn get(&self, key: &BaselineKey) -> Option<f64> {
        self.entries.iter().find(|e| &e.key == key).map(|e| e.mean_final_entropy)
    }

    pub fn insert(&mut self, key: BaselineKey, mean_final_entropy: f64) {
        self.entries.retain(|e| e.key != key);
        self.entries.push(BaselineEntry { key, mean_final_entropy });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoolRow {
    pub n_qubits: usize,
    pub n_t: DopingLevel,
    pub success: MeanStat,
    pub final_entropy: MeanStat,
    pub baseline: f64,
    /// `R^U` in entropy units per qubit, with its standard error.
    pub reversibility: f64,
    pub reversibility_sem: f64,
    pub reversibility_fit: f64,
    pub cap_exhausted: usize,
}

pub fn cmd_cool(cfg: &ExperimentConfig) -> Result<(Vec<CoolRow>, Vec<RunRecord>)> {
    cfg.validate()?;
    // Fail before any work if a baseline is missing.
    let manifest_path = cfg.baseline_path();
    let mut manifest = BaselineManifest::load_or_empty(&manifest_path)?;
    let computes_universal = cfg.n_t.contains(&DopingLevel::Universal);
    if !computes_universal {
        for &n in &cfg.n_qubits {
            if manifest.get(&BaselineKey::for_config(cfg, n)).is_none() {
                return Err(HarnessError::MissingBaseline { n_qubits: n, manifest: manifest_path });
            }
        }
    }

    let records = run_ensemble(cfg, "cool", pipeline::cool_run)?;
    ensure_dir(&cfg.out)?;
    let finals = |rec: &RunRecord| -> Vec<f64> {
        rec.realizations.iter().map(|r| r.cooling_summary.as_ref().unwrap().final_entropy).collect()
    };
    if computes_universal {
        for rec in records.iter().filter(|r| r.n_t == DopingLevel::Universal) {
            let mean = MeanStat::from_values(&finals(rec))?.mean;
            manifest.insert(BaselineKey::for_config(cfg, rec.n_qubits), mean);
        }
        if let Some(parent) = manifest_path.parent() {
            ensure_dir(parent)?;
        }
        write_json(&manifest_path, &manifest)?;
    }

    let u = cfg.log_base.unit();
    let mut table = Table::new(
        cfg.out.join("cool.csv"),
        &[
            "n_qubits",
            "n_t",
            "realizations",
            "success_fraction",
            "success_sem",
            &format!("final_s_bar_mean_{u}"),
            &format!("baseline_s_bar_{u}"),
            &format!("reversibility_{u}_per_qubit"),
            &format!("reversibility_sem_{u}_per_qubit"),
            &format!("reversibility_fit_{u}_per_qubit"),
            "cap_exhausted",
        ],
    );
    let mut rows = Vec::new();
    for rec in &records {
        let n = rec.n_qubits;
        let baseline_value = manifest
            .get(&BaselineKey::for_config(cfg, n))
            .ok_or_else(|| HarnessError::MissingBaseline { n_qubits: n, manifest: manifest_path.clone() })?;
        let baseline = UniversalBaseline { n_qubits: n, mean_final_entropy: baseline_value };
        let ens = EnsembleResult::aggregate(
            n,
            rec.n_t.count(),
            cfg.seed_base,
            core_records(&rec.realizations),
            &cfg.binning,
            Some(&baseline),
        )?;
        let f = finals(rec);
        let final_entropy = MeanStat::from_values(&f)?;
        let hits: Vec<f64> = rec
            .realizations
            .iter()
            .map(|r| if r.cooling_summary.as_ref().unwrap().reached_zero { 1.0 } else { 0.0 })
            .collect();
        let fit_bits = reversibility_fit(rec.n_t.count().map(|k| k as f64).unwrap_or(f64::INFINITY), n);
        let row = CoolRow {
            n_qubits: n,
            n_t: rec.n_t,
            success: MeanStat::from_values(&hits)?,
            final_entropy,
            baseline: baseline_value,
            reversibility: ens.reversibility.expect("baseline supplied"),
            reversibility_sem: final_entropy.sem / n as f64,
            reversibility_fit: from_bits(fit_bits, cfg.log_base, 1),
            cap_exhausted: rec.realizations.iter().filter(|r| r.cooling_summary.as_ref().unwrap().cap_exhausted).count(),
        };
        table.row(vec![
            n.to_string(),
            row.n_t.to_string(),
            rec.realizations.len().to_string(),
            row.success.mean.to_string(),
            row.success.sem.to_string(),
            row.final_entropy.mean.to_string(),
            row.baseline.to_string(),
            row.reversibility.to_string(),
            row.reversibility_sem.to_string(),
            row.reversibility_fit.to_string(),
            row.cap_exhausted.to_string(),
        ]);
        rows.push(row);
    }
    let mut outputs = vec![table.write()?];
    if computes_universal {
        outputs.push(manifest_path);
    }
    maybe_plot(cfg, "cool.gp", "cool.csv", (2, "n_T"), (8, &format!("R^U [{u}/qubit]")), false, &mut outputs)?;
    write_records(cfg, &records, &mut outputs)?;
    finish(cfg, "cool", outputs, &rows)?;
    Ok((rows, records))
}

// -------------------------------------------------------------- render

#[derive(Clone, Debug, Serialize)]
pub struct RenderRow {
    pub n_qubits: usize,
    pub n_t: usize,
    pub realization: usize,
    pub seed: u64,
    pub images: [PathBuf; 3],
    pub width: usize,
    pub stage1_equals_stage2: bool,
    pub stage3_differs: bool,
}

pub fn cmd_render(cfg: &ExperimentConfig) -> Result<Vec<RenderRow>> {
    cfg.validate()?;
    if let Some(n) = cfg.n_qubits.iter().find(|n| *n % 2 != 0) {
        return Err(HarnessError::Usage(format!("render needs an even qubit count, got N={n}")));
    }
    let dir = cfg.out.join("render");
    ensure_dir(&dir)?;
    let scale = cfg.render.scale;
    let mut jobs = Vec::new();
    for &n in &cfg.n_qubits {
        for level in &cfg.n_t {
            match level.count() {
                Some(k) => jobs.extend((0..cfg.realizations).map(|i| (n, k, i))),
                None => eprintln!("note: render skips n_t=universal"),
            }
        }
    }
    let exec = execution(cfg);
    let rows = with_threads(cfg.parallelism, || {
        try_map_indexed(jobs.len(), exec, |j| -> Result<RenderRow> {
            let (n, k, i) = jobs[j];
            let seed = cfg.seed(i);
            let stages = pipeline::render_stages(cfg, n, k, seed)?;
            let mut images: Vec<Vec<u8>> = Vec::with_capacity(3);
            let mut paths = Vec::with_capacity(3);
            let mut width = 0;
            for (s, state) in stages.iter().enumerate() {
                let grid = amplitude_grid(state)?;
                width = grid.width();
                // The stage lives in the file name only, so identical
                // states give identical files.
                let header = format!("N={n} family=doped-clifford-t n_T={k} seed={seed} scale={}", scale.name());
                let bytes = encode_pgm(&grid, scale, &header);
                let path = dir.join(format!("N{n}_nt{k}_r{i}_stage{}.pgm", s + 1));
                std::fs::write(&path, &bytes).map_err(io_err(&path))?;
                images.push(bytes);
                paths.push(path);
            }
            Ok(RenderRow {
                n_qubits: n,
                n_t: k,
                realization: i,
                seed,
                images: [paths[0].clone(), paths[1].clone(), paths[2].clone()],
                width,
                stage1_equals_stage2: images[0] == images[1],
                stage3_differs: images[2] != images[0],
            })
        })
    })?;
    let mut table = Table::new(
        cfg.out.join("render.csv"),
        &["n_qubits", "n_t", "realization", "seed", "width", "stage1_equals_stage2", "stage3_differs"],
    );
    for r in &rows {
        table.row(vec![
            r.n_qubits.to_string(),
            r.n_t.to_string(),
            r.realization.to_string(),
            r.seed.to_string(),
            r.width.to_string(),
            r.stage1_equals_stage2.to_string(),
            r.stage3_differs.to_string(),
        ]);
    }
    let mut outputs = vec![table.write()?];
    outputs.extend(rows.iter().flat_map(|r| r.images.iter().cloned()));
    finish(cfg, "render", outputs, &rows)?;
    Ok(rows)
}

// ---------------------------------------------------------------- fits

#[derive(Clone, Debug, Serialize)]
pub struct FitsRow {
    pub n_qubits: usize,
    pub nt_min_ess: f64,
    pub nt_min_var: f64,
    pub nt_min_rev: f64,
    /// Smallest integer doping at which the fitted excess drops below the
    /// universal term.
    pub solved_ess: u64,
    pub solved_var: u64,
    pub dkl_universal: f64,
    pub var_universal: f64,
    pub reversibility_fit_nt0: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeRow {
    pub threshold: MinDopingKind,
    /// Least-squares log-log slope over the table's N range.
    pub slope_table_range: f64,
    /// The same slope over N ∈ [10³, 10⁴], i.e. the growth order.
    pub slope_asymptotic: f64,
}

pub fn cmd_fits(cfg: &ExperimentConfig, n_min: usize, n_max: usize) -> Result<(Vec<FitsRow>, Vec<SlopeRow>)> {
    if n_min < 2 || n_max <= n_min {
        return Err(HarnessError::Usage(format!("fits needs 2 <= n_min < n_max, got {n_min}..{n_max}")));
    }
    ensure_dir(&cfg.out)?;
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        rows.push(FitsRow {
            n_qubits: n,
            nt_min_ess: min_doping(MinDopingKind::Ess, n),
            nt_min_var: min_doping(MinDopingKind::Variance, n),
            nt_min_rev: min_doping(MinDopingKind::Reversibility, n),
            solved_ess: solve_min_doping_from_fit(MinDopingKind::Ess, n)?,
            solved_var: solve_min_doping_from_fit(MinDopingKind::Variance, n)?,
            dkl_universal: dkl_universal(n),
            var_universal: var_universal(n),
            reversibility_fit_nt0: reversibility_fit(0.0, n),
        });
    }
    let mut slopes = Vec::new();
    let table_ns: Vec<f64> = (n_min..=n_max).map(|n| n as f64).collect();
    let big: Vec<usize> = (0..=10).map(|k| (1000.0 * 10f64.powf(k as f64 / 10.0)).round() as usize).collect();
    for kind in [MinDopingKind::Ess, MinDopingKind::Variance, MinDopingKind::Reversibility] {
        let ys: Vec<f64> = (n_min..=n_max).map(|n| min_doping(kind, n)).collect();
        let big_x: Vec<f64> = big.iter().map(|&n| n as f64).collect();
        let big_y: Vec<f64> = big.iter().map(|&n| min_doping(kind, n)).collect();
        slopes.push(SlopeRow {
            threshold: kind,
            slope_table_range: loglog_slope(&table_ns, &ys)?,
            slope_asymptotic: loglog_slope(&big_x, &big_y)?,
        });
    }

    let mut table = Table::new(
        cfg.out.join("fits.csv"),
        &[
            "n_qubits",
            "nt_min_ess",
            "nt_min_var",
            "nt_min_rev",
            "solved_ess",
            "solved_var",
            "dkl_universal_nats",
            "var_universal_bits2",
            "reversibility_fit_nt0_bits_per_qubit",
        ],
    );
    for r in &rows {
        table.row(vec![
            r.n_qubits.to_string(),
            r.nt_min_ess.to_string(),
            r.nt_min_var.to_string(),
            r.nt_min_rev.to_string(),
            r.solved_ess.to_string(),
            r.solved_var.to_string(),
            r.dkl_universal.to_string(),
            r.var_universal.to_string(),
            r.reversibility_fit_nt0.to_string(),
        ]);
    }
    let mut slope_table = Table::new(
        cfg.out.join("fits_slopes.csv"),
        &["threshold", "slope_table_range", "slope_asymptotic", "n_min", "n_max"],
    );
    for s in &slopes {
        let name = match s.threshold {
            MinDopingKind::Ess => "ess",
            MinDopingKind::Variance => "variance",
            MinDopingKind::Reversibility => "reversibility",
        };
        slope_table.row(vec![
            name.into(),
            s.slope_table_range.to_string(),
            s.slope_asymptotic.to_string(),
            n_min.to_string(),
            n_max.to_string(),
        ]);
    }
    let mut outputs = vec![table.write()?, slope_table.write()?];
    maybe_plot(cfg, "fits.gp", "fits.csv", (1, "N"), (4, "n_T^min (reversibility)"), false, &mut outputs)?;
    finish(cfg, "fits", outputs, &rows)?;
    Ok((rows, slopes))
}
