//! End-to-end experiments: single-neuron characterisation, open-loop
//! transfer curves, closed-loop transients and the burst phase plane.
//!
//! Every `cmd_*` function writes tidy CSV/JSON files into the output
//! directory together with a [`RunManifest`] listing them, and returns the
//! same data in memory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use statrs::distribution::{Binomial, Discrete};

use crate::analysis::{
    bin_population, detect_bursts, median, rmse, summarize, BurstStatistics, PhaseCell, PhasePlane, PhaseQuantity,
    DEFAULT_BIN_MS, DEFAULT_THRESHOLD_HZ,
};
use crate::error::{Error, Result};
use crate::meanfield::{
    find_fixed_points, fixed_points_json, rate_grid, write_curves_csv, MeanField, SfaMode, TransferCurve,
    VarianceModel,
};
use crate::netsim::{build_topology, run_experiment, ExperimentProtocol, SimOptions, Throughput, FIXED_IN_DEGREE};
use crate::params::{Mode, SimConfig};

/// Record of one command invocation. Re-running the command with `config`
/// and `args` reproduces the listed outputs bit for bit (wall-clock figures
/// aside).
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: SimConfig,
    pub seed: u64,
    pub version: String,
    pub args: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
    pub throughput: Throughput,
    pub summary: serde_json::Value,
}

/// Options shared by all commands.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub config: SimConfig,
    /// Overrides the command's default run length (seconds). For sweeps
    /// this is the stimulation time per grid point.
    pub duration_s: Option<f64>,
    pub out_dir: PathBuf,
    pub threads: usize,
    /// Input-rate grid for sweeps.
    pub grid: Option<Vec<f64>>,
    pub write_spikes: bool,
}

impl RunSettings {
    pub fn new(config: SimConfig, out_dir: impl Into<PathBuf>) -> Self {
        RunSettings { config, duration_s: None, out_dir: out_dir.into(), threads: 1, grid: None, write_spikes: false }
    }

    fn grid_or(&self, default: Vec<f64>) -> Vec<f64> {
        self.grid.clone().unwrap_or(default)
    }

    fn sim_options(&self) -> SimOptions {
        SimOptions { threads: self.threads.max(1), record_spikes: self.write_spikes, ..Default::default() }
    }

    fn sweep(&self, grid: Vec<f64>) -> Result<ExperimentProtocol> {
        match self.duration_s {
            None => Ok(ExperimentProtocol::sweep(grid)),
            Some(s) if s > 0.0 => {
                let stim_ms = s * 1e3;
                Ok(ExperimentProtocol::Sweep { grid, stim_ms, discard_ms: stim_ms / 2.0, gap_ms: stim_ms / 4.0 })
            }
            Some(_) => Err(Error::InvalidArgument("duration must be positive".into())),
        }
    }
}

/// Parses `"a:b:step"` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidArgument(format!("grid must look like a:b:step, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    Ok(rate_grid(a, b, step))
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(self.create(name)?, value)?;
        Ok(())
    }

    fn finish(
        self,
        command: &str,
        cfg: &SimConfig,
        args: serde_json::Value,
        started: Instant,
        throughput: Throughput,
        summary: serde_json::Value,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config: cfg.clone(),
            seed: cfg.network.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            args,
            outputs: self.files,
            wall_seconds: started.elapsed().as_secs_f64(),
            throughput,
            summary,
        };
        let path = self.dir.join(format!("{command}_manifest.json"));
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &manifest)?;
        Ok(manifest)
    }
}

fn add_throughput(total: &mut Throughput, t: &Throughput) {
    total.ticks += t.ticks;
    total.spikes += t.spikes;
    total.synaptic_events += t.synaptic_events;
    total.wall_seconds += t.wall_seconds;
    total.events_per_second = total.synaptic_events as f64 / total.wall_seconds.max(1e-9);
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleNeuronSummary {
    pub grid: Vec<f64>,
    /// `[neuron][grid point]`, Hz.
    pub per_neuron: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub meanfield_hardware: Vec<f64>,
    pub meanfield_standard: Vec<f64>,
    pub rmse_to_mean: Vec<f64>,
    pub rmse_to_hardware: Vec<f64>,
    pub median_rmse_to_mean: f64,
    pub median_rmse_to_hardware: f64,
    pub throughput: Throughput,
}

/// Independent neurons with fixed in-degree (20 stimulus, 20 background
/// inputs) swept over the input grid (default 0..180 Hz in 20 Hz steps,
/// 32 neurons unless `config.network.n` says otherwise).
pub fn cmd_single_neuron(s: &RunSettings) -> Result<(SingleNeuronSummary, RunManifest)> {
    let started = Instant::now();
    let mut cfg = s.config.clone();
    cfg.network.mode = Mode::SingleNeuron;
    cfg.validate()?;
    let grid = s.grid_or(rate_grid(0.0, 180.0, 20.0));
    let proto = s.sweep(grid.clone())?;
    let topo = build_topology(&cfg.network, cfg.network.seed)?;
    let rec = run_experiment(&proto, &cfg, topo, &s.sim_options())?;

    let k = FIXED_IN_DEGREE as f64;
    let mf = MeanField::new(&cfg.neuron, &cfg.network, &cfg.hardware).with_in_degrees(k, k);
    let sfa = if cfg.network.g_sfa > 0.0 { SfaMode::SteadyState } else { SfaMode::Off };
    let hw = mf.transfer_curve(&grid, VarianceModel::Hardware, sfa)?;
    let st = mf.transfer_curve(&grid, VarianceModel::Standard, sfa)?;

    let rates = rec.sweep_rates();
    let n = rec.n_neurons;
    let per_neuron: Vec<Vec<f64>> = (0..n).map(|i| rates.iter().map(|r| r[i]).collect()).collect();
    let (_, mean) = rec.mean_curve();
    let rmse_to_mean = per_neuron.iter().map(|c| rmse(c, &mean)).collect::<Result<Vec<_>>>()?;
    let rmse_to_hardware = per_neuron.iter().map(|c| rmse(c, &hw.f_out)).collect::<Result<Vec<_>>>()?;
    let measured = TransferCurve::measured(grid.clone(), mean.clone(), cfg.network.g_rec, cfg.network.g_sfa, cfg.network.f_bg)?;

    let mut out = Outputs::new(&s.out_dir)?;
    write_curves_csv(out.create("single_neuron_curves.csv")?, &[measured, hw.clone(), st.clone()])?;
    {
        let mut w = csv::Writer::from_writer(out.create("single_neuron_per_neuron.csv")?);
        w.write_record(["neuron", "f_in", "f_out"])?;
        for (i, c) in per_neuron.iter().enumerate() {
            for (f, r) in grid.iter().zip(c) {
                w.write_record([i.to_string(), f.to_string(), r.to_string()])?;
            }
        }
        w.flush()?;
    }
    {
        let mut w = csv::Writer::from_writer(out.create("single_neuron_rmse.csv")?);
        w.write_record(["neuron", "rmse_to_mean", "rmse_to_meanfield_hardware"])?;
        for i in 0..n {
            w.write_record([i.to_string(), rmse_to_mean[i].to_string(), rmse_to_hardware[i].to_string()])?;
        }
        w.flush()?;
    }
    if s.write_spikes {
        rec.write_csv(out.create("single_neuron_spikes.csv")?)?;
    }
    let summary = SingleNeuronSummary {
        median_rmse_to_mean: median(&rmse_to_mean),
        median_rmse_to_hardware: median(&rmse_to_hardware),
        grid: grid.clone(),
        per_neuron,
        mean,
        meanfield_hardware: hw.f_out,
        meanfield_standard: st.f_out,
        rmse_to_mean,
        rmse_to_hardware,
        throughput: rec.throughput,
    };
    let manifest = out.finish(
        "single_neuron",
        &cfg,
        json!({ "grid": grid, "protocol": proto, "threads": s.threads }),
        started,
        rec.throughput,
        json!({
            "median_rmse_to_mean_hz": summary.median_rmse_to_mean,
            "median_rmse_to_meanfield_hardware_hz": summary.median_rmse_to_hardware,
        }),
    )?;
    Ok((summary, manifest))
}

#[derive(Debug, Clone, Serialize)]
pub struct OpenLoopCurve {
    pub g_rec: f64,
    pub g_sfa: f64,
    pub f_in: Vec<f64>,
    /// Population mean and across-neuron standard deviation (Hz).
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub meanfield_hardware: Vec<f64>,
    pub meanfield_standard: Vec<f64>,
    /// Mean and standard deviation of the mean-field rate over the binomial
    /// in-degree distribution.
    pub predicted_mean: Vec<f64>,
    pub predicted_std: Vec<f64>,
    pub rmse_hardware: f64,
    /// Fraction of grid points where the measured and predicted 1σ bands
    /// intersect.
    pub band_overlap: f64,
    pub throughput: Throughput,
}

/// Spread of the mean-field rate caused by binomially distributed in-degrees.
pub fn in_degree_band(
    mf: &MeanField,
    n_rec: usize,
    p_rec: f64,
    n_bg: usize,
    p_bg: f64,
    f_in: f64,
    variance: VarianceModel,
) -> Result<(f64, f64)> {
    let support = |n: usize, p: f64| -> Result<Vec<(f64, f64)>> {
        let d = Binomial::new(p, n as u64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let m = n as f64 * p;
        let sd = (m * (1.0 - p)).sqrt();
        let lo = (m - 7.0 * sd).floor().max(0.0) as u64;
        let hi = ((m + 7.0 * sd).ceil() as u64).min(n as u64);
        Ok((lo..=hi).map(|k| (k as f64, d.pmf(k))).filter(|&(_, w)| w > 1e-12).collect())
    };
    let rec = support(n_rec, p_rec)?;
    let bg = support(n_bg, p_bg)?;
    let sfa = mf.g_sfa > 0.0;
    let (mut m1, mut m2, mut wsum) = (0.0, 0.0, 0.0);
    for &(kr, wr) in &rec {
        for &(kb, wb) in &bg {
            let m = mf.with_in_degrees(kr, kb);
            let r = if sfa { m.adapted_rate(f_in, variance)? } else { m.rate(f_in, variance) };
            let w = wr * wb;
            m1 += w * r;
            m2 += w * r * r;
            wsum += w;
        }
    }
    let mean = m1 / wsum;
    Ok((mean, (m2 / wsum - mean * mean).max(0.0).sqrt()))
}

/// One open-loop sweep of the full network at the given coupling.
pub fn open_loop_curve(s: &RunSettings, g_rec: f64, g_sfa: f64) -> Result<(OpenLoopCurve, Vec<f64>)> {
    let mut cfg = s.config.clone();
    cfg.network.mode = Mode::OpenLoop;
    cfg.network.g_rec = g_rec;
    cfg.network.g_sfa = g_sfa;
    cfg.validate()?;
    let grid = s.grid_or(rate_grid(0.0, 180.0, 20.0));
    let topo = build_topology(&cfg.network, cfg.network.seed)?;
    let rec = run_experiment(&s.sweep(grid.clone())?, &cfg, topo, &s.sim_options())?;
    let rates = rec.sweep_rates();
    let (mean, std): (Vec<f64>, Vec<f64>) = rates
        .iter()
        .map(|r| {
            let n = r.len() as f64;
            let m = r.iter().sum::<f64>() / n;
            (m, (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
        })
        .unzip();
    let mf = MeanField::new(&cfg.neuron, &cfg.network, &cfg.hardware);
    let sfa = if g_sfa > 0.0 { SfaMode::SteadyState } else { SfaMode::Off };
    let hw = mf.transfer_curve(&grid, VarianceModel::Hardware, sfa)?;
    let st = mf.transfer_curve(&grid, VarianceModel::Standard, sfa)?;
    let net = &cfg.network;
    let band = grid
        .iter()
        .map(|&f| in_degree_band(&mf, net.n, net.p_rec, net.n_bg, net.p_bg, f, VarianceModel::Hardware))
        .collect::<Result<Vec<_>>>()?;
    let (predicted_mean, predicted_std): (Vec<f64>, Vec<f64>) = band.into_iter().unzip();
    let overlaps = (0..grid.len())
        .filter(|&i| {
            let (a_lo, a_hi) = (mean[i] - std[i], mean[i] + std[i]);
            let (b_lo, b_hi) = (predicted_mean[i] - predicted_std[i], predicted_mean[i] + predicted_std[i]);
            a_lo <= b_hi && b_lo <= a_hi
        })
        .count();
    let curve = OpenLoopCurve {
        g_rec,
        g_sfa,
        rmse_hardware: rmse(&mean, &hw.f_out)?,
        band_overlap: overlaps as f64 / grid.len() as f64,
        f_in: grid,
        mean,
        std,
        meanfield_hardware: hw.f_out,
        meanfield_standard: st.f_out,
        predicted_mean,
        predicted_std,
        throughput: rec.throughput,
    };
    Ok((curve, rec.population.iter().map(|&c| c as f64).collect()))
}

#[derive(Debug, Clone, Serialize)]
pub struct OpenLoopSummary {
    pub curves: Vec<OpenLoopCurve>,
}

/// Population transfer curves for each `g_rec` (at the configured g_SFA)
/// and for each `g_sfa` (at the configured g_rec).
pub fn cmd_open_loop(s: &RunSettings, g_rec_values: &[f64], g_sfa_values: &[f64]) -> Result<(OpenLoopSummary, RunManifest)> {
    let started = Instant::now();
    let base = &s.config.network;
    let mut pairs: Vec<(f64, f64)> = g_rec_values.iter().map(|&g| (g, base.g_sfa)).collect();
    for &g in g_sfa_values {
        if !pairs.contains(&(base.g_rec, g)) {
            pairs.push((base.g_rec, g));
        }
    }
    let mut curves = Vec::new();
    let mut total = Throughput::default();
    for (g_rec, g_sfa) in pairs {
        let (c, _) = open_loop_curve(s, g_rec, g_sfa)?;
        add_throughput(&mut total, &c.throughput);
        curves.push(c);
    }

    let mut out = Outputs::new(&s.out_dir)?;
    let mut tidy = Vec::new();
    for c in &curves {
        tidy.push(TransferCurve::measured(c.f_in.clone(), c.mean.clone(), c.g_rec, c.g_sfa, base.f_bg)?);
        for (variant, f_out) in [(VarianceModel::Hardware, &c.meanfield_hardware), (VarianceModel::Standard, &c.meanfield_standard)] {
            let mut t = TransferCurve::measured(c.f_in.clone(), f_out.clone(), c.g_rec, c.g_sfa, base.f_bg)?;
            t.variant = match variant {
                VarianceModel::Hardware => crate::meanfield::CurveVariant::MeanfieldHardware,
                VarianceModel::Standard => crate::meanfield::CurveVariant::MeanfieldStandard,
            };
            t.sfa_reconstruction = c.g_sfa > 0.0;
            tidy.push(t);
        }
    }
    write_curves_csv(out.create("open_loop_curves.csv")?, &tidy)?;
    {
        let mut w = csv::Writer::from_writer(out.create("open_loop_bands.csv")?);
        w.write_record(["g_rec", "g_sfa", "f_in", "mean", "std", "predicted_mean", "predicted_std"])?;
        for c in &curves {
            for i in 0..c.f_in.len() {
                w.write_record([
                    c.g_rec.to_string(),
                    c.g_sfa.to_string(),
                    c.f_in[i].to_string(),
                    c.mean[i].to_string(),
                    c.std[i].to_string(),
                    c.predicted_mean[i].to_string(),
                    c.predicted_std[i].to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    let summary: Vec<_> = curves
        .iter()
        .map(|c| json!({ "g_rec": c.g_rec, "g_sfa": c.g_sfa, "rmse_hardware_hz": c.rmse_hardware, "band_overlap": c.band_overlap }))
        .collect();
    let manifest = out.finish(
        "open_loop",
        &s.config,
        json!({ "g_rec": g_rec_values, "g_sfa": g_sfa_values, "grid": s.grid, "duration_s": s.duration_s, "threads": s.threads }),
        started,
        total,
        json!(summary),
    )?;
    Ok((OpenLoopSummary { curves }, manifest))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedLoopRun {
    pub g_rec: f64,
    pub g_sfa: f64,
    /// Population rate per 50 ms bin (Hz).
    pub rates: Vec<f64>,
    pub stats: BurstStatistics,
    pub throughput: Throughput,
}

/// Autonomous network from the low-activity initial state.
pub fn closed_loop_run(cfg: &SimConfig, duration_ms: f64, opts: &SimOptions) -> Result<(ClosedLoopRun, crate::netsim::SpikeRecord)> {
    let mut cfg = cfg.clone();
    cfg.network.mode = Mode::ClosedLoop;
    let topo = build_topology(&cfg.network, cfg.network.seed)?;
    let rec = run_experiment(&ExperimentProtocol::closed_loop(duration_ms), &cfg, topo, opts)?;
    let rates = bin_population(&rec.population, rec.n_neurons, DEFAULT_BIN_MS, rec.tick_ms)?;
    let stats = summarize(&detect_bursts(&rates, DEFAULT_THRESHOLD_HZ), DEFAULT_BIN_MS, DEFAULT_THRESHOLD_HZ);
    let run = ClosedLoopRun { g_rec: cfg.network.g_rec, g_sfa: cfg.network.g_sfa, rates, stats, throughput: rec.throughput };
    Ok((run, rec))
}

fn write_rates(out: &mut Outputs, name: &str, runs: &[ClosedLoopRun]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out.create(name)?);
    w.write_record(["g_sfa", "g_rec", "t_ms", "rate_hz"])?;
    for r in runs {
        for (b, x) in r.rates.iter().enumerate() {
            w.write_record([r.g_sfa.to_string(), r.g_rec.to_string(), (b as f64 * DEFAULT_BIN_MS).to_string(), x.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Transient traces at several adaptation strengths (default run 10 s).
pub fn cmd_closed_loop(s: &RunSettings, g_sfa_levels: &[f64]) -> Result<(Vec<ClosedLoopRun>, RunManifest)> {
    let started = Instant::now();
    let duration_ms = s.duration_s.unwrap_or(10.0) * 1e3;
    let mut out = Outputs::new(&s.out_dir)?;
    let mut runs = Vec::new();
    let mut total = Throughput::default();
    for &g in g_sfa_levels {
        let mut cfg = s.config.clone();
        cfg.network.g_sfa = g;
        let (run, rec) = closed_loop_run(&cfg, duration_ms, &s.sim_options())?;
        if s.write_spikes {
            rec.write_csv(out.create(&format!("closed_loop_spikes_gsfa{g}.csv"))?)?;
        }
        add_throughput(&mut total, &run.throughput);
        runs.push(run);
    }
    write_rates(&mut out, "closed_loop_rates.csv", &runs)?;
    let stats: Vec<_> = runs.iter().map(|r| json!({ "g_rec": r.g_rec, "g_sfa": r.g_sfa, "stats": r.stats })).collect();
    out.json("closed_loop_stats.json", &stats)?;
    let summary: Vec<_> = runs
        .iter()
        .map(|r| json!({ "g_sfa": r.g_sfa, "n_bursts": r.stats.n_bursts, "max_rate_hz": r.rates.iter().copied().fold(0.0, f64::max) }))
        .collect();
    let manifest = out.finish(
        "closed_loop",
        &s.config,
        json!({ "g_sfa": g_sfa_levels, "duration_ms": duration_ms, "threads": s.threads }),
        started,
        total,
        json!(summary),
    )?;
    Ok((runs, manifest))
}

/// Length of the transient exemplar kept per phase-plane cell.
const EXEMPLAR_MS: f64 = 10_000.0;

/// Burst statistics over a `(g_SFA, g_rec)` grid, cells run in parallel on
/// `threads` workers (default cell length 100 s).
pub fn cmd_phase_plane(s: &RunSettings, g_sfa: &[f64], g_rec: &[f64]) -> Result<(PhasePlane, RunManifest)> {
    let started = Instant::now();
    let duration_ms = s.duration_s.unwrap_or(100.0) * 1e3;
    let cells: Vec<(f64, f64)> = g_sfa.iter().flat_map(|&a| g_rec.iter().map(move |&b| (a, b))).collect();
    let opts = SimOptions { threads: 1, record_spikes: false, ..Default::default() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let runs: Vec<ClosedLoopRun> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, b)| {
                let mut cfg = s.config.clone();
                cfg.network.g_sfa = a;
                cfg.network.g_rec = b;
                closed_loop_run(&cfg, duration_ms, &opts).map(|(r, _)| r)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let plane = PhasePlane::new(
        g_sfa.to_vec(),
        g_rec.to_vec(),
        runs.iter().map(|r| PhaseCell { g_sfa: r.g_sfa, g_rec: r.g_rec, stats: r.stats.clone() }).collect(),
    )?;

    let mut out = Outputs::new(&s.out_dir)?;
    for q in PhaseQuantity::ALL {
        plane.write_csv(q, out.create(&format!("phase_plane_{}.csv", q.name()))?)?;
    }
    let bins = (EXEMPLAR_MS / DEFAULT_BIN_MS) as usize;
    let exemplars: Vec<ClosedLoopRun> = runs
        .iter()
        .map(|r| ClosedLoopRun { rates: r.rates.iter().take(bins).copied().collect(), ..r.clone() })
        .collect();
    write_rates(&mut out, "phase_plane_exemplars.csv", &exemplars)?;
    out.json("phase_plane_cells.json", &plane.cells)?;
    let mut total = Throughput::default();
    for r in &runs {
        add_throughput(&mut total, &r.throughput);
    }
    let valid = plane.cells.iter().filter(|c| c.stats.valid).count();
    let manifest = out.finish(
        "phase_plane",
        &s.config,
        json!({ "g_sfa": g_sfa, "g_rec": g_rec, "duration_ms": duration_ms, "threads": s.threads }),
        started,
        total,
        json!({ "cells": plane.cells.len(), "valid_cells": valid }),
    )?;
    Ok((plane, manifest))
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldSummary {
    pub curves: Vec<TransferCurve>,
    pub fixed_points: Vec<crate::meanfield::FixedPointSet>,
}

/// Mean-field transfer curves (both variance models) and their fixed points
/// for the configured network.
pub fn cmd_mean_field(s: &RunSettings) -> Result<(MeanFieldSummary, RunManifest)> {
    let started = Instant::now();
    let cfg = &s.config;
    cfg.validate()?;
    let grid = s.grid_or(rate_grid(0.0, 250.0, 0.5));
    let mf = MeanField::new(&cfg.neuron, &cfg.network, &cfg.hardware);
    let sfa = if cfg.network.g_sfa > 0.0 { SfaMode::SteadyState } else { SfaMode::Off };
    let mut out = Outputs::new(&s.out_dir)?;
    let mut curves = Vec::new();
    let mut sets = Vec::new();
    for variance in [VarianceModel::Standard, VarianceModel::Hardware] {
        let curve = mf.transfer_curve(&grid, variance, sfa)?;
        let eval = |f: f64| match sfa {
            SfaMode::Off => mf.rate(f, variance),
            SfaMode::SteadyState => mf.adapted_rate(f, variance).unwrap_or(f64::NAN),
        };
        let set = find_fixed_points(&curve, Some(&eval));
        let name = format!("fixed_points_{}.json", curve.variant.as_str());
        std::io::Write::write_all(&mut out.create(&name)?, fixed_points_json(&curve, &set)?.as_bytes())?;
        curves.push(curve);
        sets.push(set);
    }
    write_curves_csv(out.create("meanfield_curves.csv")?, &curves)?;
    let summary = json!(sets.iter().map(|s| s.points.iter().map(|p| p.rate).collect::<Vec<_>>()).collect::<Vec<_>>());
    let manifest = out.finish("mean_field", cfg, json!({ "grid_points": grid.len() }), started, Throughput::default(), summary)?;
    Ok((MeanFieldSummary { curves, fixed_points: sets }, manifest))
}
