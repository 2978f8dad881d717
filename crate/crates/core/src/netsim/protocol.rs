use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::sim::{SimOptions, Simulation, Throughput};
use super::topology::Topology;
use crate::error::{Error, Result};
use crate::params::{Mode, SimConfig, SpikeEvent};

/// Schedule of an experiment. Sweeps drive the stimulus population through
/// `grid`; every point is stimulated for `stim_ms`, the first `discard_ms`
/// are ignored, and a `gap_ms` pause without stimulus follows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentProtocol {
    Sweep { grid: Vec<f64>, stim_ms: f64, discard_ms: f64, gap_ms: f64 },
    ClosedLoop { duration_ms: f64 },
}

impl ExperimentProtocol {
    pub fn sweep(grid: Vec<f64>) -> Self {
        ExperimentProtocol::Sweep { grid, stim_ms: 2000.0, discard_ms: 1000.0, gap_ms: 500.0 }
    }

    pub fn closed_loop(duration_ms: f64) -> Self {
        ExperimentProtocol::ClosedLoop { duration_ms }
    }

    /// Default statistics run length.
    pub fn closed_loop_default() -> Self {
        Self::closed_loop(500_000.0)
    }

    pub fn duration_ms(&self) -> f64 {
        match self {
            ExperimentProtocol::Sweep { grid, stim_ms, gap_ms, .. } => grid.len() as f64 * (stim_ms + gap_ms),
            ExperimentProtocol::ClosedLoop { duration_ms } => *duration_ms,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ExperimentProtocol::Sweep { grid, stim_ms, discard_ms, gap_ms } => {
                crate::meanfield::check_grid(grid)?;
                if !(*stim_ms > *discard_ms && *discard_ms >= 0.0 && *gap_ms >= 0.0) {
                    return Err(Error::InvalidArgument("sweep needs stim_ms > discard_ms >= 0, gap_ms >= 0".into()));
                }
            }
            ExperimentProtocol::ClosedLoop { duration_ms } => {
                if !(*duration_ms > 0.0) {
                    return Err(Error::InvalidArgument("duration must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Per-neuron spike counts inside the measurement window of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub f_in: f64,
    pub start_tick: u32,
    pub end_tick: u32,
    pub counts: Vec<u32>,
}

impl SweepPoint {
    pub fn window_s(&self, tick_ms: f64) -> f64 {
        (self.end_tick - self.start_tick) as f64 * tick_ms * 1e-3
    }

    pub fn rates(&self, tick_ms: f64) -> Vec<f64> {
        let w = self.window_s(tick_ms);
        self.counts.iter().map(|&c| c as f64 / w).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpikeRecord {
    pub n_neurons: usize,
    pub duration_ticks: u32,
    pub tick_ms: f64,
    /// Empty unless spike recording was requested.
    pub spikes: Vec<SpikeEvent>,
    /// Number of spikes per tick.
    pub population: Vec<u32>,
    pub sweep: Vec<SweepPoint>,
    pub throughput: Throughput,
}

impl SpikeRecord {
    /// Per-neuron rate matrix `[point][neuron]` of a sweep.
    pub fn sweep_rates(&self) -> Vec<Vec<f64>> {
        self.sweep.iter().map(|p| p.rates(self.tick_ms)).collect()
    }

    /// Population-mean rate at every sweep point.
    pub fn mean_curve(&self) -> (Vec<f64>, Vec<f64>) {
        let f_in = self.sweep.iter().map(|p| p.f_in).collect();
        let f_out = self
            .sweep_rates()
            .iter()
            .map(|r| r.iter().sum::<f64>() / r.len().max(1) as f64)
            .collect();
        (f_in, f_out)
    }

    /// CSV with columns `time_tick,neuron_id`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_tick", "neuron_id"])?;
        for s in &self.spikes {
            w.write_record([s.time.to_string(), s.source.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `proto` on a fresh network. Sweeps require a topology with a
/// stimulus population (open-loop or single-neuron mode).
pub fn run_experiment(
    proto: &ExperimentProtocol,
    cfg: &SimConfig,
    topo: Topology,
    opts: &SimOptions,
) -> Result<SpikeRecord> {
    proto.validate()?;
    let tick_ms = cfg.hardware.tick;
    let ticks = |ms: f64| (ms / tick_ms).round() as u32;
    let started = Instant::now();
    let mut sim = Simulation::new(cfg, topo, opts)?;
    let mut sweep = Vec::new();
    match proto {
        ExperimentProtocol::Sweep { grid, stim_ms, discard_ms, gap_ms } => {
            if sim.topology().n_stim == 0 {
                return Err(Error::config("a sweep needs a stimulus population (open_loop or single_neuron mode)"));
            }
            for &f_in in grid {
                sim.set_stimulus_rate(f_in);
                sim.run_ticks(ticks(*discard_ms))?;
                sim.reset_per_neuron_counts();
                let start = sim.time();
                sim.run_ticks(ticks(*stim_ms) - ticks(*discard_ms))?;
                sweep.push(SweepPoint {
                    f_in,
                    start_tick: start,
                    end_tick: sim.time(),
                    counts: sim.per_neuron_counts().to_vec(),
                });
                sim.set_stimulus_rate(0.0);
                sim.run_ticks(ticks(*gap_ms))?;
            }
        }
        ExperimentProtocol::ClosedLoop { duration_ms } => {
            if cfg.network.mode != Mode::ClosedLoop {
                return Err(Error::config("closed-loop protocol requires closed_loop mode"));
            }
            sim.run_ticks(ticks(*duration_ms))?;
        }
    }
    let wall = started.elapsed().as_secs_f64();
    let throughput = Throughput {
        ticks: sim.time() as u64,
        spikes: sim.spike_count(),
        synaptic_events: sim.synaptic_events(),
        wall_seconds: wall,
        events_per_second: sim.synaptic_events() as f64 / wall.max(1e-9),
    };
    Ok(SpikeRecord {
        n_neurons: sim.topology().n_neurons,
        duration_ticks: sim.time(),
        tick_ms,
        spikes: sim.take_spikes(),
        population: sim.take_population_counts(),
        sweep,
        throughput,
    })
}

#[cfg(test)]
mod tests {
    use super::super::topology::build_topology;
    use super::*;
    use crate::params::NetworkConfig;

    #[test]
    fn sweep_windows_follow_schedule() {
        let mut cfg = SimConfig::default();
        cfg.network = NetworkConfig { n: 8, mode: Mode::SingleNeuron, ..Default::default() };
        let topo = build_topology(&cfg.network, 1).unwrap();
        let proto = ExperimentProtocol::Sweep { grid: vec![0.0, 50.0], stim_ms: 200.0, discard_ms: 100.0, gap_ms: 50.0 };
        let rec = run_experiment(&proto, &cfg, topo, &SimOptions::default()).unwrap();
        assert_eq!(rec.duration_ticks, 5000);
        assert_eq!((rec.sweep[0].start_tick, rec.sweep[0].end_tick), (1000, 2000));
        assert_eq!((rec.sweep[1].start_tick, rec.sweep[1].end_tick), (3500, 4500));
        for p in &rec.sweep {
            let in_window = rec.spikes.iter().filter(|s| s.time >= p.start_tick && s.time < p.end_tick).count();
            assert_eq!(in_window as u32, p.counts.iter().sum::<u32>());
        }
    }

    #[test]
    fn closed_loop_needs_closed_mode() {
        let mut cfg = SimConfig::default();
        cfg.network = NetworkConfig { n: 8, mode: Mode::SingleNeuron, ..Default::default() };
        let topo = build_topology(&cfg.network, 1).unwrap();
        assert!(run_experiment(&ExperimentProtocol::closed_loop(10.0), &cfg, topo, &SimOptions::default()).is_err());
    }

    #[test]
    fn spike_csv_header() {
        let rec = SpikeRecord {
            n_neurons: 1,
            duration_ticks: 3,
            tick_ms: 0.1,
            spikes: vec![SpikeEvent::new(2, 0, 63)],
            population: vec![0, 0, 1],
            sweep: vec![],
            throughput: Throughput::default(),
        };
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time_tick,neuron_id\n2,0\n");
    }
}
