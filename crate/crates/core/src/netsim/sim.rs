use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::Serialize;

use super::poisson::PoissonSource;
use super::topology::{decode, Topology};
use crate::engine::{NeuronModel, ScNeuron, StpParams};
use crate::error::{Error, Result};
use crate::params::{SimConfig, SpikeEvent};
use crate::registers::SynapseKind;

/// Neurons per parallel work item.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct SimOptions {
    /// Worker threads for the neuron update; 1 runs on the calling thread.
    pub threads: usize,
    /// Keep every emitted spike, not only per-tick population counts.
    pub record_spikes: bool,
    /// Upper bound on the memory held by in-flight pulses.
    pub memory_budget_bytes: usize,
    pub stp: StpParams,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { threads: 1, record_spikes: true, memory_budget_bytes: 256 << 20, stp: StpParams::STATIC }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Throughput {
    pub ticks: u64,
    pub spikes: u64,
    pub synaptic_events: u64,
    pub wall_seconds: f64,
    pub events_per_second: f64,
}

/// Tick-synchronous network: deliver due pulses, update every neuron, route
/// the emitted spikes.
pub struct Simulation {
    model: NeuronModel,
    topo: Topology,
    neurons: Vec<ScNeuron>,
    /// Register weight per connection, indexed by `SynapseKind as usize`.
    conn_weight: [u32; 2],
    slot: [usize; 2],
    max_pulse_weight: u32,
    wheel: Vec<Vec<(u32, u8)>>,
    pending: usize,
    budget_entries: usize,
    budget_bytes: usize,
    external: BTreeMap<u32, Vec<(u32, u8)>>,
    sources: Vec<PoissonSource>,
    queue: BinaryHeap<Reverse<(u32, u32)>>,
    first_poisson: u32,
    t: u32,
    tick_ms: f64,
    record_spikes: bool,
    spikes: Vec<SpikeEvent>,
    population: Vec<u32>,
    per_neuron: Vec<u32>,
    fired: Vec<(u32, u8)>,
    emitted: Vec<(u32, u8)>,
    synaptic_events: u64,
    n_spikes: u64,
    pool: Option<rayon::ThreadPool>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig, topo: Topology, opts: &SimOptions) -> Result<Self> {
        cfg.validate()?;
        let net = &cfg.network;
        let model = NeuronModel::new(&cfg.neuron, &cfg.hardware, net.g_sfa, opts.stp)?;
        let conn_weight = [model.regs.conductance_to_weight(net.g_rec)?, model.regs.conductance_to_weight(net.g_bg)?];
        let slot = [model.slot(SynapseKind::Rec), model.slot(SynapseKind::Bg)];
        let max_delay = *topo.delays.iter().max().unwrap_or(&1) as usize;
        let neurons = (0..topo.n_neurons).map(|_| model.spawn()).collect();
        let tick_ms = cfg.hardware.tick;
        let first_poisson = topo.bg_offset();
        let seed = net.seed;
        let sources: Vec<PoissonSource> = (0..topo.n_bg + topo.n_stim)
            .map(|i| {
                let id = first_poisson as u64 + i as u64;
                let rate = if i < topo.n_bg { net.f_bg } else { 0.0 };
                PoissonSource::new(seed, id, rate, tick_ms)
            })
            .collect();
        let pool = if opts.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(opts.threads)
                    .build()
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?,
            )
        } else {
            None
        };
        let entry = std::mem::size_of::<(u32, u8)>();
        let mut sim = Simulation {
            max_pulse_weight: model.max_stp_weight as u32,
            per_neuron: vec![0; topo.n_neurons],
            model,
            neurons,
            conn_weight,
            slot,
            wheel: vec![Vec::new(); max_delay + 1],
            pending: 0,
            budget_entries: opts.memory_budget_bytes / entry,
            budget_bytes: opts.memory_budget_bytes,
            external: BTreeMap::new(),
            sources,
            queue: BinaryHeap::new(),
            first_poisson,
            t: 0,
            tick_ms,
            record_spikes: opts.record_spikes,
            spikes: Vec::new(),
            population: Vec::new(),
            fired: Vec::new(),
            emitted: Vec::new(),
            synaptic_events: 0,
            n_spikes: 0,
            pool,
            topo,
        };
        sim.rebuild_queue();
        Ok(sim)
    }

    fn rebuild_queue(&mut self) {
        self.queue.clear();
        for (i, s) in self.sources.iter().enumerate() {
            if let Some(t) = s.next_tick() {
                self.queue.push(Reverse((t, i as u32)));
            }
        }
    }

    pub fn time(&self) -> u32 {
        self.t
    }

    pub fn tick_ms(&self) -> f64 {
        self.tick_ms
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn model(&self) -> &NeuronModel {
        &self.model
    }

    pub fn neurons(&self) -> &[ScNeuron] {
        &self.neurons
    }

    /// Sets the rate of every stimulus source from the current tick on.
    pub fn set_stimulus_rate(&mut self, rate: f64) {
        let t_ms = self.t as f64 * self.tick_ms;
        let n_bg = self.topo.n_bg;
        for s in &mut self.sources[n_bg..] {
            s.set_rate(rate, t_ms);
        }
        self.rebuild_queue();
    }

    /// Sets the rate of every background source from the current tick on.
    pub fn set_background_rate(&mut self, rate: f64) {
        let t_ms = self.t as f64 * self.tick_ms;
        let n_bg = self.topo.n_bg;
        for s in &mut self.sources[..n_bg] {
            s.set_rate(rate, t_ms);
        }
        self.rebuild_queue();
    }

    /// Schedules a pulse from external input `index` to arrive at `tick`.
    /// Returns false, without side effects, if that tick has already been
    /// simulated.
    pub fn inject(&mut self, index: u32, tick: u32, weight: u8) -> Result<bool> {
        if index as usize >= self.topo.n_ext {
            return Err(Error::UnknownSource(self.topo.ext_offset() + index));
        }
        if tick < self.t {
            return Ok(false);
        }
        self.external.entry(tick).or_default().push((self.topo.ext_offset() + index, weight));
        Ok(true)
    }

    #[inline]
    fn deliver(neurons: &mut [ScNeuron], topo: &Topology, conn: &[u32; 2], slot: &[usize; 2], src: u32, w: u8) -> u64 {
        let targets = topo.raw_fan_out(src);
        for &raw in targets {
            let (n, kind) = decode(raw);
            let k = kind as usize;
            let eff = (conn[k] * w as u32 + 31) / 63;
            neurons[n as usize].receive(slot[k], eff);
        }
        targets.len() as u64
    }

    /// Advances one tick and returns the neurons that fired in it.
    pub fn step(&mut self) -> Result<&[(u32, u8)]> {
        let t = self.t;
        let len = self.wheel.len();
        let due = std::mem::take(&mut self.wheel[t as usize % len]);
        self.pending -= due.len();
        for &(src, w) in &due {
            self.synaptic_events +=
                Self::deliver(&mut self.neurons, &self.topo, &self.conn_weight, &self.slot, src, w);
        }
        let mut due = due;
        due.clear();
        self.wheel[t as usize % len] = due;
        if self.external.first_key_value().is_some_and(|(&k, _)| k == t) {
            let (_, ext) = self.external.pop_first().expect("checked");
            for (src, w) in ext {
                self.synaptic_events +=
                    Self::deliver(&mut self.neurons, &self.topo, &self.conn_weight, &self.slot, src, w);
            }
        }

        self.fired.clear();
        let model = &self.model;
        match &self.pool {
            None => {
                for (i, n) in self.neurons.iter_mut().enumerate() {
                    if let Some(w) = n.tick(model, t) {
                        self.fired.push((i as u32, w));
                    }
                }
            }
            Some(pool) => {
                let neurons = &mut self.neurons;
                let parts: Vec<Vec<(u32, u8)>> = pool.install(|| {
                    neurons
                        .par_chunks_mut(CHUNK)
                        .enumerate()
                        .map(|(c, chunk)| {
                            let mut out = Vec::new();
                            for (i, n) in chunk.iter_mut().enumerate() {
                                if let Some(w) = n.tick(model, t) {
                                    out.push(((c * CHUNK + i) as u32, w));
                                }
                            }
                            out
                        })
                        .collect()
                });
                self.fired.extend(parts.into_iter().flatten());
            }
        }

        self.emitted.clear();
        self.emitted.extend_from_slice(&self.fired);
        let pulse = self.max_pulse_weight as u8;
        while let Some(&Reverse((tk, i))) = self.queue.peek() {
            if tk != t {
                debug_assert!(tk > t);
                break;
            }
            self.queue.pop();
            let src = &mut self.sources[i as usize];
            let n = src.pop_tick(t);
            for _ in 0..n {
                self.emitted.push((self.first_poisson + i, pulse));
            }
            if let Some(next) = src.next_tick() {
                self.queue.push(Reverse((next, i)));
            }
        }

        for &d in &self.topo.delays {
            let slot = (t as usize + d as usize) % len;
            self.wheel[slot].extend_from_slice(&self.emitted);
        }
        self.pending += self.emitted.len() * self.topo.delays.len();
        if self.pending > self.budget_entries {
            return Err(Error::BufferOverflow { budget: self.budget_bytes });
        }

        for &(i, w) in &self.fired {
            self.per_neuron[i as usize] += 1;
            if self.record_spikes {
                self.spikes.push(SpikeEvent::new(t, i, w));
            }
        }
        self.n_spikes += self.fired.len() as u64;
        self.population.push(self.fired.len() as u32);
        self.t += 1;
        Ok(&self.fired)
    }

    pub fn run_ticks(&mut self, ticks: u32) -> Result<()> {
        for _ in 0..ticks {
            self.step()?;
        }
        Ok(())
    }

    /// Spike counts per neuron since the last reset.
    pub fn per_neuron_counts(&self) -> &[u32] {
        &self.per_neuron
    }

    pub fn reset_per_neuron_counts(&mut self) {
        self.per_neuron.iter_mut().for_each(|c| *c = 0);
    }

    /// Number of spikes in each simulated tick.
    pub fn population_counts(&self) -> &[u32] {
        &self.population
    }

    pub fn spikes(&self) -> &[SpikeEvent] {
        &self.spikes
    }

    pub fn take_spikes(&mut self) -> Vec<SpikeEvent> {
        std::mem::take(&mut self.spikes)
    }

    pub fn take_population_counts(&mut self) -> Vec<u32> {
        std::mem::take(&mut self.population)
    }

    pub fn synaptic_events(&self) -> u64 {
        self.synaptic_events
    }

    pub fn spike_count(&self) -> u64 {
        self.n_spikes
    }

    pub fn pending_pulses(&self) -> usize {
        self.pending + self.external.values().map(Vec::len).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::super::topology::{build_fixed_in_degree, build_topology, with_external_inputs};
    use super::*;
    use crate::params::NetworkConfig;

    fn small_cfg() -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.network = NetworkConfig { n: 400, p_rec: 20.0 / 400.0, ..Default::default() };
        cfg
    }

    #[test]
    fn background_only_network_stays_low() {
        let cfg = SimConfig { network: NetworkConfig { g_rec: 0.0, ..small_cfg().network }, ..small_cfg() };
        let topo = build_topology(&cfg.network, 1).unwrap();
        let mut sim = Simulation::new(&cfg, topo, &SimOptions::default()).unwrap();
        sim.run_ticks(10_000).unwrap();
        let rate = sim.spike_count() as f64 / 400.0;
        assert!(rate < 10.0, "{rate}");
    }

    #[test]
    fn synaptic_events_match_fan_out() {
        let cfg = small_cfg();
        let topo = build_topology(&cfg.network, 2).unwrap();
        let mut sim = Simulation::new(&cfg, topo, &SimOptions::default()).unwrap();
        sim.run_ticks(3000).unwrap();
        let pending = sim.pending_pulses() as u64;
        assert!(pending < 1000);
        let spikes = sim.spikes().to_vec();
        let topo = sim.topology();
        let from_neurons: u64 = spikes.iter().map(|s| topo.fan_out_len(s.source) as u64).sum();
        // every neuron spike emitted before the last tick was delivered once
        let last = sim.time() - 1;
        let undelivered: u64 =
            spikes.iter().filter(|s| s.time == last).map(|s| topo.fan_out_len(s.source) as u64).sum();
        assert!(sim.synaptic_events() >= from_neurons - undelivered);
        assert_eq!(sim.spike_count() as usize, spikes.len());
        assert_eq!(sim.population_counts().iter().map(|&c| c as usize).sum::<usize>(), spikes.len());
    }

    #[test]
    fn thread_count_does_not_change_spikes() {
        let cfg = small_cfg();
        let run = |threads| {
            let topo = build_topology(&cfg.network, 4).unwrap();
            let opts = SimOptions { threads, ..Default::default() };
            let mut sim = Simulation::new(&cfg, topo, &opts).unwrap();
            sim.run_ticks(5000).unwrap();
            sim.take_spikes()
        };
        let a = run(1);
        assert!(!a.is_empty());
        assert_eq!(a, run(2));
        assert_eq!(a, run(3));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let cfg = small_cfg();
        let topo = build_topology(&cfg.network, 1).unwrap();
        let opts = SimOptions { memory_budget_bytes: 8, ..Default::default() };
        let mut sim = Simulation::new(&cfg, topo, &opts).unwrap();
        let err = sim.run_ticks(1000).unwrap_err();
        assert!(matches!(err, Error::BufferOverflow { .. }));
    }

    #[test]
    fn injected_pulse_arrives_at_its_tick() {
        let mut cfg = SimConfig::default();
        cfg.network.g_rec = 12.0;
        let base = build_fixed_in_degree(1, 0, 0, false, &[1]).unwrap();
        let topo = with_external_inputs(&base, &[vec![0]]).unwrap();
        let mut sim = Simulation::new(&cfg, topo, &SimOptions::default()).unwrap();
        for k in 0..8 {
            assert!(sim.inject(0, 100 + k, 63).unwrap());
        }
        sim.run_ticks(100).unwrap();
        assert_eq!(sim.neurons()[0].synapses[0].gsyn, 0);
        sim.step().unwrap();
        let g = sim.neurons()[0].synapses[0].gsyn;
        assert!(g > sim.conn_weight[0] * 63 / 64 && g <= sim.conn_weight[0]);
        assert!(!sim.inject(0, 50, 63).unwrap());
        assert!(sim.inject(1, 500, 63).is_err());
    }
}
