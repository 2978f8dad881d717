//! Drives the emulated neuron and the continuous-time reference with the
//! same input train.

use serde::Serialize;

use crate::engine::{NeuronModel, StpParams};
use crate::error::Result;
use crate::netsim::generate_poisson;
use crate::params::{HardwareConfig, NeuronParams};
use crate::reference::OdeNeuron;
use crate::registers::SynapseKind;

/// Input events `(tick, kind, conductance step in nS)`, sorted by tick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputTrain {
    pub events: Vec<(u32, SynapseKind, f64)>,
    pub ticks: u32,
}

impl InputTrain {
    /// `k_rec` sources at `f_in` with step `g_rec` plus `k_bg` sources at
    /// `f_bg` with step `g_bg`, each an independent Poisson stream.
    #[allow(clippy::too_many_arguments)]
    pub fn poisson(
        k_rec: usize,
        f_in: f64,
        g_rec: f64,
        k_bg: usize,
        f_bg: f64,
        g_bg: f64,
        duration_ms: f64,
        seed: u64,
        tick_ms: f64,
    ) -> Self {
        let mut events = Vec::new();
        for i in 0..k_rec + k_bg {
            let (rate, kind, g) =
                if i < k_rec { (f_in, SynapseKind::Rec, g_rec) } else { (f_bg, SynapseKind::Bg, g_bg) };
            events.extend(generate_poisson(rate, duration_ms, seed, i as u64, tick_ms).into_iter().map(|t| (t, kind, g)));
        }
        events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        InputTrain { events, ticks: (duration_ms / tick_ms).round() as u32 }
    }

    /// Rounds every step to the nearest register weight of `h`, so both
    /// models see identical conductances.
    pub fn quantised(&self, p: &NeuronParams, h: &HardwareConfig) -> Result<Self> {
        let regs = crate::registers::map_params_to_registers(p, h)?;
        let events = self
            .events
            .iter()
            .map(|&(t, k, g)| Ok((t, k, regs.weight_to_conductance(regs.conductance_to_weight(g)?))))
            .collect::<Result<_>>()?;
        Ok(InputTrain { events, ticks: self.ticks })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeuronTrace {
    /// Membrane voltage at the end of every tick (mV).
    pub v: Vec<f64>,
    /// Spike ticks.
    pub spikes: Vec<u32>,
}

impl NeuronTrace {
    pub fn rate(&self, tick_ms: f64) -> f64 {
        self.spikes.len() as f64 / (self.v.len() as f64 * tick_ms * 1e-3)
    }

    pub fn max_abs_difference(&self, other: &NeuronTrace) -> f64 {
        self.v.iter().zip(&other.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Register-level neuron on the given clock.
pub fn run_engine(p: &NeuronParams, h: &HardwareConfig, g_sfa: f64, train: &InputTrain) -> Result<NeuronTrace> {
    let model = NeuronModel::new(p, h, g_sfa, StpParams::STATIC)?;
    let mut n = model.spawn();
    let mut out = NeuronTrace { v: Vec::with_capacity(train.ticks as usize), spikes: Vec::new() };
    let mut ev = train.events.iter().peekable();
    for t in 0..train.ticks {
        while let Some(&&(tk, kind, g)) = ev.peek() {
            if tk != t {
                break;
            }
            n.receive(model.slot(kind), model.regs.conductance_to_weight(g)?);
            ev.next();
        }
        if n.tick(&model, t).is_some() {
            out.spikes.push(t);
        }
        out.v.push(n.membrane.v);
    }
    Ok(out)
}

/// Continuous-time reference with `substeps` integration steps per tick.
pub fn run_reference(p: &NeuronParams, tick_ms: f64, g_sfa: f64, train: &InputTrain, substeps: u32) -> Result<NeuronTrace> {
    let mut n = OdeNeuron::new(*p, g_sfa);
    let dt = tick_ms / substeps as f64;
    let mut out = NeuronTrace { v: Vec::with_capacity(train.ticks as usize), spikes: Vec::new() };
    let mut ev = train.events.iter().peekable();
    for t in 0..train.ticks {
        while let Some(&&(tk, kind, g)) = ev.peek() {
            if tk != t {
                break;
            }
            n.receive(kind, g);
            ev.next();
        }
        let mut fired = false;
        for _ in 0..substeps {
            fired |= n.step(dt)?;
        }
        if fired {
            out.spikes.push(t);
        }
        out.v.push(n.state.v);
    }
    Ok(out)
}
