use serde::Serialize;
use smallvec::SmallVec;

use super::membrane::MembraneState;
use super::stp::{StpParams, StpState};
use super::synapse::{PhaseAccumulator, SynapseRegisterState};
use crate::error::Result;
use crate::params::{HardwareConfig, NeuronParams};
use crate::registers::{map_params_to_registers, RegisterSettings, SynapseKind, SynapseSettings};

/// Population-wide configuration of the emulated neuron. Projections whose
/// synapse kinds share time constant and reversal potential drive the same
/// multi-synapse register.
#[derive(Debug, Clone, Serialize)]
pub struct NeuronModel {
    pub regs: RegisterSettings,
    pub v_rest: f64,
    pub v_reset: f64,
    pub v_thresh: f64,
    pub tick_ms: f64,
    pub stp: StpParams,
    pub max_stp_weight: u8,
    /// Register weight deposited into the adaptation synapse per own spike.
    pub sfa_weight: u32,
    slots: SmallVec<[SynapseSettings; 5]>,
    slot_of: [u8; 3],
}

impl NeuronModel {
    pub fn new(p: &NeuronParams, h: &HardwareConfig, g_sfa: f64, stp: StpParams) -> Result<Self> {
        let regs = map_params_to_registers(p, h)?;
        let sfa_weight = regs.conductance_to_weight(g_sfa)?;
        let mut slots: SmallVec<[SynapseSettings; 5]> = SmallVec::new();
        let mut slot_of = [0u8; 3];
        for (i, kind) in SynapseKind::ALL.iter().enumerate() {
            let s = *regs.synapse(*kind);
            // the adaptation synapse is a separate circuit fed by the neuron itself
            let shared = if *kind == SynapseKind::Sfa {
                None
            } else {
                slots.iter().position(|o| o.tau_syn == s.tau_syn && o.e_syn == s.e_syn)
            };
            slot_of[i] = match shared {
                Some(k) => k as u8,
                None => {
                    slots.push(s);
                    (slots.len() - 1) as u8
                }
            };
        }
        Ok(NeuronModel {
            v_rest: p.v_rest,
            v_reset: p.v_reset,
            v_thresh: p.v_thresh,
            tick_ms: h.tick,
            stp,
            max_stp_weight: h.max_stp_weight(),
            sfa_weight,
            regs,
            slots,
            slot_of,
        })
    }

    pub fn slot(&self, kind: SynapseKind) -> usize {
        self.slot_of[kind as usize] as usize
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    /// Fresh neuron at rest with cleared registers.
    pub fn spawn(&self) -> ScNeuron {
        ScNeuron {
            membrane: MembraneState::at(self.v_rest),
            leak: PhaseAccumulator::new(self.regs.phase_width, self.regs.delta_gsyn),
            synapses: self.slots.iter().map(|s| SynapseRegisterState::new(s, &self.regs)).collect(),
            stp: StpState::new(self.stp),
        }
    }
}

/// One emulated neuron: leak oscillator, multi-synapse registers, membrane
/// and output plasticity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScNeuron {
    pub membrane: MembraneState,
    pub leak: PhaseAccumulator,
    pub synapses: SmallVec<[SynapseRegisterState; 4]>,
    pub stp: StpState,
}

impl ScNeuron {
    #[inline]
    pub fn receive(&mut self, slot: usize, weight: u32) {
        self.synapses[slot].accumulate_weight(weight, 1);
    }

    /// Advances one tick. Weights delivered for this tick must already have
    /// been accumulated. Returns the output weight if the neuron fired.
    pub fn tick(&mut self, model: &NeuronModel, t: u32) -> Option<u8> {
        let cycles = model.regs.cycles_per_tick;
        let refractory = self.membrane.is_refractory(t);
        // (cycle, source): source 0 is the leak, k + 1 is synapse k
        let mut events: SmallVec<[(u64, u8); 8]> = SmallVec::new();
        if refractory {
            self.leak.run(model.regs.leak_increment, cycles, 0, |_| {});
            for syn in self.synapses.iter_mut() {
                syn.advance(cycles, |_| {});
            }
            return None;
        }
        self.leak.run(model.regs.leak_increment, cycles, 0, |c| events.push((c, 0)));
        for (k, syn) in self.synapses.iter_mut().enumerate() {
            syn.advance(cycles, |c| events.push((c, k as u8 + 1)));
        }
        if events.len() > 1 {
            events.sort_unstable();
        }
        let alpha = model.regs.alpha;
        for &(_, src) in &events {
            let e = if src == 0 { model.v_rest } else { self.synapses[src as usize - 1].e_syn };
            self.membrane.apply_switch(e, alpha);
        }
        if self.membrane.v >= model.v_thresh {
            Some(self.fire(model, t))
        } else {
            None
        }
    }

    fn fire(&mut self, model: &NeuronModel, t: u32) -> u8 {
        let m = &mut self.membrane;
        let dt = match m.last_spike {
            Some(prev) => (t - prev) as f64 * model.tick_ms,
            None => f64::INFINITY,
        };
        m.v = model.v_reset;
        m.refrac_until = t + model.regs.refrac_ticks;
        m.last_spike = Some(t);
        let sfa = model.slot(SynapseKind::Sfa);
        self.synapses[sfa].accumulate_weight(model.sfa_weight, 1);
        self.stp.on_spike(dt, model.max_stp_weight)
    }
}
