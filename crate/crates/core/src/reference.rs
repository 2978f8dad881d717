//! Continuous-time conductance-based integrate-and-fire neuron.
//!
//! Conductances decay exactly between inputs; the membrane is advanced with
//! exponential Euler using the step-averaged conductances. Threshold, reset
//! and refractory handling follow the emulated neuron.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::NeuronParams;
use crate::registers::SynapseKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState {
    /// mV
    pub v: f64,
    /// Conductance per synapse kind (nS), indexed by `SynapseKind as usize`.
    pub g: [f64; 3],
    /// ms
    pub t: f64,
    pub refrac_until: f64,
    pub last_spike: Option<f64>,
}

impl OdeState {
    /// Synaptic current (nA), excluding adaptation.
    pub fn i_syn(&self, p: &NeuronParams) -> f64 {
        1e-3 * (self.g[0] * (p.e_syn_rec - self.v) + self.g[1] * (p.e_syn_bg - self.v))
    }

    /// Adaptation current (nA); negative above `E_sfa`.
    pub fn i_sfa(&self, p: &NeuronParams) -> f64 {
        1e-3 * self.g[2] * (p.e_sfa - self.v)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeNeuron {
    pub params: NeuronParams,
    /// Conductance step per own spike (nS).
    pub g_sfa: f64,
    pub state: OdeState,
}

impl OdeNeuron {
    pub fn new(params: NeuronParams, g_sfa: f64) -> Self {
        let state = OdeState { v: params.v_rest, g: [0.0; 3], t: 0.0, refrac_until: 0.0, last_spike: None };
        OdeNeuron { params, g_sfa, state }
    }

    fn tau(&self, k: usize) -> f64 {
        match k {
            0 => self.params.tau_syn_rec,
            1 => self.params.tau_syn_bg,
            _ => self.params.tau_sfa,
        }
    }

    fn reversal(&self, k: usize) -> f64 {
        match k {
            0 => self.params.e_syn_rec,
            1 => self.params.e_syn_bg,
            _ => self.params.e_sfa,
        }
    }

    pub fn receive(&mut self, kind: SynapseKind, g_ns: f64) {
        self.state.g[kind as usize] += g_ns;
    }

    /// Advances by `dt` ms. Inputs arriving in `[t, t + dt)` must have been
    /// delivered with [`OdeNeuron::receive`]. Returns true on a spike.
    pub fn step(&mut self, dt: f64) -> Result<bool> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let p = self.params;
        let g_mem = p.g_mem();
        let mut g_sum = g_mem;
        let mut drive = g_mem * p.v_rest;
        for k in 0..3 {
            let tau = self.tau(k);
            let decay = (-dt / tau).exp();
            let g0 = self.state.g[k];
            let g_avg = g0 * tau / dt * (1.0 - decay);
            g_sum += g_avg;
            drive += g_avg * self.reversal(k);
            self.state.g[k] = g0 * decay;
        }
        let t_end = self.state.t + dt;
        let s = &mut self.state;
        if s.t + 1e-9 < s.refrac_until {
            s.v = p.v_reset;
            s.t = t_end;
            return Ok(false);
        }
        let v_inf = drive / g_sum;
        // g in nS, C in nF: g / C has units of 1/s
        let rate = g_sum / p.c_mem * 1e-3;
        s.v = v_inf + (s.v - v_inf) * (-dt * rate).exp();
        s.t = t_end;
        if s.v >= p.v_thresh {
            s.v = p.v_reset;
            s.refrac_until = t_end + p.t_refrac;
            s.last_spike = Some(t_end);
            s.g[SynapseKind::Sfa as usize] += self.g_sfa;
            return Ok(true);
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxes_with_membrane_time_constant() {
        let p = NeuronParams::default();
        let mut n = OdeNeuron::new(p, 0.0);
        n.state.v = -55.0;
        let dt = 0.01;
        for _ in 0..(p.tau_mem / dt).round() as usize {
            n.step(dt).unwrap();
        }
        let want = p.v_rest + 10.0 / std::f64::consts::E;
        assert!(((n.state.v - want) / (want - p.v_rest)).abs() < 1e-3);
    }

    #[test]
    fn conductance_decays_exactly() {
        let mut n = OdeNeuron::new(NeuronParams::default(), 0.0);
        n.receive(SynapseKind::Rec, 5.0);
        let dt = 0.01;
        for i in 1..=1000 {
            n.step(dt).unwrap();
            let want = 5.0 * (-(i as f64) * dt / 8.0).exp();
            assert!((n.state.g[0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reversal_at_rest_leaves_voltage_unchanged() {
        let p = NeuronParams { e_syn_rec: -65.0, e_syn_bg: -65.0, e_sfa: -65.0, ..Default::default() };
        let mut n = OdeNeuron::new(p, 0.0);
        for i in 0..10_000 {
            if i % 7 == 0 {
                n.receive(SynapseKind::Rec, 50.0);
                n.receive(SynapseKind::Bg, 20.0);
            }
            n.step(0.01).unwrap();
            assert!((n.state.v - -65.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_positive_step() {
        let mut n = OdeNeuron::new(NeuronParams::default(), 0.0);
        assert!(n.step(0.0).is_err());
        assert!(n.step(-1.0).is_err());
    }

    #[test]
    fn halving_step_converges() {
        let p = NeuronParams { v_thresh: 0.0, ..Default::default() };
        let trace = |dt: f64| {
            let mut n = OdeNeuron::new(p, 0.0);
            let per_tick = (0.1 / dt).round() as usize;
            let mut out = Vec::new();
            for tick in 0..10_000 {
                if tick % 37 == 0 {
                    n.receive(SynapseKind::Rec, 8.0);
                }
                for _ in 0..per_tick {
                    n.step(dt).unwrap();
                }
                out.push(n.state.v);
            }
            out
        };
        let a = trace(0.01);
        let b = trace(0.005);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn spike_resets_and_adapts() {
        let p = NeuronParams::default();
        let mut n = OdeNeuron::new(p, 4.0);
        n.state.v = -49.0;
        n.receive(SynapseKind::Rec, 1000.0);
        assert!(n.step(0.01).unwrap());
        assert_eq!(n.state.v, p.v_reset);
        assert_eq!(n.state.g[2], 4.0);
        for _ in 0..240 {
            assert!(!n.step(0.01).unwrap());
            assert_eq!(n.state.v, p.v_reset);
        }
    }
}
