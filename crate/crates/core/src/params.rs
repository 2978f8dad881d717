//! Model, network and hardware parameters.
//!
//! Units follow the biological convention throughout: voltages in mV,
//! capacitance in nF, times in ms, conductances in nS and rates in Hz.
//! Conversions to SI live in [`units`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit conversions. All pure.
pub mod units {
    pub fn mv_to_v(mv: f64) -> f64 {
        mv * 1e-3
    }
    pub fn v_to_mv(v: f64) -> f64 {
        v * 1e3
    }
    pub fn ms_to_s(ms: f64) -> f64 {
        ms * 1e-3
    }
    pub fn s_to_ms(s: f64) -> f64 {
        s * 1e3
    }
    pub fn ns_to_s(ns: f64) -> f64 {
        ns * 1e-9
    }
    pub fn s_to_ns(siemens: f64) -> f64 {
        siemens * 1e9
    }
    pub fn nf_to_f(nf: f64) -> f64 {
        nf * 1e-9
    }
}

/// Parameters shared by every neuron of the excitatory population.
///
/// Conductance amplitudes are not stored here; they belong to the
/// projections and live in [`NetworkConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuronParams {
    pub v_rest: f64,
    pub v_reset: f64,
    pub v_thresh: f64,
    #[serde(rename = "C_mem")]
    pub c_mem: f64,
    pub tau_mem: f64,
    #[serde(rename = "T_refrac")]
    pub t_refrac: f64,
    pub tau_syn_rec: f64,
    #[serde(rename = "E_syn_rec")]
    pub e_syn_rec: f64,
    pub tau_syn_bg: f64,
    #[serde(rename = "E_syn_bg")]
    pub e_syn_bg: f64,
    pub tau_sfa: f64,
    #[serde(rename = "E_sfa")]
    pub e_sfa: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            v_rest: -65.0,
            v_reset: -80.0,
            v_thresh: -50.0,
            c_mem: 1.0,
            tau_mem: 8.0,
            t_refrac: 2.5,
            tau_syn_rec: 8.0,
            e_syn_rec: 0.0,
            tau_syn_bg: 8.0,
            e_syn_bg: 0.0,
            tau_sfa: 330.0,
            e_sfa: -80.0,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.v_rest,
            self.v_reset,
            self.v_thresh,
            self.c_mem,
            self.tau_mem,
            self.t_refrac,
            self.tau_syn_rec,
            self.e_syn_rec,
            self.tau_syn_bg,
            self.e_syn_bg,
            self.tau_sfa,
            self.e_sfa,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("neuron parameters must be finite"));
        }
        if !(self.v_reset <= self.v_rest && self.v_rest < self.v_thresh) {
            return Err(Error::config("require v_reset <= v_rest < v_thresh"));
        }
        let positive = [
            ("C_mem", self.c_mem),
            ("tau_mem", self.tau_mem),
            ("tau_syn_rec", self.tau_syn_rec),
            ("tau_syn_bg", self.tau_syn_bg),
            ("tau_sfa", self.tau_sfa),
        ];
        for (name, value) in positive {
            if value <= 0.0 {
                return Err(Error::config(format!("{name} must be strictly positive")));
            }
        }
        if self.t_refrac < 0.0 {
            return Err(Error::config("T_refrac must be non-negative"));
        }
        Ok(())
    }

    /// Leak conductance in nS (nF / ms = 1e-6 S, hence the factor).
    pub fn g_mem(&self) -> f64 {
        self.c_mem / self.tau_mem * 1e3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OpenLoop,
    ClosedLoop,
    SingleNeuron,
}

/// Topology and stimulus description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_bg")]
    pub n_bg: usize,
    pub p_rec: f64,
    pub p_bg: f64,
    pub f_bg: f64,
    pub g_rec: f64,
    pub g_bg: f64,
    #[serde(rename = "g_SFA")]
    pub g_sfa: f64,
    pub seed: u64,
    /// Axonal delays in ticks; one to four values shared by every source.
    pub delays: Vec<u32>,
    pub mode: Mode,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n: 2880,
            n_bg: 200,
            p_rec: 0.007,
            p_bg: 0.1,
            f_bg: 16.0,
            g_rec: 4.0,
            g_bg: 5.0,
            g_sfa: 0.0,
            seed: 1,
            delays: vec![1],
            mode: Mode::ClosedLoop,
        }
    }
}

/// Routing hardware duplicates each pulse at most this many times.
pub const MAX_DELAYS: usize = 4;
/// Upper bound on the number of targets a single pulse can be routed to.
pub const MAX_FAN_OUT: usize = 3500;

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_rec", self.p_rec), ("p_bg", self.p_bg)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must lie in [0, 1]")));
            }
        }
        for (name, x) in [
            ("f_bg", self.f_bg),
            ("g_rec", self.g_rec),
            ("g_bg", self.g_bg),
            ("g_SFA", self.g_sfa),
        ] {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::config(format!("{name} must be finite and non-negative")));
            }
        }
        if self.delays.is_empty() || self.delays.len() > MAX_DELAYS {
            return Err(Error::config("between one and four delays are required"));
        }
        if self.delays.iter().any(|&d| d < 1) {
            return Err(Error::config("delays must be at least one tick"));
        }
        Ok(())
    }

    /// Mean recurrent in-degree, N·p_rec.
    pub fn rec_in_degree(&self) -> f64 {
        self.n as f64 * self.p_rec
    }

    /// Mean background in-degree, N_bg·p_bg.
    pub fn bg_in_degree(&self) -> f64 {
        self.n_bg as f64 * self.p_bg
    }
}

/// Digital side of the switched-capacitor circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardwareConfig {
    /// Global clock in Hz.
    pub f_clk: f64,
    /// Capacitance ratio C_syn/C_mem = C_L/C_mem.
    pub alpha: f64,
    pub gsyn_width: u32,
    pub phase_width: u32,
    pub weight_width: u32,
    pub stp_weight_width: u32,
    pub tau_width: u32,
    pub decay_shift: u32,
    /// NCO update period in clock cycles.
    pub delta_gsyn: u32,
    /// Global time base in ms.
    pub tick: f64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        HardwareConfig {
            f_clk: 1.0e6,
            alpha: 1.0 / 20.0,
            gsyn_width: 16,
            phase_width: 24,
            weight_width: 12,
            stp_weight_width: 6,
            tau_width: 16,
            decay_shift: 6,
            delta_gsyn: 1,
            tick: 0.1,
        }
    }
}

impl HardwareConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_clk > 0.0 && self.f_clk.is_finite()) {
            return Err(Error::config("f_clk must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha must lie in (0, 1)"));
        }
        if !(self.phase_width >= self.gsyn_width && self.gsyn_width >= self.weight_width) {
            return Err(Error::config("require phase_width >= gsyn_width >= weight_width"));
        }
        if self.phase_width > 48 || self.tau_width > 32 || self.weight_width == 0 {
            return Err(Error::config("register widths out of supported range"));
        }
        if self.stp_weight_width == 0 || self.stp_weight_width > 8 {
            return Err(Error::config("stp_weight_width must lie in 1..=8"));
        }
        if self.decay_shift == 0 || self.decay_shift >= self.gsyn_width {
            return Err(Error::config("decay_shift must lie in 1..gsyn_width"));
        }
        if self.delta_gsyn == 0 {
            return Err(Error::config("delta_gsyn must be at least one cycle"));
        }
        if !(self.tick > 0.0) {
            return Err(Error::config("tick must be positive"));
        }
        let cycles = self.f_clk * self.tick * 1e-3;
        if (cycles - cycles.round()).abs() > 1e-9 || cycles < 1.0 {
            return Err(Error::config(
                "f_clk * tick must be a whole number of clock cycles",
            ));
        }
        Ok(())
    }

    pub fn cycles_per_tick(&self) -> u64 {
        (self.f_clk * self.tick * 1e-3).round() as u64
    }

    pub fn max_stp_weight(&self) -> u8 {
        ((1u32 << self.stp_weight_width) - 1) as u8
    }

    /// Same circuit run from a different clock, with the capacitance ratio
    /// scaled so that `alpha * f_clk` (and with it every conductance and
    /// leak rate) stays fixed. A faster clock then means more, smaller
    /// charge-equalisation jumps.
    pub fn with_clock_scaled_switching(&self, f_clk: f64) -> HardwareConfig {
        HardwareConfig {
            f_clk,
            alpha: self.alpha * self.f_clk / f_clk,
            ..*self
        }
    }
}

/// Timestamped pulse. `time` is in global ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub time: u32,
    pub source: u32,
    pub weight: u8,
}

impl SpikeEvent {
    pub fn new(time: u32, source: u32, weight: u8) -> Self {
        SpikeEvent { time, source, weight }
    }
}

/// Top-level JSON configuration: `{"neuron": .., "network": .., "hardware": ..}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub neuron: NeuronParams,
    pub network: NetworkConfig,
    pub hardware: HardwareConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.neuron.validate()?;
        self.network.validate()?;
        self.hardware.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
        let p = NeuronParams::default();
        assert_eq!(p.v_rest, -65.0);
        assert_eq!(p.v_reset, -80.0);
        assert_eq!(p.tau_sfa, 330.0);
        assert!((p.g_mem() - 125.0).abs() < 1e-12);
        let n = NetworkConfig::default();
        assert!((n.rec_in_degree() - 20.16).abs() < 1e-9);
        assert!((n.bg_in_degree() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_voltage_ordering() {
        let p = NeuronParams { v_thresh: -70.0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_zero_delay() {
        let n = NetworkConfig { delays: vec![0], ..Default::default() };
        assert!(n.validate().is_err());
        let n = NetworkConfig { delays: vec![1, 2, 3, 4, 5], ..Default::default() };
        assert!(n.validate().is_err());
    }

    #[test]
    fn json_uses_documented_keys() {
        let text = r#"{
            "neuron": {"C_mem": 2.0, "T_refrac": 1.0},
            "network": {"N": 100, "N_bg": 10, "g_SFA": 2.0, "mode": "open_loop"},
            "hardware": {"f_clk": 2000000.0}
        }"#;
        let cfg = SimConfig::from_json(text).unwrap();
        assert_eq!(cfg.neuron.c_mem, 2.0);
        assert_eq!(cfg.neuron.v_rest, -65.0);
        assert_eq!(cfg.network.n, 100);
        assert_eq!(cfg.network.mode, Mode::OpenLoop);
        assert_eq!(cfg.hardware.f_clk, 2.0e6);
        let back = SimConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn json_rejects_unknown_keys() {
        assert!(SimConfig::from_json(r#"{"neuron": {"vrest": 1.0}}"#).is_err());
    }

    #[test]
    fn clock_scaling_keeps_alpha_f_product() {
        let h = HardwareConfig::default().with_clock_scaled_switching(0.25e6);
        assert!((h.alpha - 0.2).abs() < 1e-12);
        assert_eq!(h.cycles_per_tick(), 25);
    }
}
