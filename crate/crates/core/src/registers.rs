//! Mapping from biological parameters to digital register settings.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{HardwareConfig, NeuronParams};

/// Which multi-synapse a projection drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SynapseKind {
    Rec,
    Bg,
    Sfa,
}

impl SynapseKind {
    pub const ALL: [SynapseKind; 3] = [SynapseKind::Rec, SynapseKind::Bg, SynapseKind::Sfa];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynapseSettings {
    /// Decay counter target; the register is attenuated every `tau_syn + 1` cycles.
    pub tau_syn: u32,
    /// Reversal potential (mV).
    pub e_syn: f64,
    /// Time constant the register actually realises (ms).
    pub tau_effective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegisterSettings {
    pub cycles_per_tick: u64,
    /// Leak switching frequency (Hz).
    pub f_mem: f64,
    /// Phase increment of the constant-rate leak oscillator.
    pub leak_increment: u64,
    /// Switching capacitance (nF).
    pub c_syn: f64,
    /// Register units per nS of conductance.
    pub weight_per_ns: f64,
    pub rec: SynapseSettings,
    pub bg: SynapseSettings,
    pub sfa: SynapseSettings,
    pub refrac_ticks: u32,
    pub gsyn_max: u32,
    pub weight_max: u32,
    pub phase_width: u32,
    pub decay_shift: u32,
    pub delta_gsyn: u32,
    pub alpha: f64,
}

/// `-ln(1 - 2^-k)`: decay rate per attenuation step.
pub fn attenuation_rate(decay_shift: u32) -> f64 {
    -(-(2f64.powi(-(decay_shift as i32)))).ln_1p()
}

/// Counter target realising time constant `tau_ms` (ms) at clock `f_clk`.
pub fn tau_counter_target(tau_ms: f64, h: &HardwareConfig) -> Result<u32> {
    let period = (h.f_clk * tau_ms * 1e-3 * attenuation_rate(h.decay_shift)).round();
    if period < 1.0 {
        return Err(Error::Unrepresentable(format!(
            "time constant {tau_ms} ms is shorter than one attenuation period"
        )));
    }
    let target = period - 1.0;
    if target >= 2f64.powi(h.tau_width as i32) {
        return Err(Error::Unrepresentable(format!(
            "time constant {tau_ms} ms overflows the {}-bit decay counter",
            h.tau_width
        )));
    }
    Ok(target as u32)
}

pub fn map_params_to_registers(p: &NeuronParams, h: &HardwareConfig) -> Result<RegisterSettings> {
    p.validate()?;
    h.validate()?;
    let modulus = 2f64.powi(h.phase_width as i32);
    let f_mem = 1.0 / (h.alpha * p.tau_mem * 1e-3);
    let leak_increment = (f_mem * h.delta_gsyn as f64 * modulus / h.f_clk).round();
    if leak_increment < 1.0 || leak_increment >= modulus {
        return Err(Error::Unrepresentable(format!(
            "leak frequency {f_mem} Hz not representable by the oscillator"
        )));
    }
    let c_syn = h.alpha * p.c_mem;
    // w * f_clk / (delta * 2^pw) = f_switch, g = C_syn * f_switch.
    let weight_per_ns = 1e-9 / (c_syn * 1e-9) * h.delta_gsyn as f64 * modulus / h.f_clk;
    let synapse = |tau: f64, e_syn: f64| -> Result<SynapseSettings> {
        let tau_syn = tau_counter_target(tau, h)?;
        let tau_effective = (tau_syn as f64 + 1.0) / h.f_clk / attenuation_rate(h.decay_shift) * 1e3;
        Ok(SynapseSettings { tau_syn, e_syn, tau_effective })
    };
    let refrac_ticks = (p.t_refrac / h.tick).round() as u32;
    Ok(RegisterSettings {
        cycles_per_tick: h.cycles_per_tick(),
        f_mem,
        leak_increment: leak_increment as u64,
        c_syn,
        weight_per_ns,
        rec: synapse(p.tau_syn_rec, p.e_syn_rec)?,
        bg: synapse(p.tau_syn_bg, p.e_syn_bg)?,
        sfa: synapse(p.tau_sfa, p.e_sfa)?,
        refrac_ticks,
        gsyn_max: ((1u64 << h.gsyn_width) - 1) as u32,
        weight_max: (1u32 << h.weight_width) - 1,
        phase_width: h.phase_width,
        decay_shift: h.decay_shift,
        delta_gsyn: h.delta_gsyn,
        alpha: h.alpha,
    })
}

impl RegisterSettings {
    pub fn synapse(&self, kind: SynapseKind) -> &SynapseSettings {
        match kind {
            SynapseKind::Rec => &self.rec,
            SynapseKind::Bg => &self.bg,
            SynapseKind::Sfa => &self.sfa,
        }
    }

    /// Quantised register weight for a conductance step of `g_ns`.
    pub fn conductance_to_weight(&self, g_ns: f64) -> Result<u32> {
        if !(g_ns >= 0.0) {
            return Err(Error::Unrepresentable(format!("negative conductance {g_ns} nS")));
        }
        let w = (g_ns * self.weight_per_ns).round();
        if w > self.weight_max as f64 {
            return Err(Error::Unrepresentable(format!(
                "conductance {g_ns} nS needs weight {w}, above the {}-bit limit",
                self.weight_max.count_ones()
            )));
        }
        Ok(w as u32)
    }

    pub fn weight_to_conductance(&self, w: u32) -> f64 {
        w as f64 / self.weight_per_ns
    }

    /// Switching frequency (Hz) produced by register value `w`.
    pub fn switch_frequency(&self, w: u32, f_clk: f64) -> f64 {
        w as f64 * f_clk / (self.delta_gsyn as f64 * 2f64.powi(self.phase_width as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> RegisterSettings {
        map_params_to_registers(&NeuronParams::default(), &HardwareConfig::default()).unwrap()
    }

    #[test]
    fn leak_frequency_from_alpha_and_tau() {
        let r = defaults();
        assert!((r.f_mem - 2500.0).abs() < 1e-9);
        assert!((r.c_syn - 0.05).abs() < 1e-15);
    }

    #[test]
    fn tau_target_for_eight_ms() {
        assert!((attenuation_rate(6) - 0.015748).abs() < 1e-6);
        let r = defaults();
        assert_eq!(r.rec.tau_syn, 125);
        assert!((r.rec.tau_effective - 8.0).abs() / 8.0 < 0.01);
    }

    #[test]
    fn five_ns_switches_at_hundred_hz() {
        let r = defaults();
        let f = 5e-9 / (r.c_syn * 1e-9);
        assert!((f - 100.0).abs() < 1e-9);
        let w = r.conductance_to_weight(5.0).unwrap();
        let f_switch = r.switch_frequency(w, 1e6);
        assert!((f_switch - 100.0).abs() / 100.0 < 1e-3);
    }

    #[test]
    fn overflowing_weight_rejected() {
        let r = defaults();
        assert!(matches!(r.conductance_to_weight(50.0), Err(Error::Unrepresentable(_))));
    }

    #[test]
    fn overflowing_tau_rejected() {
        let p = NeuronParams { tau_sfa: 10_000.0, ..Default::default() };
        assert!(matches!(
            map_params_to_registers(&p, &HardwareConfig::default()),
            Err(Error::Unrepresentable(_))
        ));
    }

    #[test]
    fn mapping_is_pure() {
        assert_eq!(defaults(), defaults());
    }
}
