//! Presynaptic short-term plasticity at the neuron output (quantal release).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StpParams {
    /// Utilization increment per spike, in (0, 1].
    #[serde(rename = "U")]
    pub u_inc: f64,
    /// Facilitation time constant (ms); 0 means u relaxes instantly.
    pub tau_fac: f64,
    /// Recovery time constant (ms); 0 means resources recover instantly.
    pub tau_rec: f64,
}

impl StpParams {
    /// Plasticity disabled: every spike carries the maximal weight.
    pub const STATIC: StpParams = StpParams { u_inc: 1.0, tau_fac: 0.0, tau_rec: 0.0 };
}

impl Default for StpParams {
    fn default() -> Self {
        Self::STATIC
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StpState {
    pub u: f64,
    pub r: f64,
    pub params: StpParams,
}

fn relax(x: f64, target: f64, dt: f64, tau: f64) -> f64 {
    if tau <= 0.0 || dt.is_infinite() {
        target
    } else {
        target + (x - target) * (-dt / tau).exp()
    }
}

impl StpState {
    pub fn new(params: StpParams) -> Self {
        StpState { u: 0.0, r: 1.0, params }
    }

    /// Processes one output spike `dt_since_last` ms after the previous one
    /// and returns its quantised weight in `0..=max_weight`.
    ///
    /// Between spikes u relaxes to 0 and r to 1; at the spike u jumps by
    /// `U(1-u)`, the weight is `u*r` of full scale (rounded half to even),
    /// and `u*r` of the resources are consumed.
    pub fn on_spike(&mut self, dt_since_last: f64, max_weight: u8) -> u8 {
        debug_assert!(dt_since_last >= 0.0);
        let p = self.params;
        self.u = relax(self.u, 0.0, dt_since_last, p.tau_fac);
        self.r = relax(self.r, 1.0, dt_since_last, p.tau_rec);
        self.u = (self.u + p.u_inc * (1.0 - self.u)).clamp(0.0, 1.0);
        let weight = (max_weight as f64 * self.u * self.r).round_ties_even();
        self.r = (self.r * (1.0 - self.u)).clamp(0.0, 1.0);
        weight.clamp(0.0, max_weight as f64) as u8
    }
}
