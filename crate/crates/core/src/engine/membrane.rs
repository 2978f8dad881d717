use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembraneState {
    /// Membrane voltage (mV).
    pub v: f64,
    /// Switches are suppressed for ticks strictly below this value.
    pub refrac_until: u32,
    pub last_spike: Option<u32>,
}

impl MembraneState {
    pub fn at(v: f64) -> Self {
        MembraneState { v, refrac_until: 0, last_spike: None }
    }

    /// Charge equalisation with a capacitor pre-charged to `e`.
    #[inline]
    pub fn apply_switch(&mut self, e: f64, alpha: f64) {
        self.v += alpha * (e - self.v);
    }

    #[inline]
    pub fn is_refractory(&self, tick: u32) -> bool {
        tick < self.refrac_until
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_jump() {
        let mut m = MembraneState::at(-65.0);
        m.apply_switch(0.0, 0.05);
        assert!((m.v - -61.75).abs() < 1e-12);
    }

    #[test]
    fn reversal_is_a_fixed_point() {
        let mut m = MembraneState::at(-80.0);
        m.apply_switch(-80.0, 0.05);
        assert_eq!(m.v, -80.0);
    }

    #[test]
    fn leak_switches_trace_membrane_time_constant() {
        // f_mem = 1 / (alpha * tau_mem) = 2500 Hz for 8 ms and alpha 1/20
        let (alpha, tau, f_mem) = (0.05, 8.0, 2500.0);
        let (v0, e_leak) = (-50.0, -65.0);
        let mut m = MembraneState::at(v0);
        for n in 1..=200 {
            m.apply_switch(e_leak, alpha);
            let t_ms = n as f64 / f_mem * 1e3;
            let exact = e_leak + (v0 - e_leak) * (-t_ms / tau).exp();
            assert!(((m.v - exact) / (v0 - e_leak)).abs() < 0.02, "n = {n}");
        }
    }
}
