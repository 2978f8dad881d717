//! Quantised output weights of a depressing and a facilitating synapse
//! driven by a regular spike train.

use scnet::engine::{StpParams, StpState};

fn main() {
    let cases = [
        ("depressing", StpParams { u_inc: 0.5, tau_fac: 0.0, tau_rec: 200.0 }),
        ("facilitating", StpParams { u_inc: 0.1, tau_fac: 500.0, tau_rec: 20.0 }),
    ];
    for (name, params) in cases {
        let mut s = StpState::new(params);
        let mut weights = vec![s.on_spike(f64::INFINITY, 63)];
        weights.extend((0..9).map(|_| s.on_spike(20.0, 63)));
        println!("{name:>12} at 50 Hz: {weights:?}");
    }
}
