//! Emulated neuron against the continuous-time reference on one Poisson
//! input train, for several clock frequencies.

use scnet::crosscheck::{run_engine, run_reference, InputTrain};
use scnet::params::{HardwareConfig, NeuronParams};

fn main() -> scnet::Result<()> {
    let p = NeuronParams::default();
    let base = HardwareConfig::default();
    let f_in: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50.0);
    let train = InputTrain::poisson(20, f_in, 4.0, 20, 16.0, 5.0, 10_000.0, 7, base.tick).quantised(&p, &base)?;
    let sub = NeuronParams { v_thresh: 0.0, ..p };
    let ode_sub = run_reference(&sub, base.tick, 0.0, &train, 10)?;
    let ode = run_reference(&p, base.tick, 0.0, &train, 10)?;
    println!("reference rate {:.2} Hz", ode.rate(base.tick));
    for f_clk in [0.25e6, 0.5e6, 1e6, 2e6] {
        let h = base.with_clock_scaled_switching(f_clk);
        let sc_sub = run_engine(&sub, &h, 0.0, &train)?;
        let sc = run_engine(&p, &h, 0.0, &train)?;
        println!(
            "f_clk {:>4.2} MHz  alpha {:.4}  max |dv| {:.3} mV  rate {:.2} Hz",
            f_clk / 1e6,
            h.alpha,
            sc_sub.max_abs_difference(&ode_sub),
            sc.rate(h.tick)
        );
    }
    Ok(())
}
