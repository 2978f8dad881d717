//! Register-level trace of one emulated neuron receiving a single strong
//! input: conductance register, oscillator phase and membrane per tick.

use scnet::engine::{NeuronModel, StpParams};
use scnet::params::{HardwareConfig, NeuronParams};
use scnet::registers::SynapseKind;

fn main() -> scnet::Result<()> {
    let p = NeuronParams::default();
    let h = HardwareConfig::default();
    let model = NeuronModel::new(&p, &h, 0.0, StpParams::STATIC)?;
    let w = model.regs.conductance_to_weight(10.0)?;
    println!("10 nS -> weight {w}, {:.0} switches/s", model.regs.switch_frequency(w, h.f_clk));
    let mut n = model.spawn();
    let slot = model.slot(SynapseKind::Rec);
    println!("tick  gsyn  phase      v (mV)");
    for t in 0..400u32 {
        if t % 100 == 0 {
            n.receive(slot, w);
        }
        let spiked = n.tick(&model, t).is_some();
        if t % 10 == 0 || spiked {
            let s = &n.synapses[slot];
            println!("{t:4} {:5} {:9} {:8.3}{}", s.gsyn, s.nco.phase, n.membrane.v, if spiked { "  spike" } else { "" });
        }
    }
    Ok(())
}
