//! Fixed-in-degree single-neuron characterisation: every neuron gets 20
//! stimulus and 20 background Poisson inputs, the stimulus rate is swept and
//! the measured rates are compared with both mean-field curves.

use scnet::analysis::rmse;
use scnet::meanfield::{rate_grid, MeanField, SfaMode, VarianceModel};
use scnet::netsim::{build_topology, run_experiment, ExperimentProtocol, SimOptions, FIXED_IN_DEGREE};
use scnet::params::{Mode, SimConfig};

fn main() -> scnet::Result<()> {
    let mut cfg = SimConfig::default();
    cfg.network.n = 32;
    cfg.network.mode = Mode::SingleNeuron;
    let grid = rate_grid(0.0, 180.0, 20.0);
    let topo = build_topology(&cfg.network, cfg.network.seed)?;
    let rec = run_experiment(&ExperimentProtocol::sweep(grid.clone()), &cfg, topo, &SimOptions::default())?;
    let k = FIXED_IN_DEGREE as f64;
    let mf = MeanField::new(&cfg.neuron, &cfg.network, &cfg.hardware).with_in_degrees(k, k);
    let hw = mf.transfer_curve(&grid, VarianceModel::Hardware, SfaMode::Off)?;
    let std = mf.transfer_curve(&grid, VarianceModel::Standard, SfaMode::Off)?;
    let (_, mean) = rec.mean_curve();
    println!("f_in  measured  mf_hardware  mf_standard");
    for i in 0..grid.len() {
        println!("{:5.0} {:9.2} {:12.2} {:12.2}", grid[i], mean[i], hw.f_out[i], std.f_out[i]);
    }
    let per_neuron = rec.sweep_rates();
    let mut errors: Vec<f64> = (0..32)
        .map(|n| {
            let curve: Vec<f64> = per_neuron.iter().map(|r| r[n]).collect();
            rmse(&curve, &hw.f_out).expect("same grid")
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    println!("median RMSE against hardware mean-field: {:.2} Hz", errors[16]);
    println!("{:.0} synaptic events/s", rec.throughput.events_per_second);
    Ok(())
}
