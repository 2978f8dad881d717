//! Mean-field transfer curves and closed-loop fixed points at the default
//! parameters, for several recurrent conductances.

use scnet::meanfield::{find_fixed_points, rate_grid, MeanField, SfaMode, VarianceModel};
use scnet::params::SimConfig;

fn main() -> scnet::Result<()> {
    let cfg = SimConfig::default();
    let grid = rate_grid(0.0, 200.0, 1.0);
    for g_rec in [2.0, 3.0, 4.0] {
        let mut net = cfg.network.clone();
        net.g_rec = g_rec;
        let mf = MeanField::new(&cfg.neuron, &net, &cfg.hardware);
        for variance in [VarianceModel::Standard, VarianceModel::Hardware] {
            let curve = mf.transfer_curve(&grid, variance, SfaMode::Off)?;
            let eval = |f: f64| mf.rate(f, variance);
            let fp = find_fixed_points(&curve, Some(&eval));
            print!("g_rec {g_rec} nS {variance:?}: f(0) = {:.2} Hz, fixed points:", curve.f_out[0]);
            for p in &fp.points {
                print!(" {:.2} Hz ({:?}, slope {:.2})", p.rate, p.stability, p.slope);
            }
            println!();
        }
    }
    let mut net = cfg.network.clone();
    for g_sfa in [0.0, 1.0, 2.0, 4.0] {
        net.g_sfa = g_sfa;
        let mf = MeanField::new(&cfg.neuron, &net, &cfg.hardware);
        let curve = mf.transfer_curve(&grid, VarianceModel::Standard, SfaMode::SteadyState)?;
        let eval = |f: f64| mf.adapted_rate(f, VarianceModel::Standard).unwrap_or(f64::NAN);
        let fp = find_fixed_points(&curve, Some(&eval));
        let stable: Vec<String> = fp.stable().map(|p| format!("{:.2}", p.rate)).collect();
        println!("g_SFA {g_sfa} nS: f(180) = {:.1} Hz, stable states {:?}", curve.interpolate(180.0), stable);
    }
    Ok(())
}
