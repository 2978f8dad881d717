//! Open-loop population transfer curves of the full network for several
//! recurrent conductances, with the mean-field prediction and the spread
//! expected from binomial in-degrees.
//!
//! `cargo run --release --example open_loop -- [stim_s] [g_rec ...]`

use scnet::experiments::{open_loop_curve, RunSettings};
use scnet::meanfield::rate_grid;
use scnet::params::SimConfig;

fn main() -> scnet::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let stim_s = args.first().copied().unwrap_or(1.0);
    let levels = if args.len() > 1 { args[1..].to_vec() } else { vec![2.0, 3.0, 4.0] };
    let mut s = RunSettings::new(SimConfig::default(), std::env::temp_dir().join("scnet_open_loop"));
    s.duration_s = Some(stim_s);
    s.grid = Some(rate_grid(0.0, 180.0, 20.0));
    for g_rec in levels {
        let (c, _) = open_loop_curve(&s, g_rec, 0.0)?;
        println!("g_rec {g_rec} nS  (RMSE vs mean-field {:.2} Hz, band overlap {:.0}%)", c.rmse_hardware, 100.0 * c.band_overlap);
        println!("  f_in   mean ± std      mf_hw   predicted ± spread");
        for i in 0..c.f_in.len() {
            println!(
                "  {:4.0} {:7.2} ± {:5.2} {:8.2} {:8.2} ± {:5.2}",
                c.f_in[i], c.mean[i], c.std[i], c.meanfield_hardware[i], c.predicted_mean[i], c.predicted_std[i]
            );
        }
    }
    Ok(())
}
