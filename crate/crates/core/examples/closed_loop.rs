//! Closed-loop network transients for a few adaptation strengths: binned
//! population rate and burst statistics.
//!
//! `cargo run --release --example closed_loop -- [duration_s] [g_rec] [g_sfa ...]`

use scnet::analysis::{bin_population, burst_statistics};
use scnet::netsim::{build_topology, run_experiment, ExperimentProtocol, SimOptions};
use scnet::params::SimConfig;

fn main() -> scnet::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let duration_s = args.first().copied().unwrap_or(10.0);
    let g_rec = args.get(1).copied().unwrap_or(4.0);
    let levels = if args.len() > 2 { args[2..].to_vec() } else { vec![0.0, 2.0, 4.0] };
    for g_sfa in levels {
        let mut cfg = SimConfig::default();
        cfg.network.g_sfa = g_sfa;
        cfg.network.g_rec = g_rec;
        let topo = build_topology(&cfg.network, cfg.network.seed)?;
        let opts = SimOptions { record_spikes: false, ..Default::default() };
        let rec = run_experiment(&ExperimentProtocol::closed_loop(duration_s * 1e3), &cfg, topo, &opts)?;
        let rates = bin_population(&rec.population, rec.n_neurons, 50.0, rec.tick_ms)?;
        let stats = burst_statistics(&rec.population, rec.n_neurons, rec.tick_ms)?;
        println!(
            "g_SFA {g_sfa} nS: {} bursts, mean length {:.0} ms, mean IBI {:.0} ms, max bin {:.1} Hz ({:.1} s wall)",
            stats.n_bursts,
            stats.mean_burst_ms(),
            stats.mean_ibi_ms(),
            rates.iter().copied().fold(0.0, f64::max),
            rec.throughput.wall_seconds
        );
        let trace: Vec<String> = rates.iter().map(|r| format!("{r:.0}")).collect();
        println!("  {}", trace.join(" "));
    }
    Ok(())
}
