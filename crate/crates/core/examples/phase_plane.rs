//! Burst statistics over a small (g_SFA, g_rec) grid, written as CSV tables.
//!
//! `cargo run --release --example phase_plane -- [cell_s] [out_dir]`

use scnet::analysis::PhaseQuantity;
use scnet::experiments::{cmd_phase_plane, RunSettings};
use scnet::params::SimConfig;

fn main() -> scnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let cell_s: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20.0);
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("scnet_phase_plane").display().to_string());
    let mut s = RunSettings::new(SimConfig::default(), &out);
    s.duration_s = Some(cell_s);
    s.threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let (plane, manifest) = cmd_phase_plane(&s, &[1.0, 2.5, 4.0], &[3.0, 4.0, 5.0])?;
    for q in [PhaseQuantity::MeanBurst, PhaseQuantity::MeanIbi] {
        println!("{} (rows g_SFA {:?}, columns g_rec {:?})", q.name(), plane.g_sfa, plane.g_rec);
        for row in plane.table(q) {
            let cells: Vec<String> = row.iter().map(|v| v.map(|x| format!("{x:8.0}")).unwrap_or_else(|| "       -".into())).collect();
            println!("  {}", cells.join(""));
        }
    }
    for c in &plane.cells {
        println!("g_SFA {} g_rec {}: {} bursts", c.g_sfa, c.g_rec, c.stats.n_bursts);
    }
    println!("wrote {} files to {out}", manifest.outputs.len());
    Ok(())
}
