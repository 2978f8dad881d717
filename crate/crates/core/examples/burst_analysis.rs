//! Burst detection and summary statistics on a synthetic population trace.

use scnet::analysis::{bin_population, detect_bursts, summarize, DEFAULT_BIN_MS, DEFAULT_THRESHOLD_HZ};

fn main() -> scnet::Result<()> {
    let n = 2880;
    let tick_ms = 0.1;
    // quiet at ~2 Hz, with a 150 ms burst at ~140 Hz every 1.8 s
    let ticks = 200_000;
    let counts: Vec<u32> = (0..ticks)
        .map(|t| {
            let phase = t % 18_000;
            let rate = if (9_000..10_500).contains(&phase) { 140.0 } else { 2.0 };
            (rate * n as f64 * tick_ms * 1e-3).round() as u32
        })
        .collect();
    let rates = bin_population(&counts, n, DEFAULT_BIN_MS, tick_ms)?;
    let runs = detect_bursts(&rates, DEFAULT_THRESHOLD_HZ);
    let stats = summarize(&runs, DEFAULT_BIN_MS, DEFAULT_THRESHOLD_HZ);
    println!("{} bins, {} excluded at the edges", rates.len(), runs.excluded_bins);
    println!(
        "{} bursts: mean {:.0} ms (CV {:.2}), mean IBI {:.0} ms (CV {:.2}), valid {}",
        stats.n_bursts,
        stats.mean_burst_ms(),
        stats.cv_burst,
        stats.mean_ibi_ms(),
        stats.cv_ibi,
        stats.valid
    );
    println!("peaks: {:?}", &stats.peaks_hz[..stats.peaks_hz.len().min(5)]);
    Ok(())
}
