//! Rate binning, burst detection and summary statistics.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::TransferCurve;
use crate::params::SpikeEvent;

pub const DEFAULT_BIN_MS: f64 = 50.0;
pub const DEFAULT_THRESHOLD_HZ: f64 = 20.0;
/// A run needs strictly more bursts than this to be summarised.
pub const MIN_BURSTS: usize = 50;

fn ticks_per_bin(bin_ms: f64, tick_ms: f64) -> Result<usize> {
    if !(bin_ms > 0.0) {
        return Err(Error::InvalidArgument("bin width must be positive".into()));
    }
    let k = (bin_ms / tick_ms).round();
    if k < 1.0 || (k * tick_ms - bin_ms).abs() > 1e-9 * bin_ms {
        return Err(Error::InvalidArgument(format!("bin width {bin_ms} ms is not a multiple of the tick")));
    }
    Ok(k as usize)
}

/// Mean rate per neuron (Hz) in consecutive bins. A trailing partial bin is
/// dropped.
pub fn bin_rates(spikes: &[SpikeEvent], n: usize, duration_ticks: u32, bin_ms: f64, tick_ms: f64) -> Result<Vec<f64>> {
    let k = ticks_per_bin(bin_ms, tick_ms)?;
    let bins = duration_ticks as usize / k;
    let mut counts = vec![0u64; bins];
    for s in spikes {
        let b = s.time as usize / k;
        if b < bins {
            counts[b] += 1;
        }
    }
    let scale = 1.0 / (n as f64 * bin_ms * 1e-3);
    Ok(counts.into_iter().map(|c| c as f64 * scale).collect())
}

/// Same as [`bin_rates`] from per-tick population spike counts.
pub fn bin_population(counts: &[u32], n: usize, bin_ms: f64, tick_ms: f64) -> Result<Vec<f64>> {
    let k = ticks_per_bin(bin_ms, tick_ms)?;
    let scale = 1.0 / (n as f64 * bin_ms * 1e-3);
    Ok(counts
        .chunks_exact(k)
        .map(|c| c.iter().map(|&x| x as u64).sum::<u64>() as f64 * scale)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Run {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurstRuns {
    /// Interior runs of bins strictly above threshold.
    pub bursts: Vec<Run>,
    /// Interior runs of bins at or below threshold.
    pub ibis: Vec<Run>,
    /// Peak bin rate (Hz) of each interior burst.
    pub peaks: Vec<f64>,
    /// Bins in runs touching either end of the record.
    pub excluded_bins: usize,
}

/// Splits the trace into maximal runs above and at-or-below `threshold`.
/// Runs touching the first or last bin are censored and excluded.
pub fn detect_bursts(rates: &[f64], threshold: f64) -> BurstRuns {
    let mut out = BurstRuns { bursts: Vec::new(), ibis: Vec::new(), peaks: Vec::new(), excluded_bins: 0 };
    let n = rates.len();
    let mut start = 0;
    while start < n {
        let above = rates[start] > threshold;
        let mut end = start + 1;
        while end < n && (rates[end] > threshold) == above {
            end += 1;
        }
        let run = Run { start, len: end - start };
        if start == 0 || end == n {
            out.excluded_bins += run.len;
        } else if above {
            out.bursts.push(run);
            out.peaks.push(rates[start..end].iter().copied().fold(f64::NEG_INFINITY, f64::max));
        } else {
            out.ibis.push(run);
        }
        start = end;
    }
    out
}

/// Mean and coefficient of variation with the population standard deviation.
pub fn mean_cv(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if x.iter().all(|&v| v == x[0]) {
        return (x[0], if x[0] == 0.0 { f64::NAN } else { 0.0 });
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cv = if mean == 0.0 { f64::NAN } else { var.sqrt() / mean };
    (mean, cv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurstStatistics {
    pub bin_ms: f64,
    pub threshold_hz: f64,
    /// In bins.
    pub burst_lengths: Vec<usize>,
    pub ibis: Vec<usize>,
    pub peaks_hz: Vec<f64>,
    pub mean_burst: f64,
    pub cv_burst: f64,
    pub mean_ibi: f64,
    pub cv_ibi: f64,
    pub n_bursts: usize,
    pub valid: bool,
}

impl BurstStatistics {
    pub fn mean_burst_ms(&self) -> f64 {
        self.mean_burst * self.bin_ms
    }

    pub fn mean_ibi_ms(&self) -> f64 {
        self.mean_ibi * self.bin_ms
    }
}

pub fn summarize(runs: &BurstRuns, bin_ms: f64, threshold_hz: f64) -> BurstStatistics {
    let lengths: Vec<usize> = runs.bursts.iter().map(|r| r.len).collect();
    let ibis: Vec<usize> = runs.ibis.iter().map(|r| r.len).collect();
    let as_f = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let (mean_burst, cv_burst) = mean_cv(&as_f(&lengths));
    let (mean_ibi, cv_ibi) = mean_cv(&as_f(&ibis));
    BurstStatistics {
        bin_ms,
        threshold_hz,
        n_bursts: lengths.len(),
        valid: lengths.len() > MIN_BURSTS,
        burst_lengths: lengths,
        ibis,
        peaks_hz: runs.peaks.clone(),
        mean_burst,
        cv_burst,
        mean_ibi,
        cv_ibi,
    }
}

/// Binning, detection and summary with the default 50 ms / 20 Hz settings.
pub fn burst_statistics(population: &[u32], n: usize, tick_ms: f64) -> Result<BurstStatistics> {
    let rates = bin_population(population, n, DEFAULT_BIN_MS, tick_ms)?;
    Ok(summarize(&detect_bursts(&rates, DEFAULT_THRESHOLD_HZ), DEFAULT_BIN_MS, DEFAULT_THRESHOLD_HZ))
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::GridMismatch(format!("curves have {} and {} points", a.len(), b.len())));
    }
    let sq = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    Ok((sq / a.len() as f64).sqrt())
}

/// RMSE of two transfer curves sampled on the same input grid.
pub fn curve_rmse(a: &TransferCurve, b: &TransferCurve) -> Result<f64> {
    if a.f_in.len() != b.f_in.len() || a.f_in.iter().zip(&b.f_in).any(|(x, y)| (x - y).abs() > 1e-9) {
        return Err(Error::GridMismatch("input grids differ".into()));
    }
    rmse(&a.f_out, &b.f_out)
}

pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (ties get average ranks).
pub fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, _) = mean_cv(&rx);
    let (my, _) = mean_cv(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub g_sfa: f64,
    pub g_rec: f64,
    pub stats: BurstStatistics,
}

/// Burst statistics over a `(g_SFA, g_rec)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePlane {
    pub g_sfa: Vec<f64>,
    pub g_rec: Vec<f64>,
    /// Row-major: `cells[i * g_rec.len() + j]` is `(g_sfa[i], g_rec[j])`.
    pub cells: Vec<PhaseCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseQuantity {
    MeanBurst,
    CvBurst,
    MeanIbi,
    CvIbi,
}

impl PhaseQuantity {
    pub const ALL: [PhaseQuantity; 4] =
        [PhaseQuantity::MeanBurst, PhaseQuantity::CvBurst, PhaseQuantity::MeanIbi, PhaseQuantity::CvIbi];

    pub fn name(&self) -> &'static str {
        match self {
            PhaseQuantity::MeanBurst => "mean_burst_ms",
            PhaseQuantity::CvBurst => "cv_burst",
            PhaseQuantity::MeanIbi => "mean_ibi_ms",
            PhaseQuantity::CvIbi => "cv_ibi",
        }
    }
}

impl PhasePlane {
    pub fn new(g_sfa: Vec<f64>, g_rec: Vec<f64>, cells: Vec<PhaseCell>) -> Result<Self> {
        if cells.len() != g_sfa.len() * g_rec.len() {
            return Err(Error::GridMismatch("cell count does not match the grid".into()));
        }
        Ok(PhasePlane { g_sfa, g_rec, cells })
    }

    pub fn cell(&self, i_sfa: usize, j_rec: usize) -> &PhaseCell {
        &self.cells[i_sfa * self.g_rec.len() + j_rec]
    }

    /// Table of one quantity; cells with too few bursts are `None`.
    pub fn table(&self, q: PhaseQuantity) -> Vec<Vec<Option<f64>>> {
        (0..self.g_sfa.len())
            .map(|i| {
                (0..self.g_rec.len())
                    .map(|j| {
                        let s = &self.cell(i, j).stats;
                        s.valid.then(|| match q {
                            PhaseQuantity::MeanBurst => s.mean_burst_ms(),
                            PhaseQuantity::CvBurst => s.cv_burst,
                            PhaseQuantity::MeanIbi => s.mean_ibi_ms(),
                            PhaseQuantity::CvIbi => s.cv_ibi,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    pub fn validity_mask(&self) -> Vec<Vec<bool>> {
        (0..self.g_sfa.len()).map(|i| (0..self.g_rec.len()).map(|j| self.cell(i, j).stats.valid).collect()).collect()
    }

    /// Tidy CSV `g_sfa,g_rec,value,valid`; masked cells have an empty value.
    pub fn write_csv<W: Write>(&self, q: PhaseQuantity, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["g_sfa", "g_rec", q.name(), "valid"])?;
        let table = self.table(q);
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                w.write_record([
                    self.g_sfa[i].to_string(),
                    self.g_rec[j].to_string(),
                    v.map(|x| x.to_string()).unwrap_or_default(),
                    self.cell(i, j).stats.valid.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_record_gives_zero_rates() {
        let r = bin_rates(&[], 10, 5000, 50.0, 0.1).unwrap();
        assert_eq!(r, vec![0.0; 10]);
    }

    #[test]
    fn bin_rate_arithmetic() {
        let spikes: Vec<SpikeEvent> = (0..7200).map(|i| SpikeEvent::new(i % 500, i, 63)).collect();
        let r = bin_rates(&spikes, 2880, 1000, 50.0, 0.1).unwrap();
        assert!((r[0] - 50.0).abs() < 1e-12);
        assert_eq!(r[1], 0.0);
        let total: f64 = r.iter().map(|x| x * 2880.0 * 0.05).sum();
        assert!((total - 7200.0).abs() < 1e-9);
        assert!(bin_rates(&spikes, 1, 1000, 0.0, 0.1).is_err());
    }

    #[test]
    fn population_binning_matches_spike_binning() {
        let spikes = vec![SpikeEvent::new(3, 0, 63), SpikeEvent::new(3, 1, 63), SpikeEvent::new(777, 0, 63)];
        let mut counts = vec![0u32; 1000];
        for s in &spikes {
            counts[s.time as usize] += 1;
        }
        assert_eq!(bin_population(&counts, 4, 50.0, 0.1).unwrap(), bin_rates(&spikes, 4, 1000, 50.0, 0.1).unwrap());
    }

    #[test]
    fn hand_example() {
        let runs = detect_bursts(&[5.0, 25.0, 30.0, 10.0, 25.0, 5.0], 20.0);
        let lens: Vec<usize> = runs.bursts.iter().map(|r| r.len).collect();
        assert_eq!(lens, [2, 1]);
        assert_eq!(runs.ibis, [Run { start: 3, len: 1 }]);
        assert_eq!(runs.peaks, [30.0, 25.0]);
        assert_eq!(runs.excluded_bins, 2);
    }

    #[test]
    fn threshold_is_strict() {
        let runs = detect_bursts(&[0.0, 20.0, 0.0, 20.1, 0.0], 20.0);
        assert_eq!(runs.bursts, [Run { start: 3, len: 1 }]);
    }

    #[test]
    fn silent_trace() {
        let s = summarize(&detect_bursts(&[0.0; 100], 20.0), 50.0, 20.0);
        assert_eq!(s.n_bursts, 0);
        assert!(!s.valid);
    }

    #[test]
    fn summary_statistics() {
        let (m, cv) = mean_cv(&[2.0, 2.0, 2.0]);
        assert_eq!((m, cv), (2.0, 0.0));
        let (m, cv) = mean_cv(&[1.0, 3.0]);
        assert_eq!((m, cv), (2.0, 0.5));
    }

    #[test]
    fn validity_needs_more_than_fifty() {
        let trace = |k: usize| {
            let mut r = vec![0.0];
            for _ in 0..k {
                r.extend([30.0, 0.0]);
            }
            r
        };
        let s = summarize(&detect_bursts(&trace(50), 20.0), 50.0, 20.0);
        assert_eq!(s.n_bursts, 50);
        assert!(!s.valid);
        let s = summarize(&detect_bursts(&trace(51), 20.0), 50.0, 20.0);
        assert!(s.valid);
    }

    #[test]
    fn rmse_cases() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x - 2.5).collect();
        assert!((rmse(&a, &b).unwrap() - 2.5).abs() < 1e-12);
        assert!(rmse(&a, &b[..2]).is_err());
    }

    #[test]
    fn rank_correlation_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((rank_correlation(&x, &[10.0, 20.0, 25.0, 90.0]) - 1.0).abs() < 1e-12);
        assert!((rank_correlation(&x, &[9.0, 5.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    proptest! {
        #[test]
        fn constant_sequences_have_zero_cv(v in 0.1f64..1e6, n in 1usize..100) {
            prop_assert_eq!(mean_cv(&vec![v; n]).1, 0.0);
        }

        #[test]
        fn runs_partition_the_trace(rates in prop::collection::vec(0.0f64..60.0, 0..300)) {
            let r = detect_bursts(&rates, 20.0);
            let inside: usize = r.bursts.iter().chain(&r.ibis).map(|x| x.len).sum();
            prop_assert_eq!(inside + r.excluded_bins, rates.len());
        }
    }
}
