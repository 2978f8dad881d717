//! Homogeneous Poisson sources with one independent random stream per
//! source id.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Generator for source `id`. Streams of different ids never overlap, so a
/// source's train does not depend on how many other sources exist or in
/// which order they are sampled.
pub fn source_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Poisson process in continuous time, read out on the tick grid.
#[derive(Debug, Clone)]
pub struct PoissonSource {
    rng: ChaCha8Rng,
    /// Hz
    rate: f64,
    tick_ms: f64,
    /// Time of the next event (ms); infinite when silent.
    next_ms: f64,
}

impl PoissonSource {
    pub fn new(seed: u64, id: u64, rate: f64, tick_ms: f64) -> Self {
        let mut s = PoissonSource { rng: source_rng(seed, id), rate: 0.0, tick_ms, next_ms: f64::INFINITY };
        s.set_rate(rate, 0.0);
        s
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn draw_after(&mut self, t_ms: f64) {
        self.next_ms = if self.rate > 0.0 {
            let isi: f64 = Exp1.sample(&mut self.rng);
            t_ms + isi * 1e3 / self.rate
        } else {
            f64::INFINITY
        };
    }

    /// Changes the rate from time `t_ms` on. The pending event is redrawn,
    /// which is exact for a memoryless process.
    pub fn set_rate(&mut self, rate: f64, t_ms: f64) {
        self.rate = rate;
        self.draw_after(t_ms);
    }

    /// Tick of the next event, if any.
    pub fn next_tick(&self) -> Option<u32> {
        let t = (self.next_ms / self.tick_ms).floor();
        (t < u32::MAX as f64).then_some(t as u32)
    }

    /// Removes all events in tick `t` and returns how many there were.
    pub fn pop_tick(&mut self, t: u32) -> u32 {
        let end = (t as f64 + 1.0) * self.tick_ms;
        let mut n = 0;
        while self.next_ms < end {
            n += 1;
            let now = self.next_ms;
            self.draw_after(now);
        }
        n
    }
}

/// Event ticks of a single source over `duration_ms`. Several events may
/// share a tick.
pub fn generate_poisson(rate: f64, duration_ms: f64, seed: u64, id: u64, tick_ms: f64) -> Vec<u32> {
    let mut src = PoissonSource::new(seed, id, rate, tick_ms);
    let end = (duration_ms / tick_ms).round() as u32;
    let mut out = Vec::new();
    while let Some(t) = src.next_tick() {
        if t >= end {
            break;
        }
        for _ in 0..src.pop_tick(t) {
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_source() {
        assert!(generate_poisson(0.0, 1000.0, 1, 0, 0.1).is_empty());
    }

    #[test]
    fn count_concentrates() {
        let n = generate_poisson(16.0, 500_000.0, 7, 3, 0.1).len() as f64;
        assert!((n - 8000.0).abs() <= 4.0 * 8000f64.sqrt(), "{n}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = generate_poisson(50.0, 10_000.0, 9, 1, 0.1);
        assert_eq!(a, generate_poisson(50.0, 10_000.0, 9, 1, 0.1));
        assert_ne!(a, generate_poisson(50.0, 10_000.0, 9, 2, 0.1));
        assert_ne!(a, generate_poisson(50.0, 10_000.0, 10, 1, 0.1));
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn intervals_look_exponential() {
        let ticks = generate_poisson(100.0, 1_000_000.0, 2, 0, 0.1);
        let isi: Vec<f64> = ticks.windows(2).map(|w| (w[1] - w[0]) as f64 * 0.1).collect();
        let mean = isi.iter().sum::<f64>() / isi.len() as f64;
        let var = isi.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / isi.len() as f64;
        assert!((mean - 10.0).abs() < 0.1);
        // CV of an exponential is 1
        assert!((var.sqrt() / mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn rate_change_takes_effect() {
        let mut s = PoissonSource::new(1, 0, 0.0, 0.1);
        assert_eq!(s.next_tick(), None);
        s.set_rate(1000.0, 50.0);
        assert!(s.next_tick().unwrap() >= 500);
    }
}
