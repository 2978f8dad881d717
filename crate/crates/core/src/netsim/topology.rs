//! Fan-out routing table.
//!
//! Source ids are laid out as `[neurons | background | stimulus | external]`.
//! Every source has one fan-out list and the delay set of the network; a
//! pulse is copied once per delay and each copy reaches every target.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;
use smallvec::SmallVec;

use super::poisson::source_rng;
use crate::error::{Error, Result};
use crate::params::{Mode, NetworkConfig, MAX_FAN_OUT};
use crate::registers::SynapseKind;

const BG_FLAG: u32 = 1 << 31;

/// Stream ids reserved for topology sampling, far away from source streams.
const TOPOLOGY_STREAM: u64 = 1 << 62;

/// In-degree per kind used for the fixed-in-degree single-neuron protocol.
pub const FIXED_IN_DEGREE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceKind {
    Neuron,
    Background,
    Stimulus,
    External,
}

/// One synaptic target of a pulse copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Delivery {
    pub time: u32,
    pub target: u32,
    pub kind: SynapseKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Topology {
    pub n_neurons: usize,
    pub n_bg: usize,
    pub n_stim: usize,
    pub n_ext: usize,
    pub delays: SmallVec<[u32; 4]>,
    offsets: Vec<u32>,
    /// Target neuron, with the top bit set for background-kind synapses.
    targets: Vec<u32>,
    pub in_degree_rec: Vec<u32>,
    pub in_degree_bg: Vec<u32>,
}

impl Topology {
    fn from_lists(
        n_neurons: usize,
        n_bg: usize,
        n_stim: usize,
        n_ext: usize,
        delays: &[u32],
        lists: Vec<Vec<u32>>,
    ) -> Result<Self> {
        debug_assert_eq!(lists.len(), n_neurons + n_bg + n_stim + n_ext);
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        let mut in_degree_rec = vec![0u32; n_neurons];
        let mut in_degree_bg = vec![0u32; n_neurons];
        offsets.push(0);
        for (src, list) in lists.into_iter().enumerate() {
            if list.len() > MAX_FAN_OUT {
                return Err(Error::config(format!(
                    "source {src} has fan-out {} above the limit of {MAX_FAN_OUT}",
                    list.len()
                )));
            }
            for &t in &list {
                let n = (t & !BG_FLAG) as usize;
                if t & BG_FLAG != 0 {
                    in_degree_bg[n] += 1;
                } else {
                    in_degree_rec[n] += 1;
                }
            }
            targets.extend(list);
            offsets.push(targets.len() as u32);
        }
        Ok(Topology {
            n_neurons,
            n_bg,
            n_stim,
            n_ext,
            delays: delays.iter().copied().collect(),
            offsets,
            targets,
            in_degree_rec,
            in_degree_bg,
        })
    }

    pub fn n_sources(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn bg_offset(&self) -> u32 {
        self.n_neurons as u32
    }

    pub fn stim_offset(&self) -> u32 {
        (self.n_neurons + self.n_bg) as u32
    }

    pub fn ext_offset(&self) -> u32 {
        (self.n_neurons + self.n_bg + self.n_stim) as u32
    }

    pub fn source_kind(&self, id: u32) -> Option<SourceKind> {
        let id = id as usize;
        let (a, b, c) = (self.n_neurons, self.n_neurons + self.n_bg, self.n_neurons + self.n_bg + self.n_stim);
        match id {
            _ if id < a => Some(SourceKind::Neuron),
            _ if id < b => Some(SourceKind::Background),
            _ if id < c => Some(SourceKind::Stimulus),
            _ if id < self.n_sources() => Some(SourceKind::External),
            _ => None,
        }
    }

    #[inline]
    pub(crate) fn raw_fan_out(&self, source: u32) -> &[u32] {
        let s = source as usize;
        &self.targets[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }

    pub fn fan_out(&self, source: u32) -> Result<impl Iterator<Item = (u32, SynapseKind)> + '_> {
        if source as usize >= self.n_sources() {
            return Err(Error::UnknownSource(source));
        }
        Ok(self.raw_fan_out(source).iter().map(|&t| decode(t)))
    }

    pub fn fan_out_len(&self, source: u32) -> usize {
        self.raw_fan_out(source).len()
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len()
    }

    /// Recurrent edges as `(source neuron, target neuron)` pairs.
    pub fn recurrent_edges(&self) -> Vec<(u32, u32)> {
        (0..self.n_neurons as u32)
            .flat_map(|s| self.raw_fan_out(s).iter().map(move |&t| (s, t & !BG_FLAG)))
            .collect()
    }
}

#[inline]
pub(crate) fn decode(t: u32) -> (u32, SynapseKind) {
    if t & BG_FLAG != 0 {
        (t & !BG_FLAG, SynapseKind::Bg)
    } else {
        (t, SynapseKind::Rec)
    }
}

/// Indices `i < n` kept independently with probability `p`, by geometric
/// skipping.
fn bernoulli_subset(rng: &mut impl Rng, n: usize, p: f64, flag: u32) -> Vec<u32> {
    let mut out = Vec::new();
    if p <= 0.0 || n == 0 {
        return out;
    }
    if p >= 1.0 {
        return (0..n as u32).map(|i| i | flag).collect();
    }
    let skip = Geometric::new(p).expect("probability in (0, 1)");
    let mut i = skip.sample(rng);
    while (i as usize) < n {
        out.push(i as u32 | flag);
        i += 1 + skip.sample(rng);
    }
    out
}

/// Random connectivity for the network in `net.mode`.
///
/// Every ordered pair (including self-pairs) is connected independently with
/// `p_rec`, every background-neuron pair with `p_bg`. In open loop the
/// recurrent fan-out lists are attached to a stimulus population of the same
/// size and the neurons get none. Single-neuron mode uses
/// [`build_fixed_in_degree`] with private inputs.
pub fn build_topology(net: &NetworkConfig, seed: u64) -> Result<Topology> {
    net.validate()?;
    if net.mode == Mode::SingleNeuron {
        return build_fixed_in_degree(net.n, FIXED_IN_DEGREE, FIXED_IN_DEGREE, false, &net.delays);
    }
    for (what, expected) in [("recurrent", net.n as f64 * net.p_rec), ("background", net.n as f64 * net.p_bg)] {
        if expected > MAX_FAN_OUT as f64 {
            return Err(Error::config(format!(
                "expected {what} fan-out {expected:.0} exceeds the limit of {MAX_FAN_OUT}"
            )));
        }
    }
    let mut rng = source_rng(seed, TOPOLOGY_STREAM);
    let rec: Vec<Vec<u32>> = (0..net.n).map(|_| bernoulli_subset(&mut rng, net.n, net.p_rec, 0)).collect();
    let bg: Vec<Vec<u32>> = (0..net.n_bg).map(|_| bernoulli_subset(&mut rng, net.n, net.p_bg, BG_FLAG)).collect();
    let mut lists = Vec::with_capacity(2 * net.n + net.n_bg);
    match net.mode {
        Mode::OpenLoop => {
            lists.extend((0..net.n).map(|_| Vec::new()));
            lists.extend(bg);
            lists.extend(rec);
            Topology::from_lists(net.n, net.n_bg, net.n, 0, &net.delays, lists)
        }
        _ => {
            lists.extend(rec);
            lists.extend(bg);
            Topology::from_lists(net.n, net.n_bg, 0, 0, &net.delays, lists)
        }
    }
}

/// Every neuron receives exactly `k_rec` recurrent-kind stimulus inputs and
/// `k_bg` background inputs. With `shared_stimulus` all neurons listen to the
/// same `k_rec + k_bg` sources, otherwise each has private ones.
pub fn build_fixed_in_degree(
    n: usize,
    k_rec: usize,
    k_bg: usize,
    shared_stimulus: bool,
    delays: &[u32],
) -> Result<Topology> {
    let copies = if shared_stimulus { 1 } else { n };
    let all: Vec<u32> = (0..n as u32).collect();
    let targets_of = |c: usize| -> Vec<u32> {
        if shared_stimulus {
            all.clone()
        } else {
            vec![c as u32]
        }
    };
    let mut lists: Vec<Vec<u32>> = (0..n).map(|_| Vec::new()).collect();
    for c in 0..copies {
        for _ in 0..k_bg {
            lists.push(targets_of(c).into_iter().map(|t| t | BG_FLAG).collect());
        }
    }
    for c in 0..copies {
        for _ in 0..k_rec {
            lists.push(targets_of(c));
        }
    }
    Topology::from_lists(n, copies * k_bg, copies * k_rec, 0, delays, lists)
}

/// `n_ext` external inputs, each connected to the listed neurons with
/// recurrent-kind synapses. Appended after all other sources.
pub fn with_external_inputs(topo: &Topology, ext: &[Vec<u32>]) -> Result<Topology> {
    let mut lists: Vec<Vec<u32>> = (0..topo.n_sources() as u32).map(|s| topo.raw_fan_out(s).to_vec()).collect();
    for list in ext {
        if let Some(&bad) = list.iter().find(|&&t| t as usize >= topo.n_neurons) {
            return Err(Error::InvalidArgument(format!("external target {bad} is not a neuron")));
        }
        lists.push(list.clone());
    }
    let n_ext = topo.n_ext + ext.len();
    Topology::from_lists(topo.n_neurons, topo.n_bg, topo.n_stim, n_ext, &topo.delays, lists)
}

/// Expands one pulse into its synaptic deliveries.
pub fn route_spike(source: u32, time: u32, topo: &Topology) -> Result<Vec<Delivery>> {
    let targets: Vec<(u32, SynapseKind)> = topo.fan_out(source)?.collect();
    let mut out = Vec::with_capacity(targets.len() * topo.delays.len());
    for &d in &topo.delays {
        out.extend(targets.iter().map(|&(target, kind)| Delivery { time: time + d, target, kind }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(x: &[u32]) -> (f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = x.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    #[test]
    fn default_in_degrees_are_binomial() {
        let net = NetworkConfig::default();
        let topo = build_topology(&net, 1).unwrap();
        let (m, s) = stats(&topo.in_degree_rec);
        // mean of 2880 binomial(2880, 0.007) draws
        let sd = (2880.0 * 0.007 * 0.993f64).sqrt();
        assert!((m - 20.16).abs() < 3.0 * sd / 2880f64.sqrt(), "{m}");
        assert!((s - sd).abs() < 0.3, "{s}");
        let (m, _) = stats(&topo.in_degree_bg);
        let sd_bg = (200.0 * 0.1 * 0.9f64).sqrt();
        assert!((m - 20.0).abs() < 3.0 * sd_bg / 2880f64.sqrt(), "{m}");
    }

    #[test]
    fn no_recurrent_probability_no_edges() {
        let net = NetworkConfig { p_rec: 0.0, ..Default::default() };
        let topo = build_topology(&net, 1).unwrap();
        assert!(topo.in_degree_rec.iter().all(|&d| d == 0));
    }

    #[test]
    fn same_seed_same_edges() {
        let net = NetworkConfig::default();
        let a = build_topology(&net, 5).unwrap();
        let b = build_topology(&net, 5).unwrap();
        assert_eq!(a.targets, b.targets);
        assert_eq!(a.offsets, b.offsets);
        let c = build_topology(&net, 6).unwrap();
        assert_ne!(a.targets, c.targets);
    }

    #[test]
    fn open_loop_moves_recurrent_edges_to_stimulus() {
        let closed = build_topology(&NetworkConfig::default(), 3).unwrap();
        let open = build_topology(&NetworkConfig { mode: Mode::OpenLoop, ..Default::default() }, 3).unwrap();
        assert_eq!(open.n_stim, 2880);
        assert_eq!(open.in_degree_rec, closed.in_degree_rec);
        for s in 0..2880u32 {
            assert_eq!(open.fan_out_len(s), 0);
            assert_eq!(open.raw_fan_out(open.stim_offset() + s), closed.raw_fan_out(s));
        }
    }

    #[test]
    fn rejects_excessive_fan_out() {
        let net = NetworkConfig { n: 10_000, p_rec: 0.5, ..Default::default() };
        assert!(build_topology(&net, 1).is_err());
    }

    #[test]
    fn fixed_in_degree() {
        let t = build_fixed_in_degree(32, 20, 20, false, &[1]).unwrap();
        assert!(t.in_degree_rec.iter().all(|&d| d == 20));
        assert!(t.in_degree_bg.iter().all(|&d| d == 20));
        assert_eq!(t.n_stim, 640);
        let shared = build_fixed_in_degree(32, 20, 20, true, &[1]).unwrap();
        assert_eq!(shared.n_stim, 20);
        assert!(shared.in_degree_rec.iter().all(|&d| d == 20));
    }

    #[test]
    fn routing_copies_per_delay() {
        let base = build_fixed_in_degree(3, 0, 0, false, &[1, 10, 20, 50]).unwrap();
        let topo = with_external_inputs(&base, &[vec![0, 2], vec![]]).unwrap();
        let src = topo.ext_offset();
        let d = route_spike(src, 100, &topo).unwrap();
        let mut times: Vec<u32> = d.iter().map(|x| x.time).collect();
        times.dedup();
        assert_eq!(times, [101, 110, 120, 150]);
        assert_eq!(d.len(), 8);
        assert!(route_spike(src + 1, 100, &topo).unwrap().is_empty());
        assert!(matches!(route_spike(src + 2, 100, &topo), Err(Error::UnknownSource(_))));
    }

    #[test]
    fn duplicate_delays_deliver_twice() {
        let base = build_fixed_in_degree(1, 0, 0, false, &[5, 5]).unwrap();
        let topo = with_external_inputs(&base, &[vec![0]]).unwrap();
        let d = route_spike(topo.ext_offset(), 0, &topo).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|x| x.time == 5 && x.target == 0));
    }
}
