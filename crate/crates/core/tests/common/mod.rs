#![allow(dead_code)]

use std::net::UdpSocket;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use scnet::netsim::{build_topology, with_external_inputs, SimOptions, Simulation};
use scnet::params::{Mode, NetworkConfig, SimConfig};
use scnet::pulse_io::{decode_frame, encode_frame, BridgeConfig, BridgeStats, PulseBridge, PulseEvent, PulseFrame};

/// One neuron, no background and four parallel strong external synapses:
/// every input pulse produces one output spike a few milliseconds later,
/// while the residual conductance alone never reaches threshold.
pub fn pass_through_config() -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.neuron.v_thresh = -58.0;
    cfg.network = NetworkConfig { n: 1, p_rec: 0.0, f_bg: 0.0, g_rec: 12.0, mode: Mode::ClosedLoop, ..Default::default() };
    cfg
}

pub fn pass_through_sim() -> Simulation {
    let cfg = pass_through_config();
    let topo = build_topology(&cfg.network, 1).unwrap();
    let topo = with_external_inputs(&topo, &[vec![0; 4]]).unwrap();
    Simulation::new(&cfg, topo, &SimOptions::default()).unwrap()
}

pub struct Loopback {
    pub sent: Vec<u32>,
    pub echoed: Vec<u32>,
    pub stats: BridgeStats,
    pub failure: Option<String>,
}

impl Loopback {
    /// Fraction of input ticks followed by an output spike within `window`
    /// ticks (and not before the input).
    pub fn delivered_fraction(&self, window: u32) -> f64 {
        let hit = self
            .sent
            .iter()
            .filter(|&&t| self.echoed.iter().any(|&e| e >= t && e <= t + window))
            .count();
        hit as f64 / self.sent.len() as f64
    }
}

/// Paced bridge fed by a client thread that sends each event `lead` ticks
/// ahead of its timestamp, one frame per event.
pub fn paced_loopback(n_events: u32, spacing: u32, lead: u32) -> Loopback {
    let client = UdpSocket::bind("127.0.0.1:0").unwrap();
    client.set_read_timeout(Some(Duration::from_millis(50))).unwrap();
    let mut sim = pass_through_sim();
    let mut bridge = PulseBridge::bind(&BridgeConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        peer: Some(client.local_addr().unwrap()),
        queue_capacity: 1024,
        paced: true,
    })
    .unwrap();
    let target = bridge.local_addr().unwrap();
    let sent: Vec<u32> = (0..n_events).map(|k| 200 + k * spacing).collect();
    let total_ticks = sent.last().unwrap() + 500;
    let tick = Duration::from_micros(100);

    let tx = client.try_clone().unwrap();
    let schedule = sent.clone();
    let start = Instant::now();
    let sender = std::thread::spawn(move || {
        for (seq, &t) in schedule.iter().enumerate() {
            let due = start + tick * (t - lead);
            if let Some(w) = due.checked_duration_since(Instant::now()) {
                std::thread::sleep(w);
            }
            let frame = PulseFrame { flags: 0, sequence: seq as u16, events: vec![PulseEvent { timestamp: t, source: 0, weight: 63 }] };
            tx.send_to(&encode_frame(&frame).unwrap(), target).unwrap();
        }
    });
    let rx = client;
    let done = Arc::new(AtomicBool::new(false));
    let finished = done.clone();
    let receiver = std::thread::spawn(move || {
        let mut echoed = Vec::new();
        let mut buf = [0u8; 2048];
        loop {
            match rx.recv_from(&mut buf) {
                Ok((n, _)) => {
                    if let Ok(f) = decode_frame(&buf[..n]) {
                        echoed.extend(f.events.iter().map(|e| e.timestamp));
                    }
                }
                Err(_) if finished.load(Ordering::Relaxed) => break,
                Err(_) => {}
            }
        }
        echoed
    });
    bridge.run(&mut sim, total_ticks, 0, None).unwrap();
    sender.join().unwrap();
    done.store(true, Ordering::Relaxed);
    let echoed = receiver.join().unwrap();
    Loopback { sent, echoed, stats: bridge.stats(), failure: bridge.failure() }
}
