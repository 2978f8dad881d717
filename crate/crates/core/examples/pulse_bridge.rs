//! Streams pulses into a running simulation over UDP and reads its spikes
//! back. A client thread plays a regular train into external input 0; each
//! pulse reaches one neuron through four parallel synapses.

use std::net::UdpSocket;
use std::time::Duration;

use scnet::netsim::{build_topology, with_external_inputs, SimOptions, Simulation};
use scnet::params::{Mode, NetworkConfig, SimConfig};
use scnet::pulse_io::{decode_frame, encode_frame, BridgeConfig, PulseBridge, PulseEvent, PulseFrame};

fn main() -> scnet::Result<()> {
    let mut cfg = SimConfig::default();
    cfg.neuron.v_thresh = -58.0;
    cfg.network = NetworkConfig { n: 1, p_rec: 0.0, f_bg: 0.0, g_rec: 12.0, mode: Mode::ClosedLoop, ..Default::default() };
    let topo = with_external_inputs(&build_topology(&cfg.network, 1)?, &[vec![0; 4]])?;
    let mut sim = Simulation::new(&cfg, topo, &SimOptions::default())?;

    let client = UdpSocket::bind("127.0.0.1:0")?;
    client.set_read_timeout(Some(Duration::from_millis(200)))?;
    let mut bridge = PulseBridge::bind(&BridgeConfig {
        bind: "127.0.0.1:0".parse().expect("address"),
        peer: Some(client.local_addr()?),
        queue_capacity: 256,
        paced: true,
    })?;
    let events: Vec<PulseEvent> = (0..10).map(|k| PulseEvent { timestamp: 100 + 500 * k, source: 0, weight: 63 }).collect();
    let frame = PulseFrame { flags: 0, sequence: 0, events };
    client.send_to(&encode_frame(&frame)?, bridge.local_addr()?)?;

    let mut stdout = std::io::stdout();
    bridge.run(&mut sim, 5500, 10_000, Some(&mut stdout))?;
    let mut buf = [0u8; 2048];
    while let Ok((n, _)) = client.recv_from(&mut buf) {
        for e in decode_frame(&buf[..n])?.events {
            println!("neuron {} spiked at tick {}", e.source, e.timestamp);
        }
    }
    Ok(())
}
