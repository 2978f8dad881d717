//! UDP pulse exchange with external processes.
//!
//! One datagram carries one frame:
//!
//! ```text
//! "PLSE" | version u8 | flags u8 | sequence u16 BE | count × record
//! record = timestamp u32 BE (ticks) | source u16 BE | weight u8 | reserved u8
//! ```
//!
//! The event count follows from the datagram length. Inbound events address
//! external inputs of the simulation by `source`; outbound frames carry the
//! spikes of one tick with the neuron index as `source`.

use std::collections::VecDeque;
use std::io::{ErrorKind, Write};
use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netsim::Simulation;

pub const MAGIC: [u8; 4] = *b"PLSE";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 8;
pub const RECORD_LEN: usize = 8;
/// Largest frame that fits a 1500-byte datagram.
pub const MAX_EVENTS: usize = 180;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PulseEvent {
    pub timestamp: u32,
    pub source: u16,
    pub weight: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PulseFrame {
    pub flags: u8,
    pub sequence: u16,
    pub events: Vec<PulseEvent>,
}

pub fn encode_frame(frame: &PulseFrame) -> Result<Vec<u8>> {
    if frame.events.len() > MAX_EVENTS {
        return Err(Error::FrameTooLarge(frame.events.len()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * frame.events.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(frame.flags);
    out.extend_from_slice(&frame.sequence.to_be_bytes());
    for e in &frame.events {
        out.extend_from_slice(&e.timestamp.to_be_bytes());
        out.extend_from_slice(&e.source.to_be_bytes());
        out.push(e.weight);
        out.push(0);
    }
    Ok(out)
}

/// Validates the whole datagram before returning any event.
pub fn decode_frame(bytes: &[u8]) -> Result<PulseFrame> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated(bytes.len()));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(Error::VersionMismatch(bytes[4]));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() % RECORD_LEN != 0 {
        return Err(Error::Truncated(bytes.len()));
    }
    let count = payload.len() / RECORD_LEN;
    if count > MAX_EVENTS {
        return Err(Error::FrameTooLarge(count));
    }
    let events = payload
        .chunks_exact(RECORD_LEN)
        .map(|r| PulseEvent {
            timestamp: u32::from_be_bytes([r[0], r[1], r[2], r[3]]),
            source: u16::from_be_bytes([r[4], r[5]]),
            weight: r[6],
        })
        .collect();
    Ok(PulseFrame { flags: bytes[5], sequence: u16::from_be_bytes([bytes[6], bytes[7]]), events })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BridgeStats {
    pub tick: u32,
    pub frames_in: u64,
    pub events_in: u64,
    pub malformed: u64,
    pub sequence_gaps: u64,
    /// Oldest events discarded because the inbound queue was full.
    pub dropped_overflow: u64,
    pub late: u64,
    pub unknown_source: u64,
    pub injected: u64,
    pub frames_out: u64,
    pub events_out: u64,
}

#[derive(Debug, Clone)]
pub struct BridgeConfig {
    pub bind: SocketAddr,
    /// Destination of outbound spike frames; none means receive only.
    pub peer: Option<SocketAddr>,
    pub queue_capacity: usize,
    /// Hold every tick until its wall-clock time has come.
    pub paced: bool,
}

impl BridgeConfig {
    pub fn new(bind: SocketAddr) -> Self {
        BridgeConfig { bind, peer: None, queue_capacity: 4096, paced: false }
    }
}

#[derive(Default)]
struct Inbox {
    queue: VecDeque<PulseEvent>,
    stats: BridgeStats,
    last_sequence: Option<u16>,
    failure: Option<String>,
}

/// Live link between a UDP socket and a running [`Simulation`].
///
/// A receiver thread decodes datagrams into a bounded queue; the tick loop
/// drains it at tick boundaries through [`PulseBridge::step`]. Socket
/// failures end the session (see [`PulseBridge::failure`]) but never stop
/// the simulation.
pub struct PulseBridge {
    socket: UdpSocket,
    peer: Option<SocketAddr>,
    paced: bool,
    inbox: Arc<Mutex<Inbox>>,
    stop: Arc<AtomicBool>,
    receiver: Option<JoinHandle<()>>,
    sequence: u16,
    started: Option<(Instant, u32)>,
    send_failure: Option<String>,
}

impl PulseBridge {
    pub fn bind(cfg: &BridgeConfig) -> Result<Self> {
        if cfg.queue_capacity == 0 {
            return Err(Error::InvalidArgument("queue capacity must be positive".into()));
        }
        let socket = UdpSocket::bind(cfg.bind)?;
        socket.set_read_timeout(Some(Duration::from_millis(20)))?;
        let rx = socket.try_clone()?;
        let inbox = Arc::new(Mutex::new(Inbox::default()));
        let stop = Arc::new(AtomicBool::new(false));
        let receiver = {
            let (inbox, stop, cap) = (inbox.clone(), stop.clone(), cfg.queue_capacity);
            std::thread::spawn(move || receive_loop(rx, inbox, stop, cap))
        };
        Ok(PulseBridge {
            socket,
            peer: cfg.peer,
            paced: cfg.paced,
            inbox,
            stop,
            receiver: Some(receiver),
            sequence: 0,
            started: None,
            send_failure: None,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.socket.local_addr()?)
    }

    pub fn stats(&self) -> BridgeStats {
        self.inbox.lock().expect("inbox lock").stats
    }

    /// Diagnostic of the socket failure that ended the session, if any.
    pub fn failure(&self) -> Option<String> {
        self.send_failure.clone().or_else(|| self.inbox.lock().expect("inbox lock").failure.clone())
    }

    /// Injects queued events, advances the simulation one tick and sends
    /// the resulting spikes.
    pub fn step(&mut self, sim: &mut Simulation) -> Result<()> {
        let now = sim.time();
        if self.paced {
            let (t0, tick0) = *self.started.get_or_insert((Instant::now(), now));
            let due = t0 + Duration::from_secs_f64((now - tick0) as f64 * sim.tick_ms() * 1e-3);
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
        let pending: Vec<PulseEvent> = {
            let mut inbox = self.inbox.lock().expect("inbox lock");
            inbox.stats.tick = now;
            inbox.queue.drain(..).collect()
        };
        let (mut late, mut unknown, mut injected) = (0, 0, 0);
        for e in pending {
            if e.source as usize >= sim.topology().n_ext {
                unknown += 1;
            } else if sim.inject(e.source as u32, e.timestamp, e.weight)? {
                injected += 1;
            } else {
                late += 1;
            }
        }
        let fired: Vec<PulseEvent> = sim
            .step()?
            .iter()
            .filter_map(|&(i, w)| u16::try_from(i).ok().map(|source| PulseEvent { timestamp: now, source, weight: w }))
            .collect();
        let (mut frames, mut events) = (0, 0);
        if let (Some(peer), None) = (self.peer, &self.send_failure) {
            for chunk in fired.chunks(MAX_EVENTS) {
                let frame = PulseFrame { flags: 0, sequence: self.sequence, events: chunk.to_vec() };
                match self.socket.send_to(&encode_frame(&frame)?, peer) {
                    Ok(_) => {
                        self.sequence = self.sequence.wrapping_add(1);
                        frames += 1;
                        events += chunk.len() as u64;
                    }
                    Err(e) if e.kind() == ErrorKind::WouldBlock => {}
                    Err(e) => {
                        self.send_failure = Some(format!("send to {peer} failed: {e}"));
                        break;
                    }
                }
            }
        }
        let mut inbox = self.inbox.lock().expect("inbox lock");
        let s = &mut inbox.stats;
        s.late += late;
        s.unknown_source += unknown;
        s.injected += injected;
        s.frames_out += frames;
        s.events_out += events;
        Ok(())
    }

    /// Runs `ticks` ticks, writing the statistics as one JSON line every
    /// `stats_every` ticks (and once at the end) when `stats_out` is given.
    pub fn run(
        &mut self,
        sim: &mut Simulation,
        ticks: u32,
        stats_every: u32,
        mut stats_out: Option<&mut dyn Write>,
    ) -> Result<BridgeStats> {
        for i in 0..ticks {
            self.step(sim)?;
            if let Some(out) = stats_out.as_deref_mut() {
                if stats_every > 0 && (i + 1) % stats_every == 0 && i + 1 != ticks {
                    write_stats_line(out, &self.stats())?;
                }
            }
        }
        let stats = self.stats();
        if let Some(out) = stats_out {
            write_stats_line(out, &stats)?;
        }
        Ok(stats)
    }
}

impl Drop for PulseBridge {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.receiver.take() {
            let _ = h.join();
        }
    }
}

pub fn write_stats_line(out: &mut dyn Write, stats: &BridgeStats) -> Result<()> {
    serde_json::to_writer(&mut *out, stats)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn receive_loop(socket: UdpSocket, inbox: Arc<Mutex<Inbox>>, stop: Arc<AtomicBool>, capacity: usize) {
    let mut buf = [0u8; 2048];
    while !stop.load(Ordering::Relaxed) {
        let n = match socket.recv_from(&mut buf) {
            Ok((n, _)) => n,
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => continue,
            // An earlier send to a closed port can surface here on some platforms.
            Err(e) if e.kind() == ErrorKind::ConnectionRefused => continue,
            Err(e) => {
                inbox.lock().expect("inbox lock").failure = Some(format!("receive failed: {e}"));
                return;
            }
        };
        let decoded = decode_frame(&buf[..n]);
        let mut guard = inbox.lock().expect("inbox lock");
        let inbox = &mut *guard;
        match decoded {
            Err(_) => inbox.stats.malformed += 1,
            Ok(frame) => {
                if let Some(last) = inbox.last_sequence {
                    if frame.sequence != last.wrapping_add(1) {
                        inbox.stats.sequence_gaps += 1;
                    }
                }
                inbox.last_sequence = Some(frame.sequence);
                inbox.stats.frames_in += 1;
                inbox.stats.events_in += frame.events.len() as u64;
                for e in frame.events {
                    if inbox.queue.len() == capacity {
                        inbox.queue.pop_front();
                        inbox.stats.dropped_overflow += 1;
                    }
                    inbox.queue.push_back(e);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(timestamp: u32, source: u16, weight: u8) -> PulseEvent {
        PulseEvent { timestamp, source, weight }
    }

    #[test]
    fn empty_frame_is_eight_bytes() {
        let f = PulseFrame { flags: 0, sequence: 0, events: vec![] };
        let b = encode_frame(&f).unwrap();
        assert_eq!(b, b"PLSE\x01\x00\x00\x00");
        assert_eq!(decode_frame(&b).unwrap(), f);
    }

    #[test]
    fn single_event_golden_bytes() {
        let f = PulseFrame { flags: 0, sequence: 0x0102, events: vec![ev(100, 7, 63)] };
        let b = encode_frame(&f).unwrap();
        assert_eq!(b, [b'P', b'L', b'S', b'E', 1, 0, 1, 2, 0, 0, 0, 100, 0, 7, 63, 0]);
        assert_eq!(decode_frame(&b).unwrap(), f);
    }

    #[test]
    fn malformed_frames_have_distinct_errors() {
        let good = encode_frame(&PulseFrame { flags: 0, sequence: 1, events: vec![ev(1, 2, 3)] }).unwrap();
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(matches!(decode_frame(&magic), Err(Error::BadMagic)));
        let mut version = good.clone();
        version[4] = 2;
        assert!(matches!(decode_frame(&version), Err(Error::VersionMismatch(2))));
        assert!(matches!(decode_frame(&good[..12]), Err(Error::Truncated(12))));
        assert!(matches!(decode_frame(&good[..5]), Err(Error::Truncated(5))));
        let big = vec![0u8; HEADER_LEN + RECORD_LEN * (MAX_EVENTS + 1)];
        let mut big = big;
        big[..5].copy_from_slice(b"PLSE\x01");
        assert!(matches!(decode_frame(&big), Err(Error::FrameTooLarge(181))));
        let too_many = PulseFrame { flags: 0, sequence: 0, events: vec![ev(0, 0, 0); MAX_EVENTS + 1] };
        assert!(matches!(encode_frame(&too_many), Err(Error::FrameTooLarge(181))));
    }

    #[test]
    fn full_frame_fits_a_datagram() {
        let f = PulseFrame { flags: 0, sequence: 0, events: vec![ev(0, 0, 0); MAX_EVENTS] };
        assert!(encode_frame(&f).unwrap().len() <= 1472);
    }

    proptest! {
        #[test]
        fn round_trip(flags: u8, sequence: u16, raw in prop::collection::vec((any::<u32>(), any::<u16>(), any::<u8>()), 0..=MAX_EVENTS)) {
            let f = PulseFrame { flags, sequence, events: raw.into_iter().map(|(t, s, w)| ev(t, s, w)).collect() };
            let b = encode_frame(&f).unwrap();
            prop_assert_eq!(b.len(), HEADER_LEN + RECORD_LEN * f.events.len());
            prop_assert_eq!(decode_frame(&b).unwrap(), f);
        }

        #[test]
        fn decode_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            let _ = decode_frame(&bytes);
        }
    }
}
