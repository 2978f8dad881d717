use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scnet::experiments::{
    cmd_closed_loop, cmd_mean_field, cmd_open_loop, cmd_phase_plane, cmd_single_neuron, parse_grid, RunManifest,
    RunSettings,
};
use scnet::netsim::{build_topology, with_external_inputs, SimOptions, Simulation};
use scnet::params::SimConfig;
use scnet::pulse_io::{BridgeConfig, PulseBridge};

#[derive(Parser)]
#[command(name = "scnet", version, about = "Switched-capacitor network emulator experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Seconds (per sweep point for sweeps).
    #[arg(long, global = true)]
    duration: Option<f64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Input-rate grid "a:b:step".
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Also write every spike as CSV.
    #[arg(long, global = true)]
    spikes: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-in-degree single-neuron transfer curves.
    SingleNeuron {
        #[arg(long, default_value_t = 32)]
        neurons: usize,
    },
    /// Open-loop population transfer curves.
    OpenLoop {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        g_rec: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
        g_sfa: Vec<f64>,
    },
    /// Closed-loop transients.
    ClosedLoop {
        #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
        g_sfa: Vec<f64>,
    },
    /// Burst statistics over a (g_SFA, g_rec) grid.
    PhasePlane {
        #[arg(long, default_value = "1:4:1")]
        g_sfa: String,
        #[arg(long, default_value = "3:4.5:0.5")]
        g_rec: String,
    },
    /// Mean-field transfer curves and fixed points.
    MeanField,
    /// Exchange pulses with an external process over UDP.
    Bridge {
        #[arg(long, default_value = "127.0.0.1:7700")]
        bind: SocketAddr,
        #[arg(long)]
        peer: Option<SocketAddr>,
        /// External inputs; input i projects onto neuron i.
        #[arg(long, default_value_t = 16)]
        inputs: usize,
        /// Run unpaced instead of in real time.
        #[arg(long)]
        unpaced: bool,
    },
}

fn run(cli: Cli) -> scnet::Result<serde_json::Value> {
    let c = cli.common;
    let mut cfg = match &c.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.network.seed = seed;
    }
    let mut s = RunSettings::new(cfg, &c.out_dir);
    s.duration_s = c.duration;
    s.threads = c.threads;
    s.write_spikes = c.spikes;
    s.grid = c.grid.as_deref().map(parse_grid).transpose()?;
    let manifest: RunManifest = match cli.command {
        Command::SingleNeuron { neurons } => {
            s.config.network.n = neurons;
            cmd_single_neuron(&s)?.1
        }
        Command::OpenLoop { g_rec, g_sfa } => cmd_open_loop(&s, &g_rec, &g_sfa)?.1,
        Command::ClosedLoop { g_sfa } => cmd_closed_loop(&s, &g_sfa)?.1,
        Command::PhasePlane { g_sfa, g_rec } => cmd_phase_plane(&s, &parse_grid(&g_sfa)?, &parse_grid(&g_rec)?)?.1,
        Command::MeanField => cmd_mean_field(&s)?.1,
        Command::Bridge { bind, peer, inputs, unpaced } => return bridge(&s, bind, peer, inputs, !unpaced),
    };
    Ok(serde_json::json!({ "command": manifest.command, "outputs": manifest.outputs, "summary": manifest.summary }))
}

fn bridge(s: &RunSettings, bind: SocketAddr, peer: Option<SocketAddr>, inputs: usize, paced: bool) -> scnet::Result<serde_json::Value> {
    let cfg = &s.config;
    let base = build_topology(&cfg.network, cfg.network.seed)?;
    let ext: Vec<Vec<u32>> = (0..inputs.min(base.n_neurons) as u32).map(|i| vec![i]).collect();
    let topo = with_external_inputs(&base, &ext)?;
    let opts = SimOptions { threads: s.threads, record_spikes: false, ..Default::default() };
    let mut sim = Simulation::new(cfg, topo, &opts)?;
    let mut bridge = PulseBridge::bind(&BridgeConfig { bind, peer, queue_capacity: 4096, paced })?;
    let ticks = (s.duration_s.unwrap_or(10.0) * 1e3 / sim.tick_ms()).round() as u32;
    let per_second = (1e3 / sim.tick_ms()).round() as u32;
    let mut stdout = std::io::stdout();
    let stats = bridge.run(&mut sim, ticks, per_second, Some(&mut stdout))?;
    Ok(serde_json::json!({ "command": "bridge", "stats": stats, "failure": bridge.failure() }))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
