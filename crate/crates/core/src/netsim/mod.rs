//! Network simulation: connectivity, Poisson sources, pulse routing with
//! axonal delays, and the tick loop that drives the emulated neurons.

pub mod poisson;
pub mod protocol;
pub mod sim;
pub mod topology;

pub use poisson::{generate_poisson, PoissonSource};
pub use protocol::{run_experiment, ExperimentProtocol, SpikeRecord, SweepPoint};
pub use sim::{SimOptions, Simulation, Throughput};
pub use topology::{
    build_fixed_in_degree, build_topology, route_spike, with_external_inputs, Delivery, SourceKind, Topology,
    FIXED_IN_DEGREE,
};
