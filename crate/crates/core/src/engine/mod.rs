//! Register-level emulation of the switched-capacitor neuron.
//!
//! Per tick the neuron runs `cycles_per_tick` clock cycles: incoming weights
//! are accumulated first, then every register decays and drives its
//! oscillator, the resulting switch events move the membrane in cycle order,
//! and the threshold is tested once at the end of the tick.

pub mod membrane;
pub mod neuron;
pub mod stp;
pub mod synapse;

pub use membrane::MembraneState;
pub use neuron::{NeuronModel, ScNeuron};
pub use stp::{StpParams, StpState};
pub use synapse::{PhaseAccumulator, SynapseRegisterState};
