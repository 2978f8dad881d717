pub mod analysis;
pub mod crosscheck;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod params;
pub mod pulse_io;
pub mod meanfield;
pub mod netsim;
pub mod reference;
pub mod registers;
pub mod special;

pub use error::{Error, Result};
