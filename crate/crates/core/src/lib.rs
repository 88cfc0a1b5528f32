//! Partition-and-synthesize CNOT optimizer for routed quantum circuits.

pub mod bench;
pub mod circuit;
pub mod compose;
pub mod error;
pub mod noise;
pub mod partition;
pub mod pipeline;
pub mod router;
pub mod seed;
pub mod sim;
pub mod synthesis;
pub mod topology;

pub use error::{QgoError, Result};
