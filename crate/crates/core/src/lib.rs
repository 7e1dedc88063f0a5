//! Simulation of syndrome-conditioned logical channels for the concatenated
//! seven-qubit Steane code under arbitrary single-qubit noise.

pub mod channel;
pub mod code;
pub mod concat;
pub mod metrics;
pub mod oracle;
pub mod pauli;
pub mod qec;
pub mod sampling;
pub mod sdp;
