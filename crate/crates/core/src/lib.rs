//! Simulator for the quantum no-key (three-pass) protocol.

pub mod adversary;
pub mod bits;
pub mod canonical;
pub mod cli;
pub mod boolfn;
pub mod oracle;
pub mod protocol;
pub mod statevector;
