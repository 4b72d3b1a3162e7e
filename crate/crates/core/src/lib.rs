pub mod congestion;
pub mod control_flow;
pub mod error;
pub mod event_log;
pub mod harness;
pub mod kernels;
pub mod sim;
pub mod temporal;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
