pub mod cli;
pub mod decomposition;
pub mod dynamics;
pub mod engine;
pub mod exchange;
mod error;
pub mod graph;
pub mod io;
pub mod netbuild;
pub mod network;
pub mod plasticity;

pub use error::{Error, Result};
