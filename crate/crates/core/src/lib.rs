pub mod analysis;
pub mod cli;
pub mod error;
pub mod green;
pub mod grid;
pub mod kernels;
pub mod mac;
pub mod poisson;
pub mod problem;
pub mod sparse;
pub mod three_poisson;
