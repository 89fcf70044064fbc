//! Design and reliability analysis of LDPC erasure codes for distributed storage.

pub mod cli;
pub mod construct;
pub mod ddopt;
pub mod density_evolution;
pub mod graph;
pub mod peeling;
pub mod reliability;
