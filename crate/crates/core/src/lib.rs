//! Hybrid Benders decomposition for small mixed-binary linear programs,
//! with the master problem solved as a QUBO.

pub mod benders;
pub mod cuts;
pub mod fixtures;
pub mod harness;
pub mod lp_simplex;
pub mod model;
pub mod qubo_encode;
pub mod qubo_solve;
