//! Multiple Search metaheuristic for the capacitated vehicle routing problem.

pub mod bench;
pub mod construction;
pub mod elite;
pub mod features;
pub mod instance;
pub mod search;
pub mod solution;
pub mod solver;
pub mod splitpr;
