pub mod census;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod graph;
pub mod limits;
pub mod quad;
pub mod rng;
pub mod rules;
pub mod stats;
pub mod verify;
pub mod weights;
