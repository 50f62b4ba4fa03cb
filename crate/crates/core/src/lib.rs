pub mod bpso;
pub mod dataset;
pub mod des;
pub mod error;
pub mod experiment;
pub mod features;
pub mod persist;
pub mod pool;
pub mod region;
pub mod rng;
pub mod selector;
pub mod training;
