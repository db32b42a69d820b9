pub mod annealer;
pub mod bench;
pub mod fv;
pub mod landscape;
pub mod objective;
pub mod qaoa;
pub mod rng;
