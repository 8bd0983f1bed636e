pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod rational;
pub mod beliefs;
pub mod sampling;
pub mod analysis;
pub mod synthesis;
pub mod verification;
pub mod lab;
pub mod cli;
