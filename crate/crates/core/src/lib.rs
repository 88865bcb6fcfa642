pub mod cli;
pub mod dynamics;
pub mod experiments;
pub mod io;
pub mod model;
pub mod qlinalg;
pub mod spectral;
