pub mod bounds;
pub mod cli;
pub mod exactalg;
pub mod fourier;
pub mod ifs;
pub mod sampler;
pub mod semigroup;
