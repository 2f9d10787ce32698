//! Surrogate-assisted illumination: Sobol sampling, Gaussian process
//! surrogates, MAP-Elites archives and an airfoil design domain.

pub mod airfoil;
pub mod benchmark;
pub mod elites;
pub mod evaluation;
pub mod genome;
pub mod gp;
pub mod lds;
pub mod linalg;
pub mod rng;
pub mod sail;
