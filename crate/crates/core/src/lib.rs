pub mod catalog;
pub mod characteristics;
pub mod cli;
pub mod error;
pub mod expr;
pub mod geom;
pub mod interp;
pub mod kernel;
pub mod parallelogram;
pub mod problem;
pub mod quadrature;
pub mod solvers;
