pub mod bubble;
pub mod cli;
pub mod energy;
pub mod error;
pub mod norms;
pub mod point;
pub mod pohozaev;
pub mod potential;
pub mod precise;
pub mod quadrature;
pub mod reduction;
pub mod regression;
pub mod special;
pub mod symmetry;

pub use error::{Error, Result};
