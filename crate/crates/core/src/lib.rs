//! Counting lattice points in parametrized semialgebraic families and
//! bounding the error term against the main volume term.

pub mod catalog;
pub mod counting;
pub mod davenport;
pub mod error;
pub mod estimate;
pub mod interval;
pub mod lattice;
pub mod matrix;
pub mod poly;
pub mod rat;
pub mod semialg;
pub mod univariate;
pub mod volume;

pub use error::{Error, Result};
pub use rat::Rat;
