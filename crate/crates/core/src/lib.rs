pub mod builtins;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod falsifier;
pub mod lp;
pub mod model;
pub mod poly;
pub mod report;
pub mod sampling;
pub mod tol;
pub mod value_function;

pub use error::{Error, Result};
pub use tol::Tolerances;
