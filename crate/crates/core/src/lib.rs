pub mod bp;
pub mod check;
pub mod error;
pub mod group;
pub mod linalg;
pub mod opnorm;
pub mod optim;
pub mod pseudo;
pub mod rep;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
