pub mod bounds;
pub mod ecd;
pub mod error;
pub mod experiments;
pub mod info;
pub mod io;
pub mod operator;
pub mod random;
pub mod thermo;
pub mod zoo;

pub use error::{Error, Result};
