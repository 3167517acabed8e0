pub mod dynamics;
pub mod error;
pub mod math;
pub mod portrait;
pub mod quantum;
pub mod window;

pub use error::{Error, Result};
