pub mod cayley_menger;
pub mod counterexample;
pub mod error;
pub mod gadgets;
pub mod io;
pub mod number;
pub mod poly;
pub mod propagation;
pub mod ring;

pub use error::{Error, Result};
