pub mod benchkit;
pub mod cli;
pub mod curation;
pub mod error;
pub mod evalkit;
pub mod graph;
pub mod io;
pub mod mask;
pub mod numeric;
pub mod selector;

pub use error::{Error, Result};
