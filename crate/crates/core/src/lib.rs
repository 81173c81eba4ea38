pub mod crossscale;
pub mod error;
pub mod evaluation;
pub mod fixture;
pub mod footprint;
pub mod geometry;
pub mod io;
pub mod kgraph;
pub mod proximity;
pub mod reasoner;
pub mod relations;
pub mod scene;

pub use error::{Error, Result};
