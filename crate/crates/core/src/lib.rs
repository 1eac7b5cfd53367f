//! Instance space analysis of algorithm performance meta-data.

pub mod artifact;
pub mod boundary;
pub mod cfgfeat;
pub mod config;
pub mod error;
pub mod featsel;
pub mod footprint;
pub mod geometry;
pub mod metadata;
pub mod pilot;
pub mod pipeline;
pub mod plot;
pub mod prep;
pub mod recommend;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
