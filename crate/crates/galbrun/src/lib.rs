//! Configuration files, reports and the `galbrun` command-line front-end
//! for [`galbrun_core`].

pub mod cli;
pub mod config;
pub mod output;
pub mod suite;

pub use galbrun_core as core;
