//! Command-line pipeline: dataset loading, configuration, the subcommands
//! and attention heat-map export.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod html;
