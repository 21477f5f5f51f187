//! Configuration-driven front end for the `yamabe` solver.

pub mod commands;
pub mod config;
pub mod json;
