//! `pcw` command-line interface and HTTP service.

pub mod commands;
pub mod config;
pub mod server;
