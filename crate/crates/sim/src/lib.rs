//! Configuration, parallel ensembles, campaigns and CSV output for the
//! `mqubit` command-line tool.

pub mod campaigns;
pub mod config;
pub mod ensemble;
pub mod output;
pub mod validate;
