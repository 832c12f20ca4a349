//! Experiment harness and command-line front end for robust NF provisioning.

pub mod app;
pub mod experiment;
pub mod output;
