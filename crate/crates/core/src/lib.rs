//! Discrete-event HPC job-scheduling simulator and benchmark harness.
//!
//! A fixed cluster (256 nodes, 2048 GB by default) receives a fully
//! submitted queue of jobs and a policy assigns start times: FCFS, SJF, an
//! exact small-instance makespan minimizer, or a prompt-driven scheduling
//! agent that reasons in a Thought/Action loop against the simulator's
//! constraint enforcement. Runs produce seven objective metrics plus
//! FCFS-normalized comparisons and agent overhead statistics.

pub mod agent;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod provider;
pub mod sim;
pub mod workload;

pub use error::{Error, Result};
