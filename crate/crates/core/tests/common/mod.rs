//! Independent brute-force oracles for the integration suites.
//!
//! Everything here recomputes results from first principles (per-second
//! occupancy scans, exhaustive permutation enumeration) and stays
//! deliberately separate from the library's own event-based accounting.

use std::collections::BTreeMap;

use schedbench::sim::Schedule;
use schedbench::workload::{ClusterConfig, JobSpec};

/// The eight metric values recomputed by brute force.
#[derive(Debug, Clone, Copy)]
pub struct OracleMetrics {
    pub makespan: f64,
    pub avg_wait: f64,
    pub avg_turnaround: f64,
    pub throughput: f64,
    pub node_utilization: f64,
    pub memory_utilization: f64,
    pub jain_job: f64,
    pub jain_user: f64,
}

fn jain(values: &[f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        1.0
    } else {
        sum * sum / (values.len() as f64 * sum_sq)
    }
}

/// Recompute all eight metrics by scanning occupancy second by second.
pub fn per_second_metrics(
    jobs: &[JobSpec],
    schedule: &Schedule,
    config: &ClusterConfig,
) -> OracleMetrics {
    let starts: BTreeMap<u32, u64> = jobs
        .iter()
        .map(|j| {
            (
                j.job_id,
                schedule.start_of(j.job_id).expect("total schedule"),
            )
        })
        .collect();
    let makespan = jobs
        .iter()
        .map(|j| starts[&j.job_id] + j.walltime)
        .max()
        .unwrap();
    let min_start = jobs.iter().map(|j| starts[&j.job_id]).min().unwrap();

    let mut node_seconds = 0u64;
    let mut memory_seconds = 0u64;
    for t in 0..makespan {
        for job in jobs {
            let x = starts[&job.job_id];
            if x <= t && t < x + job.walltime {
                node_seconds += job.nodes as u64;
                memory_seconds += job.memory_gb as u64;
            }
        }
    }

    let n = jobs.len() as f64;
    let waits: Vec<f64> = jobs
        .iter()
        .map(|j| (starts[&j.job_id] - j.submit_time) as f64)
        .collect();
    let turnarounds: Vec<f64> = jobs
        .iter()
        .map(|j| (starts[&j.job_id] + j.walltime - j.submit_time) as f64)
        .collect();

    let mut user_waits: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (job, wait) in jobs.iter().zip(&waits) {
        user_waits
            .entry(job.user_id.as_str())
            .or_default()
            .push(*wait);
    }
    let user_means: Vec<f64> = user_waits
        .values()
        .map(|w| w.iter().sum::<f64>() / w.len() as f64)
        .collect();

    OracleMetrics {
        makespan: makespan as f64,
        avg_wait: waits.iter().sum::<f64>() / n,
        avg_turnaround: turnarounds.iter().sum::<f64>() / n,
        throughput: n / (makespan - min_start) as f64,
        node_utilization: node_seconds as f64 / (config.total_nodes as f64 * makespan as f64),
        memory_utilization: memory_seconds as f64
            / (config.total_memory_gb as f64 * makespan as f64),
        jain_job: jain(&waits),
        jain_user: jain(&user_means),
    }
}

/// Per-second capacity check, the slow cousin of `audit_schedule`.
pub fn per_second_audit_clean(
    jobs: &[JobSpec],
    schedule: &Schedule,
    config: &ClusterConfig,
) -> bool {
    let makespan = jobs
        .iter()
        .map(|j| schedule.start_of(j.job_id).unwrap() + j.walltime)
        .max()
        .unwrap();
    for t in 0..makespan {
        let mut nodes = 0u64;
        let mut memory = 0u64;
        for job in jobs {
            let x = schedule.start_of(job.job_id).unwrap();
            if x <= t && t < x + job.walltime {
                nodes += job.nodes as u64;
                memory += job.memory_gb as u64;
            }
        }
        if nodes > config.total_nodes as u64 || memory > config.total_memory_gb as u64 {
            return false;
        }
    }
    true
}

/// `|a - b|` within `tol` relative to the larger magnitude (or absolutely
/// for values near zero).
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
