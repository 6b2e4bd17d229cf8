//! Objective metrics over completed schedules and FCFS-relative
//! normalization.
//!
//! All start times are integer seconds; the report values are ratios and
//! averages, so everything is computed in f64.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Schedule;
use crate::workload::{ClusterConfig, JobSpec};

/// The seven objective values for one run (node and memory utilization
/// count as one objective in two parts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub makespan: f64,
    pub avg_wait: f64,
    pub avg_turnaround: f64,
    pub throughput: f64,
    pub node_utilization: f64,
    pub memory_utilization: f64,
    pub jain_job: f64,
    pub jain_user: f64,
    #[serde(skip)]
    pub num_jobs: usize,
}

/// Field handles for iterating reports in a stable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricField {
    Makespan,
    AvgWait,
    AvgTurnaround,
    Throughput,
    NodeUtilization,
    MemoryUtilization,
    JainJob,
    JainUser,
}

impl MetricField {
    pub const ALL: [MetricField; 8] = [
        MetricField::Makespan,
        MetricField::AvgWait,
        MetricField::AvgTurnaround,
        MetricField::Throughput,
        MetricField::NodeUtilization,
        MetricField::MemoryUtilization,
        MetricField::JainJob,
        MetricField::JainUser,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricField::Makespan => "makespan",
            MetricField::AvgWait => "avg_wait",
            MetricField::AvgTurnaround => "avg_turnaround",
            MetricField::Throughput => "throughput",
            MetricField::NodeUtilization => "node_utilization",
            MetricField::MemoryUtilization => "memory_utilization",
            MetricField::JainJob => "jain_job",
            MetricField::JainUser => "jain_user",
        }
    }
}

impl MetricsReport {
    pub fn get(&self, field: MetricField) -> f64 {
        match field {
            MetricField::Makespan => self.makespan,
            MetricField::AvgWait => self.avg_wait,
            MetricField::AvgTurnaround => self.avg_turnaround,
            MetricField::Throughput => self.throughput,
            MetricField::NodeUtilization => self.node_utilization,
            MetricField::MemoryUtilization => self.memory_utilization,
            MetricField::JainJob => self.jain_job,
            MetricField::JainUser => self.jain_user,
        }
    }
}

/// A report expressed as fieldwise ratios against an FCFS baseline.
///
/// Undefined ratios (baseline 0, value > 0) are stored as `f64::INFINITY`
/// and listed in `undefined`; report writers render them as "inf" and
/// aggregates exclude them.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedReport {
    pub makespan: f64,
    pub avg_wait: f64,
    pub avg_turnaround: f64,
    pub throughput: f64,
    pub node_utilization: f64,
    pub memory_utilization: f64,
    pub jain_job: f64,
    pub jain_user: f64,
    pub undefined: Vec<MetricField>,
}

impl NormalizedReport {
    pub fn get(&self, field: MetricField) -> f64 {
        match field {
            MetricField::Makespan => self.makespan,
            MetricField::AvgWait => self.avg_wait,
            MetricField::AvgTurnaround => self.avg_turnaround,
            MetricField::Throughput => self.throughput,
            MetricField::NodeUtilization => self.node_utilization,
            MetricField::MemoryUtilization => self.memory_utilization,
            MetricField::JainJob => self.jain_job,
            MetricField::JainUser => self.jain_user,
        }
    }

    pub fn is_undefined(&self, field: MetricField) -> bool {
        self.undefined.contains(&field)
    }
}

/// Jain's fairness index: `(sum v)^2 / (n * sum v^2)`.
///
/// An all-zero vector has zero variance and is defined as perfectly fair
/// (1.0); the result is always in (0, 1].
pub fn jain_index(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("jain_index of an empty vector".into()));
    }
    if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "jain_index requires finite non-negative values".into(),
        ));
    }
    // Constant vectors (including all-zero) are exactly fair; skip the
    // formula so float rounding cannot drag the result off 1.0.
    if values.windows(2).all(|w| w[0] == w[1]) {
        return Ok(1.0);
    }
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Ok(1.0);
    }
    // The index is <= 1 by Cauchy-Schwarz; clamp away float rounding.
    Ok((sum * sum / (values.len() as f64 * sum_sq)).min(1.0))
}

/// Compute all eight metric values from a total schedule.
pub fn compute_metrics(
    jobs: &[JobSpec],
    schedule: &Schedule,
    config: &ClusterConfig,
) -> Result<MetricsReport> {
    if jobs.is_empty() {
        return Err(Error::InvalidInput("no jobs to evaluate".into()));
    }
    let mut starts = Vec::with_capacity(jobs.len());
    for job in jobs {
        let x = schedule.start_of(job.job_id).ok_or_else(|| {
            Error::InvalidInput(format!("schedule is missing job {}", job.job_id))
        })?;
        starts.push(x);
    }

    let n = jobs.len() as f64;
    let makespan = jobs
        .iter()
        .zip(&starts)
        .map(|(j, &x)| x + j.walltime)
        .max()
        .unwrap() as f64;
    let min_start = *starts.iter().min().unwrap() as f64;

    let waits: Vec<f64> = jobs
        .iter()
        .zip(&starts)
        .map(|(j, &x)| (x - j.submit_time) as f64)
        .collect();
    let avg_wait = waits.iter().sum::<f64>() / n;
    let avg_turnaround = jobs
        .iter()
        .zip(&starts)
        .map(|(j, &x)| (x + j.walltime - j.submit_time) as f64)
        .sum::<f64>()
        / n;
    let throughput = n / (makespan - min_start);

    let node_area: f64 = jobs
        .iter()
        .map(|j| (j.nodes as u64 * j.walltime) as f64)
        .sum();
    let mem_area: f64 = jobs
        .iter()
        .map(|j| (j.memory_gb as u64 * j.walltime) as f64)
        .sum();
    let node_utilization = node_area / (config.total_nodes as f64 * makespan);
    let memory_utilization = mem_area / (config.total_memory_gb as f64 * makespan);

    let jain_job = jain_index(&waits)?;
    let mut per_user: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for (job, wait) in jobs.iter().zip(&waits) {
        let entry = per_user.entry(job.user_id.as_str()).or_insert((0.0, 0.0));
        entry.0 += wait;
        entry.1 += 1.0;
    }
    let user_means: Vec<f64> = per_user.values().map(|(sum, count)| sum / count).collect();
    let jain_user = jain_index(&user_means)?;

    Ok(MetricsReport {
        makespan,
        avg_wait,
        avg_turnaround,
        throughput,
        node_utilization,
        memory_utilization,
        jain_job,
        jain_user,
        num_jobs: jobs.len(),
    })
}

/// Fieldwise ratio `report / baseline` with the degenerate rules
/// `0/0 -> 1.0` and `x/0 (x > 0) -> undefined`.
pub fn normalize(report: &MetricsReport, baseline: &MetricsReport) -> Result<NormalizedReport> {
    if report.num_jobs != 0 && baseline.num_jobs != 0 && report.num_jobs != baseline.num_jobs {
        return Err(Error::InvalidInput(format!(
            "normalize over mismatched workloads: {} vs {} jobs",
            report.num_jobs, baseline.num_jobs
        )));
    }
    let mut undefined = Vec::new();
    let mut ratio = |field: MetricField| -> f64 {
        let value = report.get(field);
        let base = baseline.get(field);
        if base == 0.0 {
            if value == 0.0 {
                1.0
            } else {
                undefined.push(field);
                f64::INFINITY
            }
        } else {
            value / base
        }
    };
    Ok(NormalizedReport {
        makespan: ratio(MetricField::Makespan),
        avg_wait: ratio(MetricField::AvgWait),
        avg_turnaround: ratio(MetricField::AvgTurnaround),
        throughput: ratio(MetricField::Throughput),
        node_utilization: ratio(MetricField::NodeUtilization),
        memory_utilization: ratio(MetricField::MemoryUtilization),
        jain_job: ratio(MetricField::JainJob),
        jain_user: ratio(MetricField::JainUser),
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn job(id: u32, user: &str, nodes: u32, memory_gb: u32, walltime: u64) -> JobSpec {
        JobSpec {
            job_id: id,
            user_id: user.into(),
            submit_time: 0,
            walltime,
            nodes,
            memory_gb,
        }
    }

    fn schedule(pairs: &[(u32, u64)]) -> Schedule {
        Schedule(pairs.iter().copied().collect())
    }

    fn cfg() -> ClusterConfig {
        ClusterConfig::default()
    }

    #[test]
    fn saturating_single_job() {
        let jobs = vec![job(1, "user_1", 256, 2048, 100)];
        let report = compute_metrics(&jobs, &schedule(&[(1, 0)]), &cfg()).unwrap();
        assert_eq!(report.makespan, 100.0);
        assert_eq!(report.avg_wait, 0.0);
        assert_eq!(report.avg_turnaround, 100.0);
        assert_eq!(report.throughput, 0.01);
        assert_eq!(report.node_utilization, 1.0);
        assert_eq!(report.memory_utilization, 1.0);
        assert_eq!(report.jain_job, 1.0);
        assert_eq!(report.jain_user, 1.0);
    }

    #[test]
    fn two_serialized_half_jobs() {
        let jobs = vec![
            job(1, "user_1", 128, 1024, 10),
            job(2, "user_2", 128, 1024, 10),
        ];
        let report = compute_metrics(&jobs, &schedule(&[(1, 0), (2, 10)]), &cfg()).unwrap();
        assert_eq!(report.makespan, 20.0);
        assert_eq!(report.avg_wait, 5.0);
        assert_eq!(report.avg_turnaround, 15.0);
        assert_eq!(report.throughput, 0.1);
        assert_eq!(report.node_utilization, 0.5);
        assert_eq!(report.memory_utilization, 0.5);
        assert_eq!(report.jain_job, 0.5);
        assert_eq!(report.jain_user, 0.5);
    }

    #[test]
    fn equal_positive_waits_are_perfectly_fair() {
        let jobs = vec![
            job(1, "user_1", 1, 1, 10),
            job(2, "user_2", 1, 1, 10),
            job(3, "user_1", 1, 1, 10),
        ];
        let report = compute_metrics(&jobs, &schedule(&[(1, 7), (2, 7), (3, 7)]), &cfg()).unwrap();
        assert_eq!(report.jain_job, 1.0);
        assert_eq!(report.jain_user, 1.0);
    }

    #[test]
    fn jain_basics() {
        assert_eq!(jain_index(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 1.0);
        assert_eq!(jain_index(&[0.0, 10.0]).unwrap(), 0.5);
        assert_eq!(jain_index(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(jain_index(&[]).is_err());
        assert!(jain_index(&[-1.0]).is_err());
    }

    #[test]
    fn missing_start_is_an_input_error() {
        let jobs = vec![job(1, "user_1", 1, 1, 10)];
        let err = compute_metrics(&jobs, &Schedule(BTreeMap::new()), &cfg()).unwrap_err();
        assert!(err.to_string().contains("missing job 1"), "{err}");
    }

    #[test]
    fn self_normalization_is_exactly_one() {
        let jobs = vec![
            job(1, "user_1", 128, 1024, 10),
            job(2, "user_2", 128, 1024, 10),
        ];
        let report = compute_metrics(&jobs, &schedule(&[(1, 0), (2, 10)]), &cfg()).unwrap();
        let norm = normalize(&report, &report).unwrap();
        for field in MetricField::ALL {
            assert_eq!(norm.get(field), 1.0, "{}", field.as_str());
        }
        assert!(norm.undefined.is_empty());
    }

    #[test]
    fn ratio_and_degenerate_rules() {
        let jobs = vec![job(1, "user_1", 256, 2048, 100)];
        let base = compute_metrics(&jobs, &schedule(&[(1, 0)]), &cfg()).unwrap();
        // Same workload scheduled later: nonzero wait over a zero baseline.
        let later = compute_metrics(&jobs, &schedule(&[(1, 3)]), &cfg()).unwrap();
        let norm = normalize(&later, &base).unwrap();
        assert!(norm.is_undefined(MetricField::AvgWait));
        assert!(norm.avg_wait.is_infinite());
        // 0/0 on the baseline side stays defined.
        let self_norm = normalize(&base, &base).unwrap();
        assert_eq!(self_norm.avg_wait, 1.0);
        // Plain ratio.
        assert!((norm.makespan - 103.0 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_job_counts_are_rejected() {
        let one =
            compute_metrics(&[job(1, "user_1", 1, 1, 10)], &schedule(&[(1, 0)]), &cfg()).unwrap();
        let two = compute_metrics(
            &[job(1, "user_1", 1, 1, 10), job(2, "user_1", 1, 1, 10)],
            &schedule(&[(1, 0), (2, 0)]),
            &cfg(),
        )
        .unwrap();
        assert!(normalize(&one, &two).is_err());
    }

    #[test]
    fn metrics_json_has_exactly_the_eight_fields_in_order() {
        let jobs = vec![job(1, "user_1", 1, 1, 10)];
        let report = compute_metrics(&jobs, &schedule(&[(1, 0)]), &cfg()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let expected = [
            "makespan",
            "avg_wait",
            "avg_turnaround",
            "throughput",
            "node_utilization",
            "memory_utilization",
            "jain_job",
            "jain_user",
        ];
        let positions: Vec<usize> = expected
            .iter()
            .map(|k| {
                text.find(&format!("\"{k}\""))
                    .unwrap_or_else(|| panic!("missing key {k}"))
            })
            .collect();
        assert!(
            positions.windows(2).all(|w| w[0] < w[1]),
            "field order drifted: {text}"
        );
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            value.as_object().unwrap().len(),
            8,
            "exactly eight keys: {text}"
        );
    }
}
