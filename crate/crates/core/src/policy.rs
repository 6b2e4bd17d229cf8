//! Baseline schedulers: FCFS, SJF, and an exact small-instance makespan
//! minimizer built on a serial schedule-generation scheme.
//!
//! FCFS is strict head-of-line (no backfilling), so convoy effects are
//! expressible. SJF is work-conserving: at every event time it greedily
//! starts every fitting job in (walltime, job_id) order. Ties everywhere
//! break by ascending job_id.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Schedule;
use crate::workload::{ClusterConfig, JobSpec};

/// Scheduling policy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Fcfs,
    Sjf,
    ExactMakespan,
    ReActAgent,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Fcfs => "fcfs",
            PolicyKind::Sjf => "sjf",
            PolicyKind::ExactMakespan => "exact",
            PolicyKind::ReActAgent => "react",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fcfs" => Ok(PolicyKind::Fcfs),
            "sjf" => Ok(PolicyKind::Sjf),
            "exact" => Ok(PolicyKind::ExactMakespan),
            "react" => Ok(PolicyKind::ReActAgent),
            other => Err(Error::InvalidInput(format!("unknown policy '{other}'"))),
        }
    }
}

fn check_each_job_fits(jobs: &[JobSpec], config: &ClusterConfig) -> Result<()> {
    if jobs.is_empty() {
        return Err(Error::InvalidInput("job list is empty".into()));
    }
    for job in jobs {
        if job.nodes > config.total_nodes || job.memory_gb > config.total_memory_gb {
            return Err(Error::InvalidInput(format!(
                "job {} does not fit the cluster",
                job.job_id
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    start: u64,
    end: u64,
    nodes: u32,
    memory_gb: u32,
}

/// Usage at time point `t` over a set of placed intervals.
fn usage_at(placed: &[Interval], t: u64) -> (u64, u64) {
    let mut nodes = 0u64;
    let mut memory = 0u64;
    for iv in placed {
        if iv.start <= t && t < iv.end {
            nodes += iv.nodes as u64;
            memory += iv.memory_gb as u64;
        }
    }
    (nodes, memory)
}

/// Does `job` fit during `[t, t + walltime)` alongside `placed`?
fn fits_during(placed: &[Interval], job: &JobSpec, t: u64, config: &ClusterConfig) -> bool {
    let end = t + job.walltime;
    // Usage is piecewise constant; it can only rise at interval starts, so
    // checking t itself plus every placed start inside (t, end) suffices.
    let mut points = vec![t];
    for iv in placed {
        if iv.start > t && iv.start < end {
            points.push(iv.start);
        }
    }
    points.into_iter().all(|p| {
        let (n, m) = usage_at(placed, p);
        n + job.nodes as u64 <= config.total_nodes as u64
            && m + job.memory_gb as u64 <= config.total_memory_gb as u64
    })
}

/// Earliest `t >= lower` at which `job` fits the residual profile.
fn earliest_fit(placed: &[Interval], job: &JobSpec, lower: u64, config: &ClusterConfig) -> u64 {
    let mut candidates = vec![lower];
    for iv in placed {
        if iv.end > lower {
            candidates.push(iv.end);
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    for t in candidates {
        if fits_during(placed, job, t, config) {
            return t;
        }
    }
    unreachable!("a job that fits an empty cluster always fits after the last completion")
}

/// First come, first served with a strict head-of-line queue: the head
/// starts at the earliest time it fits, and no job behind a blocked head
/// may overtake it.
pub fn fcfs_schedule(jobs: &[JobSpec], config: &ClusterConfig) -> Result<Schedule> {
    check_each_job_fits(jobs, config)?;
    let mut queue: Vec<&JobSpec> = jobs.iter().collect();
    queue.sort_by_key(|j| j.job_id);

    let mut starts = BTreeMap::new();
    let mut running: Vec<Interval> = Vec::new();
    let mut free_nodes = config.total_nodes as u64;
    let mut free_mem = config.total_memory_gb as u64;
    let mut now = 0u64;
    let mut head = 0usize;
    while head < queue.len() {
        while head < queue.len() {
            let job = queue[head];
            if job.nodes as u64 <= free_nodes && job.memory_gb as u64 <= free_mem {
                starts.insert(job.job_id, now);
                running.push(Interval {
                    start: now,
                    end: now + job.walltime,
                    nodes: job.nodes,
                    memory_gb: job.memory_gb,
                });
                free_nodes -= job.nodes as u64;
                free_mem -= job.memory_gb as u64;
                head += 1;
            } else {
                break;
            }
        }
        if head < queue.len() {
            now = running
                .iter()
                .map(|iv| iv.end)
                .min()
                .expect("head blocked with nothing running");
            running.retain(|iv| {
                if iv.end == now {
                    free_nodes += iv.nodes as u64;
                    free_mem += iv.memory_gb as u64;
                    false
                } else {
                    true
                }
            });
        }
    }
    Ok(Schedule(starts))
}

/// Shortest job first, work-conserving: at every event time, start every
/// waiting job that fits, visiting jobs in (walltime, job_id) order.
pub fn sjf_schedule(jobs: &[JobSpec], config: &ClusterConfig) -> Result<Schedule> {
    check_each_job_fits(jobs, config)?;
    let mut waiting: Vec<&JobSpec> = jobs.iter().collect();
    waiting.sort_by_key(|j| (j.walltime, j.job_id));

    let mut starts = BTreeMap::new();
    let mut running: Vec<Interval> = Vec::new();
    let mut free_nodes = config.total_nodes as u64;
    let mut free_mem = config.total_memory_gb as u64;
    let mut now = 0u64;
    while !waiting.is_empty() {
        waiting.retain(|job| {
            if job.nodes as u64 <= free_nodes && job.memory_gb as u64 <= free_mem {
                starts.insert(job.job_id, now);
                running.push(Interval {
                    start: now,
                    end: now + job.walltime,
                    nodes: job.nodes,
                    memory_gb: job.memory_gb,
                });
                free_nodes -= job.nodes as u64;
                free_mem -= job.memory_gb as u64;
                false
            } else {
                true
            }
        });
        if waiting.is_empty() {
            break;
        }
        now = running
            .iter()
            .map(|iv| iv.end)
            .min()
            .expect("jobs waiting with nothing running");
        running.retain(|iv| {
            if iv.end == now {
                free_nodes += iv.nodes as u64;
                free_mem += iv.memory_gb as u64;
                false
            } else {
                true
            }
        });
    }
    Ok(Schedule(starts))
}

/// Serial schedule-generation scheme: jobs are placed in permutation order,
/// each at the earliest feasible time no earlier than its predecessor's
/// start, so the permutation is also the start-time order.
pub fn serial_sgs(
    permutation: &[u32],
    jobs: &[JobSpec],
    config: &ClusterConfig,
) -> Result<Schedule> {
    check_each_job_fits(jobs, config)?;
    let by_id: BTreeMap<u32, &JobSpec> = jobs.iter().map(|j| (j.job_id, j)).collect();
    if permutation.len() != jobs.len() {
        return Err(Error::InvalidInput(format!(
            "permutation has {} entries for {} jobs",
            permutation.len(),
            jobs.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &id in permutation {
        if !by_id.contains_key(&id) {
            return Err(Error::InvalidInput(format!(
                "permutation names unknown job {id}"
            )));
        }
        if !seen.insert(id) {
            return Err(Error::InvalidInput(format!("permutation repeats job {id}")));
        }
    }

    let mut placed: Vec<Interval> = Vec::with_capacity(jobs.len());
    let mut starts = BTreeMap::new();
    let mut lower = 0u64;
    for &id in permutation {
        let job = by_id[&id];
        let t = earliest_fit(&placed, job, lower, config);
        placed.push(Interval {
            start: t,
            end: t + job.walltime,
            nodes: job.nodes,
            memory_gb: job.memory_gb,
        });
        starts.insert(id, t);
        lower = t;
    }
    Ok(Schedule(starts))
}

/// Pluggable makespan-minimization backend.
///
/// The adapter slot for wiring an external optimization solver into the
/// harness without touching the policy surface: implement this trait and
/// hand the result to the same audit and metrics pipeline. The in-repo
/// branch and bound is the default implementation.
pub trait MakespanSolver {
    fn name(&self) -> &'static str;
    fn solve(&self, jobs: &[JobSpec], config: &ClusterConfig) -> Result<Schedule>;
}

/// The built-in small-instance exact solver as a [`MakespanSolver`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BranchAndBoundSolver {
    pub limits: ExactLimits,
}

impl MakespanSolver for BranchAndBoundSolver {
    fn name(&self) -> &'static str {
        "branch-and-bound"
    }

    fn solve(&self, jobs: &[JobSpec], config: &ClusterConfig) -> Result<Schedule> {
        exact_min_makespan(jobs, config, &self.limits)
    }
}

/// Limits for the exact solver.
#[derive(Debug, Clone, Copy)]
pub struct ExactLimits {
    pub max_jobs: usize,
    pub time_budget: Option<Duration>,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_jobs: 10,
            time_budget: None,
        }
    }
}

struct ExactSearch<'a> {
    jobs: Vec<&'a JobSpec>,
    config: &'a ClusterConfig,
    lower_bound: u64,
    best_makespan: u64,
    best_starts: BTreeMap<u32, u64>,
    deadline: Option<Instant>,
    placed: Vec<Interval>,
    current_starts: Vec<(u32, u64)>,
    used: Vec<bool>,
}

impl<'a> ExactSearch<'a> {
    /// Lower bound on any completion of the current prefix. Every
    /// remaining job starts no earlier than `lower` (start times are
    /// non-decreasing along the permutation), so both its duration and
    /// the residual area after `lower` bound the final makespan.
    fn node_bound(&self, lower: u64, partial_makespan: u64) -> u64 {
        let mut bound = partial_makespan.max(self.lower_bound);
        let mut max_remaining_d = 0u64;
        let mut rem_node_area = 0u64;
        let mut rem_mem_area = 0u64;
        let mut serial_by_nodes = 0u64;
        let mut serial_by_mem = 0u64;
        for (i, job) in self.jobs.iter().enumerate() {
            if !self.used[i] {
                max_remaining_d = max_remaining_d.max(job.walltime);
                rem_node_area += job.nodes as u64 * job.walltime;
                rem_mem_area += job.memory_gb as u64 * job.walltime;
                // Jobs demanding over half a resource are pairwise
                // exclusive, so their durations stack.
                if job.nodes as u64 * 2 > self.config.total_nodes as u64 {
                    serial_by_nodes += job.walltime;
                }
                if job.memory_gb as u64 * 2 > self.config.total_memory_gb as u64 {
                    serial_by_mem += job.walltime;
                }
            }
        }
        if max_remaining_d == 0 {
            return bound;
        }
        bound = bound.max(lower + max_remaining_d);
        bound = bound.max(lower + serial_by_nodes.max(serial_by_mem));
        let mut node_tail = 0u64;
        let mut mem_tail = 0u64;
        for iv in &self.placed {
            let tail = iv.end.saturating_sub(lower);
            node_tail += iv.nodes as u64 * tail;
            mem_tail += iv.memory_gb as u64 * tail;
        }
        bound =
            bound.max(lower + (rem_node_area + node_tail).div_ceil(self.config.total_nodes as u64));
        bound.max(lower + (rem_mem_area + mem_tail).div_ceil(self.config.total_memory_gb as u64))
    }

    fn dfs(&mut self, depth: usize, lower: u64, partial_makespan: u64) -> Result<()> {
        if let Some(deadline) = self.deadline {
            if Instant::now() > deadline {
                return Err(Error::TimeBudgetExceeded);
            }
        }
        if depth == self.jobs.len() {
            if partial_makespan < self.best_makespan {
                self.best_makespan = partial_makespan;
                self.best_starts = self.current_starts.iter().copied().collect();
            }
            return Ok(());
        }
        if self.node_bound(lower, partial_makespan) >= self.best_makespan {
            return Ok(());
        }
        for i in 0..self.jobs.len() {
            if self.used[i] {
                continue;
            }
            let job = self.jobs[i];
            // Identical jobs are interchangeable: force ascending job_id
            // among them to prune symmetric permutations.
            let has_identical_unplaced_predecessor =
                self.jobs.iter().enumerate().any(|(k, other)| {
                    k < i
                        && !self.used[k]
                        && other.nodes == job.nodes
                        && other.memory_gb == job.memory_gb
                        && other.walltime == job.walltime
                });
            if has_identical_unplaced_predecessor {
                continue;
            }
            let t = earliest_fit(&self.placed, job, lower, self.config);
            let makespan = partial_makespan.max(t + job.walltime);
            if makespan >= self.best_makespan {
                continue;
            }
            self.used[i] = true;
            self.placed.push(Interval {
                start: t,
                end: t + job.walltime,
                nodes: job.nodes,
                memory_gb: job.memory_gb,
            });
            self.current_starts.push((job.job_id, t));
            self.dfs(depth + 1, t, makespan)?;
            self.current_starts.pop();
            self.placed.pop();
            self.used[i] = false;
            if self.best_makespan == self.lower_bound {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// Minimum-makespan schedule over all serial-SGS permutations, found by
/// branch and bound. Deterministic: among optimal permutations the
/// lexicographically smallest (by job_id sequence) wins.
///
/// Refuses instances larger than `limits.max_jobs` rather than silently
/// falling back to a heuristic.
pub fn exact_min_makespan(
    jobs: &[JobSpec],
    config: &ClusterConfig,
    limits: &ExactLimits,
) -> Result<Schedule> {
    check_each_job_fits(jobs, config)?;
    if jobs.len() > limits.max_jobs {
        return Err(Error::TooManyJobs {
            got: jobs.len(),
            max: limits.max_jobs,
        });
    }
    let mut sorted: Vec<&JobSpec> = jobs.iter().collect();
    sorted.sort_by_key(|j| j.job_id);

    let node_area: u64 = sorted.iter().map(|j| j.nodes as u64 * j.walltime).sum();
    let mem_area: u64 = sorted.iter().map(|j| j.memory_gb as u64 * j.walltime).sum();
    let lower_bound = sorted
        .iter()
        .map(|j| j.walltime)
        .max()
        .unwrap_or(0)
        .max(node_area.div_ceil(config.total_nodes as u64))
        .max(mem_area.div_ceil(config.total_memory_gb as u64));

    // Seed the incumbent bound from cheap heuristic orders. The bound is
    // exclusive (min + 1), so the search still records the first
    // permutation at the optimum it reaches in lexicographic order; only
    // provably worse subtrees are cut.
    let mut seed_value = u64::MAX;
    for ordering in [
        |a: &&JobSpec, b: &&JobSpec| a.job_id.cmp(&b.job_id),
        |a: &&JobSpec, b: &&JobSpec| (a.walltime, a.job_id).cmp(&(b.walltime, b.job_id)),
        |a: &&JobSpec, b: &&JobSpec| (b.walltime, a.job_id).cmp(&(a.walltime, b.job_id)),
        |a: &&JobSpec, b: &&JobSpec| (b.nodes, a.job_id).cmp(&(a.nodes, b.job_id)),
        |a: &&JobSpec, b: &&JobSpec| {
            (b.nodes as u64 * b.walltime, a.job_id).cmp(&(a.nodes as u64 * a.walltime, b.job_id))
        },
    ] {
        let mut order = sorted.clone();
        order.sort_by(ordering);
        let perm: Vec<u32> = order.iter().map(|j| j.job_id).collect();
        let makespan = serial_sgs(&perm, jobs, config)?
            .makespan(jobs)
            .unwrap_or(u64::MAX);
        seed_value = seed_value.min(makespan);
    }

    let n = sorted.len();
    let mut search = ExactSearch {
        jobs: sorted,
        config,
        lower_bound,
        best_makespan: seed_value.saturating_add(1),
        best_starts: BTreeMap::new(),
        deadline: limits.time_budget.map(|d| Instant::now() + d),
        placed: Vec::with_capacity(n),
        current_starts: Vec::with_capacity(n),
        used: vec![false; n],
    };
    search.dfs(0, 0, 0)?;
    if search.best_starts.is_empty() {
        return Err(Error::InvalidInput(
            "exact search found no schedule (internal bug)".into(),
        ));
    }
    Ok(Schedule(search.best_starts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::audit_schedule;
    use crate::workload::{generate_workload, ScenarioKind, ScenarioSpec};

    fn job(id: u32, nodes: u32, memory_gb: u32, walltime: u64) -> JobSpec {
        JobSpec {
            job_id: id,
            user_id: format!("user_{}", 1 + id % 2),
            submit_time: 0,
            walltime,
            nodes,
            memory_gb,
        }
    }

    fn cfg() -> ClusterConfig {
        ClusterConfig::default()
    }

    fn starts(schedule: &Schedule, ids: &[u32]) -> Vec<u64> {
        ids.iter()
            .map(|&id| schedule.start_of(id).unwrap())
            .collect()
    }

    #[test]
    fn fcfs_serializes_capacity_bound_jobs() {
        let jobs = vec![job(1, 256, 4, 10), job(2, 256, 4, 10)];
        let schedule = fcfs_schedule(&jobs, &cfg()).unwrap();
        assert_eq!(starts(&schedule, &[1, 2]), vec![0, 10]);
        assert_eq!(schedule.makespan(&jobs), Some(20));
    }

    #[test]
    fn fcfs_starts_jobs_together_when_they_fit() {
        let jobs = vec![job(1, 128, 4, 100), job(2, 128, 4, 50)];
        let schedule = fcfs_schedule(&jobs, &cfg()).unwrap();
        assert_eq!(starts(&schedule, &[1, 2]), vec![0, 0]);
    }

    #[test]
    fn fcfs_blocked_head_holds_the_queue() {
        let jobs = vec![job(1, 200, 4, 10), job(2, 100, 4, 10), job(3, 50, 4, 10)];
        let schedule = fcfs_schedule(&jobs, &cfg()).unwrap();
        assert_eq!(starts(&schedule, &[1, 2, 3]), vec![0, 10, 10]);
        assert_eq!(schedule.makespan(&jobs), Some(20));
    }

    #[test]
    fn sjf_prefers_the_short_job() {
        let jobs = vec![job(1, 256, 4, 100), job(2, 256, 4, 5)];
        let sjf = sjf_schedule(&jobs, &cfg()).unwrap();
        assert_eq!(sjf.start_of(2), Some(0));
        assert_eq!(sjf.start_of(1), Some(5));
        let sjf_wait = (sjf.start_of(1).unwrap() + sjf.start_of(2).unwrap()) as f64 / 2.0;
        assert_eq!(sjf_wait, 2.5);
        let fcfs = fcfs_schedule(&jobs, &cfg()).unwrap();
        let fcfs_wait = (fcfs.start_of(1).unwrap() + fcfs.start_of(2).unwrap()) as f64 / 2.0;
        assert_eq!(fcfs_wait, 50.0);
    }

    #[test]
    fn sjf_ties_break_by_job_id_matching_fcfs() {
        let jobs = vec![job(1, 200, 4, 10), job(2, 200, 4, 10), job(3, 200, 4, 10)];
        let sjf = sjf_schedule(&jobs, &cfg()).unwrap();
        let fcfs = fcfs_schedule(&jobs, &cfg()).unwrap();
        assert_eq!(sjf, fcfs);
    }

    #[test]
    fn sjf_single_job_starts_at_zero() {
        let jobs = vec![job(1, 2, 4, 42)];
        assert_eq!(sjf_schedule(&jobs, &cfg()).unwrap().start_of(1), Some(0));
    }

    #[test]
    fn sgs_follows_the_permutation_order() {
        let jobs = vec![job(1, 256, 4, 10), job(2, 256, 4, 10)];
        let schedule = serial_sgs(&[2, 1], &jobs, &cfg()).unwrap();
        assert_eq!(schedule.start_of(2), Some(0));
        assert_eq!(schedule.start_of(1), Some(10));
    }

    #[test]
    fn sgs_respects_capacity_and_start_order() {
        let jobs = vec![job(1, 129, 4, 10), job(2, 128, 4, 10), job(3, 127, 4, 10)];
        let schedule = serial_sgs(&[1, 2, 3], &jobs, &cfg()).unwrap();
        assert_eq!(starts(&schedule, &[1, 2, 3]), vec![0, 10, 10]);
    }

    #[test]
    fn sgs_packs_jobs_that_all_fit() {
        let jobs = vec![job(1, 50, 4, 10), job(2, 60, 4, 20), job(3, 70, 4, 5)];
        for perm in [[1u32, 2, 3], [3, 1, 2], [2, 3, 1]] {
            let schedule = serial_sgs(&perm, &jobs, &cfg()).unwrap();
            assert_eq!(starts(&schedule, &[1, 2, 3]), vec![0, 0, 0], "{perm:?}");
        }
    }

    #[test]
    fn sgs_rejects_bad_permutations() {
        let jobs = vec![job(1, 2, 4, 10), job(2, 2, 4, 10)];
        assert!(serial_sgs(&[1], &jobs, &cfg()).is_err());
        assert!(serial_sgs(&[1, 1], &jobs, &cfg()).is_err());
        assert!(serial_sgs(&[1, 9], &jobs, &cfg()).is_err());
    }

    #[test]
    fn exact_on_forced_serialization() {
        let jobs = vec![job(1, 256, 4, 10), job(2, 256, 4, 10)];
        let schedule = exact_min_makespan(&jobs, &cfg(), &ExactLimits::default()).unwrap();
        assert_eq!(schedule.makespan(&jobs), Some(20));
    }

    #[test]
    fn exact_pairs_compatible_jobs() {
        let jobs = vec![job(1, 129, 4, 10), job(2, 128, 4, 10), job(3, 127, 4, 10)];
        let schedule = exact_min_makespan(&jobs, &cfg(), &ExactLimits::default()).unwrap();
        assert_eq!(schedule.makespan(&jobs), Some(20));
    }

    #[test]
    fn exact_beats_or_matches_the_heuristics() {
        let spec = ScenarioSpec::new(ScenarioKind::HeterogeneousMix, 5, 3);
        let jobs = generate_workload(&spec, &cfg()).unwrap();
        let exact = exact_min_makespan(&jobs, &cfg(), &ExactLimits::default()).unwrap();
        let fcfs = fcfs_schedule(&jobs, &cfg()).unwrap();
        let sjf = sjf_schedule(&jobs, &cfg()).unwrap();
        let exact_ms = exact.makespan(&jobs).unwrap();
        assert!(exact_ms <= fcfs.makespan(&jobs).unwrap());
        assert!(exact_ms <= sjf.makespan(&jobs).unwrap());
    }

    #[test]
    fn solver_adapter_matches_the_direct_call() {
        let jobs = vec![job(1, 129, 4, 10), job(2, 128, 4, 10), job(3, 127, 4, 10)];
        let solver = BranchAndBoundSolver::default();
        assert_eq!(solver.name(), "branch-and-bound");
        assert_eq!(
            solver.solve(&jobs, &cfg()).unwrap(),
            exact_min_makespan(&jobs, &cfg(), &ExactLimits::default()).unwrap()
        );
    }

    #[test]
    fn exact_refuses_oversized_instances() {
        let jobs: Vec<JobSpec> = (1..=11).map(|id| job(id, 1, 1, 10)).collect();
        let err = exact_min_makespan(&jobs, &cfg(), &ExactLimits::default()).unwrap_err();
        assert!(
            matches!(err, Error::TooManyJobs { got: 11, max: 10 }),
            "{err}"
        );
    }

    #[test]
    fn exact_matches_exhaustive_enumeration_on_small_instances() {
        use itertools::Itertools;
        for seed in [10u64, 11, 12] {
            let spec = ScenarioSpec::new(ScenarioKind::BurstyIdle, 5, seed);
            let jobs = generate_workload(&spec, &cfg()).unwrap();
            let ids: Vec<u32> = jobs.iter().map(|j| j.job_id).collect();
            let brute = ids
                .iter()
                .copied()
                .permutations(ids.len())
                .map(|perm| {
                    serial_sgs(&perm, &jobs, &cfg())
                        .unwrap()
                        .makespan(&jobs)
                        .unwrap()
                })
                .min()
                .unwrap();
            let exact = exact_min_makespan(&jobs, &cfg(), &ExactLimits::default()).unwrap();
            assert_eq!(exact.makespan(&jobs), Some(brute), "seed {seed}");
        }
    }

    #[test]
    fn all_policies_produce_audit_clean_schedules() {
        for kind in ScenarioKind::ALL {
            let spec = ScenarioSpec::new(kind, 30, 8);
            let jobs = generate_workload(&spec, &cfg()).unwrap();
            for schedule in [
                fcfs_schedule(&jobs, &cfg()).unwrap(),
                sjf_schedule(&jobs, &cfg()).unwrap(),
            ] {
                let violations = audit_schedule(&jobs, &schedule, &cfg()).unwrap();
                assert!(violations.is_empty(), "{kind}: {violations:?}");
            }
        }
    }

    #[test]
    fn fcfs_never_overtakes_a_blocked_head() {
        for kind in ScenarioKind::ALL {
            let spec = ScenarioSpec::new(kind, 25, 14);
            let jobs = generate_workload(&spec, &cfg()).unwrap();
            let schedule = fcfs_schedule(&jobs, &cfg()).unwrap();
            let mut prev = 0u64;
            for job in &jobs {
                let x = schedule.start_of(job.job_id).unwrap();
                assert!(
                    x >= prev,
                    "job {} started at {x} before its head {prev}",
                    job.job_id
                );
                prev = x;
            }
        }
    }

    #[test]
    fn policies_are_deterministic() {
        let spec = ScenarioSpec::new(ScenarioKind::HeterogeneousMix, 20, 99);
        let jobs = generate_workload(&spec, &cfg()).unwrap();
        assert_eq!(
            fcfs_schedule(&jobs, &cfg()).unwrap(),
            fcfs_schedule(&jobs, &cfg()).unwrap()
        );
        assert_eq!(
            sjf_schedule(&jobs, &cfg()).unwrap(),
            sjf_schedule(&jobs, &cfg()).unwrap()
        );
        let five = &jobs[..5];
        assert_eq!(
            exact_min_makespan(five, &cfg(), &ExactLimits::default()).unwrap(),
            exact_min_makespan(five, &cfg(), &ExactLimits::default()).unwrap()
        );
    }
}
