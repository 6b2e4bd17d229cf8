//! Discrete-event cluster simulator.
//!
//! Owns the simulation clock, validates agent actions against node and
//! memory capacity, executes feasible actions, and renders natural-language
//! feedback for violations. Feedback strings are templated and bit-stable so
//! they can be golden-tested and replayed into prompts verbatim.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::{ClusterConfig, JobSpec};

/// A scheduling decision proposed for the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    StartJob(u32),
    BackfillJob(u32),
    Delay,
    Stop,
}

impl Action {
    pub fn label(&self) -> &'static str {
        match self {
            Action::StartJob(_) => "StartJob",
            Action::BackfillJob(_) => "BackfillJob",
            Action::Delay => "Delay",
            Action::Stop => "Stop",
        }
    }

    /// Canonical text form, e.g. `StartJob(job_id=9)`.
    pub fn text(&self) -> String {
        match self {
            Action::StartJob(id) => format!("StartJob(job_id={id})"),
            Action::BackfillJob(id) => format!("BackfillJob(job_id={id})"),
            Action::Delay => "Delay".into(),
            Action::Stop => "Stop".into(),
        }
    }
}

/// Result of validating an action: either an execution summary or a
/// human-readable rejection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionOutcome {
    Accepted(String),
    Rejected(String),
}

impl ActionOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, ActionOutcome::Accepted(_))
    }
}

/// Structured reason behind a rejection; rendered by [`render_feedback`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InsufficientNodes {
        job_id: u32,
        required_nodes: u32,
        required_memory_gb: u32,
        available_nodes: u32,
        available_memory_gb: u32,
    },
    InsufficientMemory {
        job_id: u32,
        required_nodes: u32,
        required_memory_gb: u32,
        available_nodes: u32,
        available_memory_gb: u32,
    },
    UnknownJob {
        job_id: u32,
    },
    NotWaiting {
        job_id: u32,
    },
    NoRunningJobs,
    JobsStillWaiting {
        count: usize,
    },
    UnparseableResponse,
}

impl Violation {
    fn short_reason(&self) -> &'static str {
        match self {
            Violation::InsufficientNodes { .. } | Violation::InsufficientMemory { .. } => {
                "not enough resources"
            }
            Violation::UnknownJob { .. } => "unknown job",
            Violation::NotWaiting { .. } => "job not in waiting queue",
            Violation::NoRunningJobs => "no running jobs",
            Violation::JobsStillWaiting { .. } => "jobs still waiting",
            Violation::UnparseableResponse => "could not parse action",
        }
    }
}

/// Render the one-line feedback template, plus a detail sentence for
/// resource violations:
///
/// ```text
/// [t=1554] Action: StartJob failed (not enough resources)
/// Job 32 cannot be started — requires 256 Nodes, 8 GB; available: 238 Nodes, 576 GB.
/// ```
pub fn render_feedback(now: u64, action_label: &str, violation: &Violation) -> String {
    let mut out = format!(
        "[t={now}] Action: {action_label} failed ({})",
        violation.short_reason()
    );
    match violation {
        Violation::InsufficientNodes {
            job_id,
            required_nodes,
            required_memory_gb,
            available_nodes,
            available_memory_gb,
        }
        | Violation::InsufficientMemory {
            job_id,
            required_nodes,
            required_memory_gb,
            available_nodes,
            available_memory_gb,
        } => {
            out.push_str(&format!(
                "\nJob {job_id} cannot be started — requires {required_nodes} Nodes, \
                 {required_memory_gb} GB; available: {available_nodes} Nodes, \
                 {available_memory_gb} GB."
            ));
        }
        _ => {}
    }
    out
}

/// Mapping job_id -> start time, total once a run completes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule(pub BTreeMap<u32, u64>);

impl Schedule {
    pub fn start_of(&self, job_id: u32) -> Option<u64> {
        self.0.get(&job_id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn makespan(&self, jobs: &[JobSpec]) -> Option<u64> {
        jobs.iter()
            .map(|j| self.start_of(j.job_id).map(|x| x + j.walltime))
            .collect::<Option<Vec<_>>>()
            .map(|ends| ends.into_iter().max().unwrap_or(0))
    }
}

/// Which capacity a schedule violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Nodes,
    MemoryGb,
}

/// One capacity breach found by [`audit_schedule`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub t: u64,
    pub resource: ResourceKind,
    pub demand: u64,
    pub capacity: u64,
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={}: {:?} demand {} exceeds capacity {}",
            self.t, self.resource, self.demand, self.capacity
        )
    }
}

/// Post-hoc feasibility check: at every event boundary, the active set
/// (jobs with `x <= t < x + d`) must fit node and memory capacity.
pub fn audit_schedule(
    jobs: &[JobSpec],
    schedule: &Schedule,
    config: &ClusterConfig,
) -> Result<Vec<AuditViolation>> {
    let mut boundaries = Vec::with_capacity(jobs.len() * 2);
    for job in jobs {
        let start = schedule.start_of(job.job_id).ok_or_else(|| {
            Error::InvalidInput(format!("schedule is missing job {}", job.job_id))
        })?;
        boundaries.push(start);
        boundaries.push(start + job.walltime);
    }
    boundaries.sort_unstable();
    boundaries.dedup();

    let mut violations = Vec::new();
    for &t in &boundaries {
        let mut nodes = 0u64;
        let mut memory = 0u64;
        for job in jobs {
            let x = schedule.start_of(job.job_id).unwrap();
            if x <= t && t < x + job.walltime {
                nodes += job.nodes as u64;
                memory += job.memory_gb as u64;
            }
        }
        if nodes > config.total_nodes as u64 {
            violations.push(AuditViolation {
                t,
                resource: ResourceKind::Nodes,
                demand: nodes,
                capacity: config.total_nodes as u64,
            });
        }
        if memory > config.total_memory_gb as u64 {
            violations.push(AuditViolation {
                t,
                resource: ResourceKind::MemoryGb,
                demand: memory,
                capacity: config.total_memory_gb as u64,
            });
        }
    }
    Ok(violations)
}

/// Snapshot of the simulated cluster: clock, free counters, and the
/// waiting / running / completed partition of the workload.
#[derive(Debug, Clone)]
pub struct ClusterState {
    config: ClusterConfig,
    jobs: BTreeMap<u32, JobSpec>,
    now: u64,
    available_nodes: u32,
    available_memory_gb: u32,
    waiting: Vec<u32>,
    running: BTreeMap<u32, (u64, u64)>,
    completed: BTreeMap<u32, (u64, u64)>,
    stopped: bool,
}

impl ClusterState {
    /// Fresh state at t=0 with the whole workload waiting.
    pub fn new(config: ClusterConfig, jobs: &[JobSpec]) -> Result<Self> {
        if jobs.is_empty() {
            return Err(Error::InvalidInput("job list is empty".into()));
        }
        let mut map = BTreeMap::new();
        for job in jobs {
            if job.nodes > config.total_nodes || job.memory_gb > config.total_memory_gb {
                return Err(Error::InvalidInput(format!(
                    "job {} does not fit the cluster ({} nodes, {} GB)",
                    job.job_id, job.nodes, job.memory_gb
                )));
            }
            if map.insert(job.job_id, job.clone()).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate job_id {}",
                    job.job_id
                )));
            }
        }
        let waiting: Vec<u32> = map.keys().copied().collect();
        Ok(Self {
            available_nodes: config.total_nodes,
            available_memory_gb: config.total_memory_gb,
            config,
            jobs: map,
            now: 0,
            waiting,
            running: BTreeMap::new(),
            completed: BTreeMap::new(),
            stopped: false,
        })
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn available_nodes(&self) -> u32 {
        self.available_nodes
    }

    pub fn available_memory_gb(&self) -> u32 {
        self.available_memory_gb
    }

    pub fn waiting(&self) -> &[u32] {
        &self.waiting
    }

    /// Running jobs as (job_id, start, end), ascending job_id.
    pub fn running(&self) -> impl Iterator<Item = (u32, u64, u64)> + '_ {
        self.running.iter().map(|(&id, &(s, e))| (id, s, e))
    }

    /// Completed jobs as (job_id, start, end), ascending job_id.
    pub fn completed(&self) -> impl Iterator<Item = (u32, u64, u64)> + '_ {
        self.completed.iter().map(|(&id, &(s, e))| (id, s, e))
    }

    pub fn job(&self, job_id: u32) -> Option<&JobSpec> {
        self.jobs.get(&job_id)
    }

    /// True after an accepted Stop has drained the run.
    pub fn is_terminal(&self) -> bool {
        self.stopped
    }

    /// Start times realized so far (running and completed jobs).
    pub fn realized_schedule(&self) -> Schedule {
        let mut map = BTreeMap::new();
        for (&id, &(start, _)) in self.running.iter().chain(self.completed.iter()) {
            map.insert(id, start);
        }
        Schedule(map)
    }

    fn check_start(&self, job_id: u32) -> std::result::Result<(), Violation> {
        let Some(job) = self.jobs.get(&job_id) else {
            return Err(Violation::UnknownJob { job_id });
        };
        if !self.waiting.contains(&job_id) {
            return Err(Violation::NotWaiting { job_id });
        }
        if job.nodes > self.available_nodes {
            return Err(Violation::InsufficientNodes {
                job_id,
                required_nodes: job.nodes,
                required_memory_gb: job.memory_gb,
                available_nodes: self.available_nodes,
                available_memory_gb: self.available_memory_gb,
            });
        }
        if job.memory_gb > self.available_memory_gb {
            return Err(Violation::InsufficientMemory {
                job_id,
                required_nodes: job.nodes,
                required_memory_gb: job.memory_gb,
                available_nodes: self.available_nodes,
                available_memory_gb: self.available_memory_gb,
            });
        }
        Ok(())
    }

    fn check(&self, action: &Action) -> std::result::Result<String, Violation> {
        match action {
            Action::StartJob(id) => {
                self.check_start(*id)?;
                Ok(format!("job {id} can start at t={}", self.now))
            }
            Action::BackfillJob(id) => {
                self.check_start(*id)?;
                Ok(format!("job {id} can backfill at t={}", self.now))
            }
            Action::Delay => {
                if self.running.is_empty() {
                    Err(Violation::NoRunningJobs)
                } else {
                    Ok("can advance to the next completion".into())
                }
            }
            Action::Stop => {
                if self.waiting.is_empty() {
                    Ok("all jobs scheduled; run will drain".into())
                } else {
                    Err(Violation::JobsStillWaiting {
                        count: self.waiting.len(),
                    })
                }
            }
        }
    }

    /// Check an action against the current state without mutating it.
    pub fn validate(&self, action: &Action) -> ActionOutcome {
        match self.check(action) {
            Ok(desc) => ActionOutcome::Accepted(desc),
            Err(violation) => {
                ActionOutcome::Rejected(render_feedback(self.now, action.label(), &violation))
            }
        }
    }

    /// Execute a previously validated action. Calling this with an action
    /// that `validate` rejects is a caller bug and returns
    /// [`Error::ContractViolation`].
    pub fn apply(&mut self, action: &Action) -> Result<()> {
        if let Err(violation) = self.check(action) {
            return Err(Error::ContractViolation(format!(
                "apply of non-accepted action {}: {}",
                action.text(),
                violation.short_reason()
            )));
        }
        match action {
            Action::StartJob(id) | Action::BackfillJob(id) => {
                let job = self.jobs[id].clone();
                self.waiting.retain(|&w| w != *id);
                self.available_nodes -= job.nodes;
                self.available_memory_gb -= job.memory_gb;
                self.running
                    .insert(*id, (self.now, self.now + job.walltime));
            }
            Action::Delay => {
                self.advance_to_next_event()?;
            }
            Action::Stop => {
                while !self.running.is_empty() {
                    self.advance_to_next_event()?;
                }
                self.stopped = true;
            }
        }
        Ok(())
    }

    /// Advance the clock to the earliest running-job completion.
    ///
    /// Every job ending at the new clock value completes and releases its
    /// resources before the next decision; returns the new clock.
    pub fn advance_to_next_event(&mut self) -> Result<u64> {
        let next = self
            .running
            .values()
            .map(|&(_, end)| end)
            .min()
            .ok_or_else(|| Error::InvalidInput("no running jobs to advance past".into()))?;
        self.now = next;
        let done: Vec<u32> = self
            .running
            .iter()
            .filter(|(_, &(_, end))| end == next)
            .map(|(&id, _)| id)
            .collect();
        for id in done {
            let (start, end) = self.running.remove(&id).unwrap();
            let job = &self.jobs[&id];
            self.available_nodes += job.nodes;
            self.available_memory_gb += job.memory_gb;
            self.completed.insert(id, (start, end));
        }
        Ok(next)
    }

    /// Advisory check for an accepted BackfillJob: is any job queued ahead
    /// of `job_id` currently infeasible? If not, the backfill is
    /// indistinguishable from a plain start.
    pub fn backfill_has_blocked_predecessor(&self, job_id: u32) -> bool {
        for &waiting_id in &self.waiting {
            if waiting_id == job_id {
                break;
            }
            let job = &self.jobs[&waiting_id];
            if job.nodes > self.available_nodes || job.memory_gb > self.available_memory_gb {
                return true;
            }
        }
        false
    }

    /// Structural consistency check used by property tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let used_nodes: u32 = self.running.keys().map(|id| self.jobs[id].nodes).sum();
        let used_mem: u32 = self.running.keys().map(|id| self.jobs[id].memory_gb).sum();
        if self.available_nodes + used_nodes != self.config.total_nodes {
            return Err(format!(
                "node conservation broken: {} free + {} used != {}",
                self.available_nodes, used_nodes, self.config.total_nodes
            ));
        }
        if self.available_memory_gb + used_mem != self.config.total_memory_gb {
            return Err(format!(
                "memory conservation broken: {} free + {} used != {}",
                self.available_memory_gb, used_mem, self.config.total_memory_gb
            ));
        }
        let total = self.waiting.len() + self.running.len() + self.completed.len();
        if total != self.jobs.len() {
            return Err(format!(
                "partition broken: {} waiting + {} running + {} completed != {} jobs",
                self.waiting.len(),
                self.running.len(),
                self.completed.len(),
                self.jobs.len()
            ));
        }
        for (&id, &(start, end)) in &self.running {
            if !(start <= self.now && self.now < end) {
                return Err(format!(
                    "running job {id} interval [{start}, {end}) does not contain now={}",
                    self.now
                ));
            }
        }
        Ok(())
    }
}

/// One line of the decision trace file (line-delimited JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u32,
    pub t: u64,
    pub prompt_hash: String,
    pub thought: String,
    pub action_text: String,
    pub outcome: String,
    pub feedback: Option<String>,
}

/// Write trace records as line-delimited JSON.
pub fn write_trace(records: &[TraceRecord], path: &std::path::Path) -> Result<()> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{generate_workload, ScenarioKind, ScenarioSpec};

    fn job(id: u32, nodes: u32, memory_gb: u32, walltime: u64) -> JobSpec {
        JobSpec {
            job_id: id,
            user_id: format!("user_{}", 1 + id % 3),
            submit_time: 0,
            walltime,
            nodes,
            memory_gb,
        }
    }

    fn cfg() -> ClusterConfig {
        ClusterConfig::default()
    }

    #[test]
    fn new_state_has_full_capacity_and_everything_waiting() {
        let spec = ScenarioSpec::new(ScenarioKind::HomogeneousShort, 10, 1);
        let jobs = generate_workload(&spec, &cfg()).unwrap();
        let state = ClusterState::new(cfg(), &jobs).unwrap();
        assert_eq!(state.now(), 0);
        assert_eq!(state.available_nodes(), 256);
        assert_eq!(state.available_memory_gb(), 2048);
        assert_eq!(state.waiting().len(), 10);
        assert_eq!(state.running().count(), 0);
        assert_eq!(state.completed().count(), 0);
    }

    #[test]
    fn single_job_waits_alone() {
        let state = ClusterState::new(cfg(), &[job(1, 2, 4, 10)]).unwrap();
        assert_eq!(state.waiting(), &[1]);
    }

    #[test]
    fn empty_job_list_is_an_input_error() {
        assert!(ClusterState::new(cfg(), &[]).is_err());
    }

    #[test]
    fn start_accepted_on_empty_cluster() {
        let state = ClusterState::new(cfg(), &[job(1, 2, 4, 10)]).unwrap();
        assert!(state.validate(&Action::StartJob(1)).is_accepted());
    }

    #[test]
    fn resource_rejection_renders_requires_available_detail() {
        // Occupy 18 nodes and 1472 GB so that 238 nodes / 576 GB remain.
        let jobs = vec![job(1, 18, 1472, 10_000), job(32, 256, 8, 147)];
        let mut state = ClusterState::new(cfg(), &jobs).unwrap();
        state.apply(&Action::StartJob(1)).unwrap();
        let outcome = state.validate(&Action::StartJob(32));
        match outcome {
            ActionOutcome::Rejected(feedback) => {
                assert!(
                    feedback.contains("StartJob failed (not enough resources)"),
                    "{feedback}"
                );
                assert!(
                    feedback.contains("requires 256 Nodes, 8 GB; available: 238 Nodes, 576 GB"),
                    "{feedback}"
                );
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn feedback_templates_are_bit_stable() {
        let violation = Violation::InsufficientNodes {
            job_id: 32,
            required_nodes: 256,
            required_memory_gb: 8,
            available_nodes: 238,
            available_memory_gb: 576,
        };
        assert_eq!(
            render_feedback(1554, "StartJob", &violation),
            "[t=1554] Action: StartJob failed (not enough resources)\n\
             Job 32 cannot be started — requires 256 Nodes, 8 GB; available: 238 Nodes, 576 GB."
        );
        assert_eq!(
            render_feedback(0, "Stop", &Violation::JobsStillWaiting { count: 3 }),
            "[t=0] Action: Stop failed (jobs still waiting)"
        );
        assert_eq!(
            render_feedback(0, "<none>", &Violation::UnparseableResponse),
            "[t=0] Action: <none> failed (could not parse action)"
        );
    }

    #[test]
    fn stop_rejected_while_jobs_wait() {
        let state = ClusterState::new(cfg(), &[job(1, 2, 4, 10)]).unwrap();
        let outcome = state.validate(&Action::Stop);
        match outcome {
            ActionOutcome::Rejected(feedback) => {
                assert!(feedback.contains("jobs still waiting"), "{feedback}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_job_is_rejected_not_a_crash() {
        let state = ClusterState::new(cfg(), &[job(1, 2, 4, 10)]).unwrap();
        match state.validate(&Action::StartJob(99)) {
            ActionOutcome::Rejected(feedback) => {
                assert!(feedback.contains("unknown job"), "{feedback}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn delay_rejected_when_nothing_runs() {
        let state = ClusterState::new(cfg(), &[job(1, 2, 4, 10)]).unwrap();
        match state.validate(&Action::Delay) {
            ActionOutcome::Rejected(feedback) => {
                assert!(feedback.contains("no running jobs"), "{feedback}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn already_started_job_is_rejected() {
        let mut state = ClusterState::new(cfg(), &[job(1, 2, 4, 10), job(2, 2, 4, 10)]).unwrap();
        state.apply(&Action::StartJob(1)).unwrap();
        match state.validate(&Action::StartJob(1)) {
            ActionOutcome::Rejected(feedback) => {
                assert!(feedback.contains("not in waiting queue"), "{feedback}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn start_decrements_resources_and_queues_the_end_event() {
        let mut state = ClusterState::new(cfg(), &[job(9, 256, 2, 2)]).unwrap();
        state.apply(&Action::StartJob(9)).unwrap();
        assert_eq!(state.available_nodes(), 0);
        assert_eq!(state.available_memory_gb(), 2046);
        let running: Vec<_> = state.running().collect();
        assert_eq!(running, vec![(9, 0, 2)]);
    }

    #[test]
    fn delay_advances_to_earliest_completion_and_releases() {
        let jobs = vec![job(1, 10, 16, 12), job(2, 20, 32, 30)];
        let mut state = ClusterState::new(cfg(), &jobs).unwrap();
        state.apply(&Action::StartJob(1)).unwrap();
        state.apply(&Action::StartJob(2)).unwrap();
        state.apply(&Action::Delay).unwrap();
        assert_eq!(state.now(), 12);
        assert_eq!(state.completed().collect::<Vec<_>>(), vec![(1, 0, 12)]);
        assert_eq!(state.available_nodes(), 256 - 20);
        assert_eq!(state.available_memory_gb(), 2048 - 32);
    }

    #[test]
    fn tied_completions_finish_together() {
        let jobs = vec![job(1, 1, 1, 12), job(2, 1, 1, 12), job(3, 1, 1, 30)];
        let mut state = ClusterState::new(cfg(), &jobs).unwrap();
        for id in 1..=3 {
            state.apply(&Action::StartJob(id)).unwrap();
        }
        let now = state.advance_to_next_event().unwrap();
        assert_eq!(now, 12);
        assert_eq!(state.completed().count(), 2);
        assert_eq!(state.running().count(), 1);
    }

    #[test]
    fn stop_drains_the_simulation() {
        let mut state = ClusterState::new(cfg(), &[job(1, 2, 4, 50)]).unwrap();
        state.apply(&Action::StartJob(1)).unwrap();
        state.apply(&Action::Stop).unwrap();
        assert_eq!(state.now(), 50);
        assert!(state.is_terminal());
        assert_eq!(state.completed().collect::<Vec<_>>(), vec![(1, 0, 50)]);
        assert_eq!(state.available_nodes(), 256);
    }

    #[test]
    fn apply_of_rejected_action_is_a_contract_violation() {
        let mut state = ClusterState::new(cfg(), &[job(1, 2, 4, 10)]).unwrap();
        let err = state.apply(&Action::Delay).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)), "{err}");
    }

    #[test]
    fn backfill_advisory_detects_blocked_predecessors() {
        let jobs = vec![job(1, 200, 64, 100), job(2, 100, 32, 10), job(3, 4, 8, 5)];
        let mut state = ClusterState::new(cfg(), &jobs).unwrap();
        // Empty cluster: nothing ahead of job 3 is blocked.
        assert!(!state.backfill_has_blocked_predecessor(3));
        state.apply(&Action::StartJob(1)).unwrap();
        // Job 2 (100 nodes) no longer fits, so backfilling job 3 skips it.
        assert!(state.backfill_has_blocked_predecessor(3));
    }

    #[test]
    fn audit_accepts_boundary_fit() {
        let jobs = vec![job(1, 128, 64, 10), job(2, 128, 64, 10)];
        let schedule = Schedule([(1, 0), (2, 0)].into_iter().collect());
        assert!(audit_schedule(&jobs, &schedule, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn audit_reports_node_overflow() {
        let jobs = vec![job(1, 128, 1, 10), job(2, 128, 1, 10), job(3, 128, 1, 10)];
        let schedule = Schedule([(1, 0), (2, 0), (3, 0)].into_iter().collect());
        let violations = audit_schedule(&jobs, &schedule, &cfg()).unwrap();
        assert_eq!(violations.len(), 1);
        assert_eq!(
            violations[0],
            AuditViolation {
                t: 0,
                resource: ResourceKind::Nodes,
                demand: 384,
                capacity: 256
            }
        );
    }

    #[test]
    fn audit_treats_activity_as_half_open() {
        let jobs = vec![job(1, 200, 64, 10), job(2, 100, 32, 10)];
        let schedule = Schedule([(1, 0), (2, 10)].into_iter().collect());
        assert!(audit_schedule(&jobs, &schedule, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn audit_errors_on_missing_job() {
        let jobs = vec![job(1, 2, 4, 10)];
        let schedule = Schedule(BTreeMap::new());
        assert!(audit_schedule(&jobs, &schedule, &cfg()).is_err());
    }
}
