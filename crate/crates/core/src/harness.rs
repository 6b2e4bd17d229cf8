//! Experiment driver: single runs, the scenario x size x policy grid, and
//! CSV report emission.
//!
//! Every run persists its artifacts under `out_dir/<run_id>/`:
//! `workload.json`, `metrics.json`, `run.json`, and `trace.jsonl` for agent
//! runs. Normalization always pairs a run with the FCFS run of the same
//! (scenario, size, seed) group, i.e. of the identical workload bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{run_react_loop, AgentLimits, OverheadReport};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, normalize, MetricField, MetricsReport};
use crate::policy::{exact_min_makespan, fcfs_schedule, sjf_schedule, ExactLimits, PolicyKind};
use crate::provider::{build_provider, ProviderConfig, ProviderKind};
use crate::sim::{audit_schedule, write_trace, Schedule};
use crate::workload::{
    generate_workload, write_workload, ClusterConfig, ScenarioKind, ScenarioSpec,
};

/// Everything needed to execute one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub policy: PolicyKind,
    pub provider: Option<ProviderConfig>,
    pub output_dir: PathBuf,
    pub cluster: ClusterConfig,
    pub agent_limits: AgentLimits,
    pub exact_limits: ExactLimits,
}

impl RunConfig {
    pub fn new(scenario: ScenarioSpec, policy: PolicyKind, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            scenario,
            policy,
            provider: None,
            output_dir: output_dir.into(),
            cluster: ClusterConfig::default(),
            agent_limits: AgentLimits::default(),
            exact_limits: ExactLimits::default(),
        }
    }

    pub fn run_id(&self) -> String {
        format!(
            "{}-{}-{}-{}",
            self.scenario.kind, self.scenario.num_jobs, self.scenario.seed, self.policy
        )
    }

    fn check(&self) -> Result<()> {
        match (self.policy, &self.provider) {
            (PolicyKind::ReActAgent, None) => Err(Error::InvalidInput(
                "react policy requires a provider".into(),
            )),
            (PolicyKind::ReActAgent, Some(p)) => p.validate(),
            (_, Some(_)) => Err(Error::InvalidInput(
                "provider is only meaningful for the react policy".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Outcome of one run; also persisted as `run.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: String,
    pub scenario: ScenarioSpec,
    pub policy: PolicyKind,
    pub cluster: ClusterConfig,
    pub provider_model: Option<String>,
    pub metrics: MetricsReport,
    pub overhead: OverheadReport,
    pub schedule: Schedule,
    pub wall_time: f64,
}

fn write_pretty_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Generate the workload, execute the policy, audit the schedule, compute
/// metrics, and persist the run artifacts.
pub fn run_single(config: &RunConfig) -> Result<RunResult> {
    config.check()?;
    let run_id = config.run_id();
    let run_dir = config.output_dir.join(&run_id);
    std::fs::create_dir_all(&run_dir)?;

    let jobs = generate_workload(&config.scenario, &config.cluster)?;
    write_workload(&jobs, &run_dir.join("workload.json"))?;

    let started = Instant::now();
    let (schedule, overhead) = match config.policy {
        PolicyKind::Fcfs => (
            fcfs_schedule(&jobs, &config.cluster)?,
            OverheadReport::default(),
        ),
        PolicyKind::Sjf => (
            sjf_schedule(&jobs, &config.cluster)?,
            OverheadReport::default(),
        ),
        PolicyKind::ExactMakespan => (
            exact_min_makespan(&jobs, &config.cluster, &config.exact_limits)?,
            OverheadReport::default(),
        ),
        PolicyKind::ReActAgent => {
            let provider_config = config.provider.as_ref().expect("checked above");
            let mut provider = build_provider(provider_config)?;
            let run = run_react_loop(
                &jobs,
                &config.cluster,
                provider.as_mut(),
                &config.agent_limits,
            )?;
            write_trace(&run.trace_records(), &run_dir.join("trace.jsonl"))?;
            (run.schedule, run.overhead)
        }
    };
    let wall_time = started.elapsed().as_secs_f64();

    let violations = audit_schedule(&jobs, &schedule, &config.cluster)?;
    if !violations.is_empty() {
        let first = violations[0].to_string();
        return Err(Error::AuditFailed { violations, first });
    }

    let metrics = compute_metrics(&jobs, &schedule, &config.cluster)?;
    write_pretty_json(&metrics, &run_dir.join("metrics.json"))?;

    let result = RunResult {
        run_id,
        scenario: config.scenario,
        policy: config.policy,
        cluster: config.cluster,
        provider_model: config.provider.as_ref().map(|p| p.model.clone()),
        metrics,
        overhead,
        schedule,
        wall_time,
    };
    write_pretty_json(&result, &run_dir.join("run.json"))?;
    Ok(result)
}

/// Grid parameters for [`run_grid`].
#[derive(Debug, Clone)]
pub struct GridParams {
    pub scenarios: Vec<ScenarioKind>,
    pub sizes: Vec<u32>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub num_users: Option<u32>,
    pub cluster: ClusterConfig,
    pub provider: Option<ProviderConfig>,
    pub agent_limits: AgentLimits,
    pub exact_limits: ExactLimits,
    pub out_dir: PathBuf,
    pub parallelism: Option<usize>,
}

impl GridParams {
    pub fn new(
        scenarios: Vec<ScenarioKind>,
        sizes: Vec<u32>,
        policies: Vec<PolicyKind>,
        seeds: Vec<u64>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            scenarios,
            sizes,
            policies,
            seeds,
            num_users: None,
            cluster: ClusterConfig::default(),
            provider: None,
            agent_limits: AgentLimits::default(),
            exact_limits: ExactLimits::default(),
            out_dir: out_dir.into(),
            parallelism: None,
        }
    }
}

fn group_key(result: &RunResult) -> (ScenarioKind, u32, u64) {
    (
        result.scenario.kind,
        result.scenario.num_jobs,
        result.scenario.seed,
    )
}

fn baseline_map(results: &[RunResult]) -> BTreeMap<(String, u32, u64), &RunResult> {
    results
        .iter()
        .filter(|r| r.policy == PolicyKind::Fcfs)
        .map(|r| {
            (
                (
                    r.scenario.kind.as_str().to_string(),
                    r.scenario.num_jobs,
                    r.scenario.seed,
                ),
                r,
            )
        })
        .collect()
}

fn baseline_for<'a>(
    baselines: &BTreeMap<(String, u32, u64), &'a RunResult>,
    result: &RunResult,
) -> Result<&'a RunResult> {
    let (kind, size, seed) = group_key(result);
    baselines
        .get(&(kind.as_str().to_string(), size, seed))
        .copied()
        .ok_or_else(|| Error::MissingBaseline(format!("{kind}-{size}-{seed}")))
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn latency_stats(overhead: &OverheadReport) -> (f64, f64, f64, f64) {
    // fold instead of sum: the empty-iterator sum is -0.0, which would
    // print as "-0" in the CSVs.
    let total: f64 = overhead.per_call_latencies.iter().fold(0.0, |a, l| a + l);
    if overhead.per_call_latencies.is_empty() {
        return (total, 0.0, 0.0, 0.0);
    }
    let mut sorted = overhead.per_call_latencies.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = total / sorted.len() as f64;
    (
        total,
        mean,
        percentile(&sorted, 0.5),
        percentile(&sorted, 0.95),
    )
}

fn fmt_ratio(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// Execute the full grid, write `summary.csv` (one row per run with raw
/// and FCFS-normalized metrics plus overhead columns), and return the run
/// results sorted by (scenario, size, seed, policy).
pub fn run_grid(params: &GridParams) -> Result<Vec<RunResult>> {
    if params.scenarios.is_empty() || params.sizes.is_empty() || params.seeds.is_empty() {
        return Err(Error::InvalidInput("empty grid axis".into()));
    }
    if !params.policies.contains(&PolicyKind::Fcfs) {
        return Err(Error::InvalidInput(
            "grid normalization requires the fcfs policy in the policy list".into(),
        ));
    }

    let mut configs = Vec::new();
    for &kind in &params.scenarios {
        for &size in &params.sizes {
            for &seed in &params.seeds {
                for &policy in &params.policies {
                    if policy == PolicyKind::ExactMakespan
                        && size as usize > params.exact_limits.max_jobs
                    {
                        eprintln!(
                            "note: exact solver refuses {size} jobs (limit {}); skipping {kind}-{size}-{seed}",
                            params.exact_limits.max_jobs
                        );
                        continue;
                    }
                    let mut scenario = ScenarioSpec::new(kind, size, seed);
                    if let Some(users) = params.num_users {
                        scenario.num_users = users;
                    }
                    let provider = match policy {
                        PolicyKind::ReActAgent => Some(
                            params
                                .provider
                                .clone()
                                .unwrap_or_else(|| ProviderConfig::mock("greedy-sjf-text")),
                        ),
                        _ => None,
                    };
                    configs.push(RunConfig {
                        scenario,
                        policy,
                        provider,
                        output_dir: params.out_dir.clone(),
                        cluster: params.cluster,
                        agent_limits: params.agent_limits,
                        exact_limits: params.exact_limits,
                    });
                }
            }
        }
    }

    // Live providers are rate-limited and sequential by nature.
    let live_agent = params
        .provider
        .as_ref()
        .is_some_and(|p| p.kind != ProviderKind::Mock)
        && params.policies.contains(&PolicyKind::ReActAgent);
    let threads = if live_agent {
        1
    } else {
        params
            .parallelism
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let mut results: Vec<RunResult> = pool.install(|| {
        use rayon::prelude::*;
        configs
            .par_iter()
            .map(run_single)
            .collect::<Result<Vec<_>>>()
    })?;

    results.sort_by(|a, b| {
        (
            a.scenario.kind.as_str(),
            a.scenario.num_jobs,
            a.scenario.seed,
            a.policy.as_str(),
        )
            .cmp(&(
                b.scenario.kind.as_str(),
                b.scenario.num_jobs,
                b.scenario.seed,
                b.policy.as_str(),
            ))
    });

    write_summary_csv(&results, &params.out_dir.join("summary.csv"))?;
    Ok(results)
}

fn write_summary_csv(results: &[RunResult], path: &Path) -> Result<()> {
    let baselines = baseline_map(results);
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![
        "run_id".to_string(),
        "scenario".into(),
        "jobs".into(),
        "seed".into(),
        "policy".into(),
    ];
    for field in MetricField::ALL {
        header.push(field.as_str().into());
    }
    for field in MetricField::ALL {
        header.push(format!("norm_{}", field.as_str()));
    }
    for extra in [
        "call_count",
        "total_latency",
        "mean_latency",
        "median_latency",
        "p95_latency",
        "wall_time",
    ] {
        header.push(extra.into());
    }
    writer.write_record(&header)?;

    for result in results {
        let baseline = baseline_for(&baselines, result)?;
        let normalized = normalize(&result.metrics, &baseline.metrics)?;
        let (total, mean, median, p95) = latency_stats(&result.overhead);
        let mut row = vec![
            result.run_id.clone(),
            result.scenario.kind.to_string(),
            result.scenario.num_jobs.to_string(),
            result.scenario.seed.to_string(),
            result.policy.to_string(),
        ];
        for field in MetricField::ALL {
            row.push(format!("{}", result.metrics.get(field)));
        }
        for field in MetricField::ALL {
            row.push(fmt_ratio(normalized.get(field)));
        }
        row.push(result.overhead.call_count.to_string());
        row.push(format!("{total}"));
        row.push(format!("{mean}"));
        row.push(format!("{median}"));
        row.push(format!("{p95}"));
        row.push(format!("{}", result.wall_time));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Aggregation keys for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    PolicyScenarioSize,
    PolicyScenario,
    Policy,
}

impl GroupBy {
    fn key(&self, result: &RunResult) -> (String, String, String) {
        let policy = result.policy.to_string();
        match self {
            GroupBy::PolicyScenarioSize => (
                policy,
                result.scenario.kind.to_string(),
                result.scenario.num_jobs.to_string(),
            ),
            GroupBy::PolicyScenario => (policy, result.scenario.kind.to_string(), String::new()),
            GroupBy::Policy => (policy, String::new(), String::new()),
        }
    }
}

impl std::str::FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "policy-scenario-size" => Ok(GroupBy::PolicyScenarioSize),
            "policy-scenario" => Ok(GroupBy::PolicyScenario),
            "policy" => Ok(GroupBy::Policy),
            other => Err(Error::InvalidInput(format!("unknown group-by '{other}'"))),
        }
    }
}

/// Write aggregate reports over a set of run results:
///
/// * `normalized_summary.csv` — plot-ready long format: one row per
///   (group, metric) with the mean FCFS-normalized value over seeds,
///   undefined ratios excluded;
/// * `overhead_summary.csv` — per-group call counts and latency quantiles.
pub fn emit_report(results: &[RunResult], group_by: GroupBy, out_dir: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no results to report".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let baselines = baseline_map(results);

    type GroupKey = (String, String, String);
    // (group key, metric) -> (sum, count of defined ratios)
    let mut norm_cells: BTreeMap<(GroupKey, &'static str), (f64, u64)> = BTreeMap::new();
    let mut group_seeds: BTreeMap<GroupKey, u64> = BTreeMap::new();
    for result in results {
        let baseline = baseline_for(&baselines, result)?;
        let normalized = normalize(&result.metrics, &baseline.metrics)?;
        let key = group_by.key(result);
        *group_seeds.entry(key.clone()).or_insert(0) += 1;
        for field in MetricField::ALL {
            let cell = norm_cells
                .entry((key.clone(), field.as_str()))
                .or_insert((0.0, 0));
            let value = normalized.get(field);
            if value.is_finite() {
                cell.0 += value;
                cell.1 += 1;
            }
        }
    }

    let mut writer = csv::Writer::from_path(out_dir.join("normalized_summary.csv"))?;
    writer.write_record([
        "policy",
        "scenario",
        "jobs",
        "metric",
        "mean_normalized",
        "runs",
    ])?;
    for ((key, metric), (sum, count)) in &norm_cells {
        let mean = if *count > 0 {
            format!("{}", sum / *count as f64)
        } else {
            "inf".into()
        };
        writer.write_record([
            key.0.as_str(),
            key.1.as_str(),
            key.2.as_str(),
            metric,
            mean.as_str(),
            &group_seeds[key].to_string(),
        ])?;
    }
    writer.flush()?;

    // Overhead aggregates pool every call latency in the group.
    let mut overhead_groups: BTreeMap<GroupKey, (u64, u64, Vec<f64>)> = BTreeMap::new();
    for result in results {
        let key = group_by.key(result);
        let entry = overhead_groups.entry(key).or_insert((0, 0, Vec::new()));
        entry.0 += 1;
        entry.1 += result.overhead.call_count as u64;
        entry
            .2
            .extend_from_slice(&result.overhead.per_call_latencies);
    }
    let mut writer = csv::Writer::from_path(out_dir.join("overhead_summary.csv"))?;
    writer.write_record([
        "policy",
        "scenario",
        "jobs",
        "runs",
        "total_call_count",
        "mean_call_count",
        "total_latency",
        "mean_latency",
        "median_latency",
        "p95_latency",
    ])?;
    for ((policy, scenario, jobs), (runs, calls, mut latencies)) in overhead_groups {
        latencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total: f64 = latencies.iter().fold(0.0, |a, l| a + l);
        let mean = if latencies.is_empty() {
            0.0
        } else {
            total / latencies.len() as f64
        };
        writer.write_record([
            policy.as_str(),
            scenario.as_str(),
            jobs.as_str(),
            &runs.to_string(),
            &calls.to_string(),
            &format!("{}", calls as f64 / runs as f64),
            &format!("{total}"),
            &format!("{mean}"),
            &format!("{}", percentile(&latencies, 0.5)),
            &format!("{}", percentile(&latencies, 0.95)),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Load every `run.json` under `dir` (one level deep), restoring the job
/// counts that `metrics.json` does not carry.
pub fn load_results(dir: &Path) -> Result<Vec<RunResult>> {
    let mut results = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path().join("run.json");
        if path.is_file() {
            let text = std::fs::read_to_string(&path)?;
            let mut result: RunResult = serde_json::from_str(&text)?;
            result.metrics.num_jobs = result.schedule.len();
            results.push(result);
        }
    }
    results.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(results)
}
