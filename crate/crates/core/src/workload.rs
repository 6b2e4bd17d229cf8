//! Synthetic workload generation and workload file I/O.
//!
//! Seven scenario generators produce job lists with seeded randomness.
//! All sampling is driven by a `ChaCha8Rng` seeded from [`ScenarioSpec::seed`],
//! and the per-job draw order is fixed (walltime, nodes, memory, then user
//! index), so identical `(kind, num_jobs, seed, num_users)` tuples always
//! produce identical workloads regardless of platform.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One batch job: identity, owner, and resource demands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    /// 1-based, contiguous within a workload.
    pub job_id: u32,
    pub user_id: String,
    /// Seconds; always 0 here (the full queue is submitted upfront).
    pub submit_time: u64,
    /// Execution duration in seconds, treated as exact.
    pub walltime: u64,
    pub nodes: u32,
    pub memory_gb: u32,
}

impl JobSpec {
    fn check(&self, max_nodes: u32, max_memory_gb: u32) -> Result<()> {
        if self.walltime < 1 {
            return Err(Error::Parse(format!(
                "job {}: walltime out of range (got {}, expected >= 1)",
                self.job_id, self.walltime
            )));
        }
        if self.nodes < 1 || self.nodes > max_nodes {
            return Err(Error::Parse(format!(
                "job {}: nodes out of range (got {}, expected 1..={})",
                self.job_id, self.nodes, max_nodes
            )));
        }
        if self.memory_gb < 1 || self.memory_gb > max_memory_gb {
            return Err(Error::Parse(format!(
                "job {}: memory_gb out of range (got {}, expected 1..={})",
                self.job_id, self.memory_gb, max_memory_gb
            )));
        }
        if self.submit_time != 0 {
            return Err(Error::Parse(format!(
                "job {}: submit_time must be 0 (got {})",
                self.job_id, self.submit_time
            )));
        }
        if self.user_id.is_empty() {
            return Err(Error::Parse(format!("job {}: empty user_id", self.job_id)));
        }
        Ok(())
    }
}

/// Total cluster capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub total_nodes: u32,
    pub total_memory_gb: u32,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            total_nodes: 256,
            total_memory_gb: 2048,
        }
    }
}

/// The seven benchmark workload shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    HomogeneousShort,
    HeterogeneousMix,
    LongJobDominant,
    HighParallelism,
    ResourceSparse,
    BurstyIdle,
    Adversarial,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::HomogeneousShort,
        ScenarioKind::HeterogeneousMix,
        ScenarioKind::LongJobDominant,
        ScenarioKind::HighParallelism,
        ScenarioKind::ResourceSparse,
        ScenarioKind::BurstyIdle,
        ScenarioKind::Adversarial,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::HomogeneousShort => "homogeneous_short",
            ScenarioKind::HeterogeneousMix => "heterogeneous_mix",
            ScenarioKind::LongJobDominant => "long_job_dominant",
            ScenarioKind::HighParallelism => "high_parallelism",
            ScenarioKind::ResourceSparse => "resource_sparse",
            ScenarioKind::BurstyIdle => "bursty_idle",
            ScenarioKind::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "homogeneous_short" => Ok(ScenarioKind::HomogeneousShort),
            "heterogeneous_mix" => Ok(ScenarioKind::HeterogeneousMix),
            "long_job_dominant" => Ok(ScenarioKind::LongJobDominant),
            "high_parallelism" => Ok(ScenarioKind::HighParallelism),
            "resource_sparse" => Ok(ScenarioKind::ResourceSparse),
            "bursty_idle" => Ok(ScenarioKind::BurstyIdle),
            "adversarial" => Ok(ScenarioKind::Adversarial),
            other => Err(Error::InvalidInput(format!(
                "unknown scenario kind '{other}'"
            ))),
        }
    }
}

/// Parameters of one workload instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub num_jobs: u32,
    pub seed: u64,
    pub num_users: u32,
}

impl ScenarioSpec {
    /// New spec with the default user count `min(8, num_jobs)`.
    pub fn new(kind: ScenarioKind, num_jobs: u32, seed: u64) -> Self {
        Self {
            kind,
            num_jobs,
            seed,
            num_users: default_num_users(num_jobs),
        }
    }

    fn check(&self) -> Result<()> {
        if self.num_jobs < 1 {
            return Err(Error::InvalidInput("num_jobs must be >= 1".into()));
        }
        if self.num_users < 1 {
            return Err(Error::InvalidInput("num_users must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn default_num_users(num_jobs: u32) -> u32 {
    num_jobs.clamp(1, 8)
}

/// Draw one value from Gamma(shape, scale).
///
/// Mean is `shape * scale`, variance `shape * scale^2`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !shape.is_finite() || !scale.is_finite() || shape <= 0.0 || scale <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "gamma parameters must be positive (shape={shape}, scale={scale})"
        )));
    }
    let dist = rand_distr::Gamma::new(shape, scale)
        .map_err(|e| Error::InvalidInput(format!("gamma: {e}")))?;
    Ok(dist.sample(rng))
}

fn gamma_walltime<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<u64> {
    let v = sample_gamma(shape, scale, rng)?;
    Ok((v.round() as i64).max(1) as u64)
}

/// Generate the job list for one scenario instance.
///
/// Demands are clamped to `config` capacities so every job individually fits
/// an empty cluster. Deterministic for a fixed spec.
pub fn generate_workload(spec: &ScenarioSpec, config: &ClusterConfig) -> Result<Vec<JobSpec>> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut jobs = Vec::with_capacity(spec.num_jobs as usize);
    for job_id in 1..=spec.num_jobs {
        let (walltime, nodes, memory_gb) = match spec.kind {
            ScenarioKind::HomogeneousShort => {
                let walltime = rng.random_range(30..=120u64);
                (walltime, 2, 4)
            }
            ScenarioKind::HeterogeneousMix => {
                let walltime = gamma_walltime(1.5, 300.0, &mut rng)?;
                let nodes = 1u32 << rng.random_range(0..=8u32);
                let memory_gb = nodes << rng.random_range(0..=3u32);
                (walltime, nodes, memory_gb)
            }
            ScenarioKind::LongJobDominant => {
                if rng.random::<f64>() < 0.2 {
                    (rng.random_range(10_000..=50_000u64), 128, 256)
                } else {
                    (rng.random_range(60..=500u64), 2, 4)
                }
            }
            ScenarioKind::HighParallelism => {
                let walltime = gamma_walltime(1.0, 800.0, &mut rng)?;
                let nodes = [64u32, 128, 256][rng.random_range(0..3usize)];
                (walltime, nodes, nodes * 8)
            }
            ScenarioKind::ResourceSparse => {
                let walltime = rng.random_range(30..=300u64);
                let memory_gb = [1u32, 2, 4][rng.random_range(0..3usize)];
                (walltime, 1, memory_gb)
            }
            ScenarioKind::BurstyIdle => {
                // Odd job ids are short, even ids long.
                let walltime = if job_id % 2 == 1 {
                    rng.random_range(30..=120u64)
                } else {
                    rng.random_range(2_000..=5_000u64)
                };
                let nodes = [1u32, 2, 4][rng.random_range(0..3usize)];
                let memory_gb = [2u32, 4, 8][rng.random_range(0..3usize)];
                (walltime, nodes, memory_gb)
            }
            ScenarioKind::Adversarial => {
                if job_id == 1 {
                    (100_000, 128, 1024)
                } else {
                    (60, 1, 2)
                }
            }
        };
        let user = rng.random_range(1..=spec.num_users);
        jobs.push(JobSpec {
            job_id,
            user_id: format!("user_{user}"),
            submit_time: 0,
            walltime: walltime.max(1),
            nodes: nodes.clamp(1, config.total_nodes),
            memory_gb: memory_gb.clamp(1, config.total_memory_gb),
        });
    }
    Ok(jobs)
}

/// Write a workload file: a JSON array of jobs in ascending `job_id` order.
pub fn write_workload(jobs: &[JobSpec], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(jobs)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Read and validate a workload file.
///
/// The inverse of [`write_workload`]: `read(write(jobs)) == jobs`.
pub fn read_workload(path: &Path) -> Result<Vec<JobSpec>> {
    let text = std::fs::read_to_string(path)?;
    parse_workload(&text)
}

/// Parse workload JSON, checking every field invariant.
pub fn parse_workload(text: &str) -> Result<Vec<JobSpec>> {
    if text.trim().is_empty() {
        return Err(Error::Parse("no jobs".into()));
    }
    let jobs: Vec<JobSpec> = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if jobs.is_empty() {
        return Err(Error::Parse("no jobs".into()));
    }
    let defaults = ClusterConfig::default();
    for (idx, job) in jobs.iter().enumerate() {
        job.check(defaults.total_nodes, defaults.total_memory_gb)?;
        let expected = idx as u32 + 1;
        if job.job_id != expected {
            return Err(Error::Parse(format!(
                "job_id must be contiguous ascending: position {} has job_id {}",
                idx + 1,
                job.job_id
            )));
        }
    }
    Ok(jobs)
}
