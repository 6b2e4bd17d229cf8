use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use schedbench::agent::AgentLimits;
use schedbench::harness::{
    emit_report, load_results, run_grid, run_single, GridParams, GroupBy, RunConfig,
};
use schedbench::metrics::MetricField;
use schedbench::policy::PolicyKind;
use schedbench::provider::{ProviderConfig, ProviderKind};
use schedbench::workload::{
    default_num_users, generate_workload, write_workload, ClusterConfig, ScenarioKind, ScenarioSpec,
};

#[derive(Parser)]
#[command(
    name = "schedbench",
    version,
    about = "HPC job-scheduling simulator and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a workload file for one scenario.
    Generate {
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long)]
        jobs: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of distinct users; defaults to min(8, jobs).
        #[arg(long)]
        users: Option<u32>,
        /// Output workload file (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a single run and persist its artifacts.
    Run {
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long)]
        jobs: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        users: Option<u32>,
        #[arg(long)]
        policy: PolicyKind,
        #[command(flatten)]
        provider: ProviderArgs,
        /// Output directory; the run writes under <out>/<run_id>/.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Run a scenario x size x policy x seed grid and write summary.csv.
    Bench {
        /// Comma-separated scenario list, or "all".
        #[arg(long, default_value = "all")]
        scenario: String,
        /// Comma-separated job counts.
        #[arg(long, default_value = "10,20,40")]
        jobs: String,
        /// Comma-separated policies (fcfs must be present).
        #[arg(long, default_value = "fcfs,sjf")]
        policy: String,
        /// Comma-separated seeds or an inclusive range "a..b".
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long)]
        users: Option<u32>,
        #[command(flatten)]
        provider: ProviderArgs,
        /// Worker threads; defaults to all cores (1 for live providers).
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
    },
    /// Aggregate existing run directories into report CSVs.
    Report {
        /// Directory holding run subdirectories (from run/bench).
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
        #[arg(long, default_value = "policy-scenario-size")]
        group_by: GroupBy,
    },
}

#[derive(Args)]
struct ProviderArgs {
    /// Completion provider for the react policy.
    #[arg(long)]
    provider: Option<ProviderKind>,
    /// Model name, or mock policy name for --provider mock.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    reasoning_effort: Option<String>,
    /// Keep only the last K scratchpad entries in prompts.
    #[arg(long)]
    scratchpad_window: Option<usize>,
    /// Provider call budget; defaults to 10x the job count.
    #[arg(long)]
    max_calls: Option<u32>,
}

impl ProviderArgs {
    fn agent_limits(&self) -> AgentLimits {
        AgentLimits {
            max_calls: self.max_calls,
            max_consecutive_rejects: 5,
            scratchpad_window: self.scratchpad_window,
        }
    }

    /// Build the provider config for a react run.
    ///
    /// Endpoints may be overridden via SCHEDBENCH_OPENAI_ENDPOINT and
    /// SCHEDBENCH_ANTHROPIC_ENDPOINT; credentials come from
    /// OPENAI_API_KEY / ANTHROPIC_API_KEY.
    fn build(&self) -> anyhow::Result<ProviderConfig> {
        let kind = self.provider.unwrap_or(ProviderKind::Mock);
        let mut config = match kind {
            ProviderKind::Mock => {
                ProviderConfig::mock(self.model.as_deref().unwrap_or("greedy-sjf-text"))
            }
            ProviderKind::OpenAiCompatible => {
                let model = self
                    .model
                    .as_deref()
                    .context("--model is required with --provider openai")?;
                let mut c = ProviderConfig::openai(model);
                if let Ok(endpoint) = std::env::var("SCHEDBENCH_OPENAI_ENDPOINT") {
                    c.endpoint = endpoint;
                }
                c
            }
            ProviderKind::AnthropicCompatible => {
                let model = self
                    .model
                    .as_deref()
                    .context("--model is required with --provider anthropic")?;
                let mut c = ProviderConfig::anthropic(model);
                if let Ok(endpoint) = std::env::var("SCHEDBENCH_ANTHROPIC_ENDPOINT") {
                    c.endpoint = endpoint;
                }
                c
            }
        };
        if let Some(t) = self.temperature {
            config.temperature = Some(t);
        }
        if let Some(m) = self.max_tokens {
            config.max_output_tokens = m;
        }
        if let Some(e) = &self.reasoning_effort {
            config.reasoning_effort = Some(e.clone());
        }
        Ok(config)
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} '{s}': {e}"))
        })
        .collect()
}

fn parse_seeds(text: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().context("bad seed range start")?;
        let b: u64 = b.trim().parse().context("bad seed range end")?;
        if a > b {
            bail!("seed range {a}..{b} is empty");
        }
        return Ok((a..=b).collect());
    }
    parse_list(text, "seed")
}

fn parse_scenarios(text: &str) -> anyhow::Result<Vec<ScenarioKind>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(ScenarioKind::ALL.to_vec());
    }
    parse_list(text, "scenario")
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate {
            scenario,
            jobs,
            seed,
            users,
            out,
        } => {
            let spec = ScenarioSpec {
                kind: scenario,
                num_jobs: jobs,
                seed,
                num_users: users.unwrap_or_else(|| default_num_users(jobs)),
            };
            let workload = generate_workload(&spec, &ClusterConfig::default())?;
            write_workload(&workload, &out)?;
            println!("wrote {} jobs to {}", workload.len(), out.display());
        }
        Command::Run {
            scenario,
            jobs,
            seed,
            users,
            policy,
            provider,
            out,
        } => {
            let mut spec = ScenarioSpec::new(scenario, jobs, seed);
            if let Some(u) = users {
                spec.num_users = u;
            }
            let mut config = RunConfig::new(spec, policy, out);
            config.agent_limits = provider.agent_limits();
            if policy == PolicyKind::ReActAgent {
                config.provider = Some(provider.build()?);
            }
            let result = run_single(&config)?;
            println!("run {} finished in {:.3}s", result.run_id, result.wall_time);
            for field in MetricField::ALL {
                println!("  {:<20} {}", field.as_str(), result.metrics.get(field));
            }
            if result.overhead.call_count > 0 {
                println!(
                    "  {:<20} {} calls, {} rejected",
                    "overhead", result.overhead.call_count, result.overhead.rejected_action_count
                );
            }
            println!(
                "artifacts under {}",
                config.output_dir.join(result.run_id).display()
            );
        }
        Command::Bench {
            scenario,
            jobs,
            policy,
            seeds,
            users,
            provider,
            parallelism,
            out,
        } => {
            let policies: Vec<PolicyKind> = parse_list(&policy, "policy")?;
            let mut params = GridParams::new(
                parse_scenarios(&scenario)?,
                parse_list(&jobs, "job count")?,
                policies.clone(),
                parse_seeds(&seeds)?,
                out.clone(),
            );
            params.num_users = users;
            params.parallelism = parallelism;
            params.agent_limits = provider.agent_limits();
            if policies.contains(&PolicyKind::ReActAgent) {
                params.provider = Some(provider.build()?);
            }
            let results = run_grid(&params)?;
            emit_report(&results, GroupBy::PolicyScenarioSize, &out)?;
            println!(
                "{} runs complete; summary.csv, normalized_summary.csv and overhead_summary.csv under {}",
                results.len(),
                out.display()
            );
        }
        Command::Report { out, group_by } => {
            let results = load_results(&out)?;
            emit_report(&results, group_by, &out)?;
            println!(
                "aggregated {} runs into {}",
                results.len(),
                out.join("normalized_summary.csv").display()
            );
        }
    }
    Ok(())
}
