//! The scheduling agent loop: prompt construction, Thought/Action parsing,
//! scratchpad memory, and feedback-driven retry.
//!
//! Each decision step renders the full system state plus the scratchpad
//! into a prompt, queries the completion provider, parses a single
//! (Thought, Action) pair, and either executes the action or appends the
//! simulator's natural-language rejection to the scratchpad. The agent
//! holds no state across runs beyond the scratchpad it is given.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::provider::CompletionProvider;
use crate::sim::{
    render_feedback, Action, ActionOutcome, ClusterState, Schedule, TraceRecord, Violation,
};
use crate::workload::{ClusterConfig, JobSpec};

/// One timestamped scratchpad record: what the model thought, what it did,
/// and what the environment said back (present iff the action was rejected
/// or carries an advisory note).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScratchpadEntry {
    pub t: u64,
    pub thought: String,
    pub action_text: String,
    pub feedback: Option<String>,
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Accepted,
    Rejected,
    /// Injected by the harness (reject valve or final auto-Stop), not
    /// proposed by the model.
    Forced,
}

impl StepOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepOutcome::Accepted => "accepted",
            StepOutcome::Rejected => "rejected",
            StepOutcome::Forced => "forced",
        }
    }
}

/// One trace line: a scratchpad entry plus per-step metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: u32,
    pub prompt_hash: String,
    pub entry: ScratchpadEntry,
}

impl TraceStep {
    pub fn to_record(&self) -> TraceRecord {
        TraceRecord {
            step: self.step,
            t: self.entry.t,
            prompt_hash: self.prompt_hash.clone(),
            thought: self.entry.thought.clone(),
            action_text: self.entry.action_text.clone(),
            outcome: self.entry.outcome.as_str().to_string(),
            feedback: self.entry.feedback.clone(),
        }
    }
}

/// Wall-clock accounting for one agent run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub total_elapsed: f64,
    pub call_count: u32,
    pub per_call_latencies: Vec<f64>,
    pub rejected_action_count: u32,
}

/// Loop safety valves. `max_calls` defaults to 10x the job count.
#[derive(Debug, Clone, Copy)]
pub struct AgentLimits {
    pub max_calls: Option<u32>,
    pub max_consecutive_rejects: u32,
    pub scratchpad_window: Option<usize>,
}

impl Default for AgentLimits {
    fn default() -> Self {
        Self {
            max_calls: None,
            max_consecutive_rejects: 5,
            scratchpad_window: None,
        }
    }
}

/// Per-user mean wait of completed jobs, surfaced to the model as the
/// prompt's fairness indicator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FairnessContext {
    pub per_user_mean_wait: Vec<(String, f64)>,
}

impl FairnessContext {
    pub fn from_state(state: &ClusterState) -> Self {
        let mut sums: std::collections::BTreeMap<String, (f64, f64)> = Default::default();
        for (id, start, _end) in state.completed() {
            if let Some(job) = state.job(id) {
                let entry = sums.entry(job.user_id.clone()).or_insert((0.0, 0.0));
                entry.0 += (start - job.submit_time) as f64;
                entry.1 += 1.0;
            }
        }
        FairnessContext {
            per_user_mean_wait: sums
                .into_iter()
                .map(|(user, (sum, count))| (user, sum / count))
                .collect(),
        }
    }
}

fn render_entry(entry: &ScratchpadEntry, out: &mut String) {
    out.push_str(&format!("[t={}] Thought: {}\n", entry.t, entry.thought));
    out.push_str(&format!("[t={}] Action: {}\n", entry.t, entry.action_text));
    if let Some(feedback) = &entry.feedback {
        out.push_str(feedback);
        out.push('\n');
    }
}

fn render_scratchpad(entries: &[ScratchpadEntry], window: Option<usize>) -> String {
    if entries.is_empty() {
        return "(nothing yet)\n".into();
    }
    let mut out = String::new();
    let visible_from = match window {
        Some(k) if entries.len() > k => entries.len() - k,
        _ => 0,
    };
    if visible_from > 0 {
        out.push_str(&format!(
            "[... {visible_from} earlier entries elided ...]\n"
        ));
        // The most recent rejection always stays visible so the model can
        // keep correcting itself.
        if let Some(last_rejected) = entries
            .iter()
            .rposition(|e| e.outcome == StepOutcome::Rejected)
        {
            if last_rejected < visible_from {
                out.push_str("[pinned rejection]\n");
                render_entry(&entries[last_rejected], &mut out);
            }
        }
    }
    for entry in &entries[visible_from..] {
        render_entry(entry, &mut out);
    }
    out
}

/// Render the full decision prompt for the current state.
pub fn build_prompt(
    state: &ClusterState,
    scratchpad: &[ScratchpadEntry],
    window: Option<usize>,
    fairness: &FairnessContext,
) -> String {
    let config = state.config();
    let mut p = String::with_capacity(4096);
    p.push_str(
        "You are an expert HPC resource manager, and your task is to schedule jobs in a \
         high-performance computing (HPC) environment. Use the current system state, job queue, \
         scratchpad (decision history), and fairness indicators to make well-balanced decisions.\n\n",
    );
    p.push_str(&format!(
        "System capacity: {} nodes, {} GB memory\n",
        config.total_nodes, config.total_memory_gb
    ));
    p.push_str(&format!("Current time: {}\n", state.now()));
    p.push_str(&format!("Available Nodes: {}\n", state.available_nodes()));
    p.push_str(&format!(
        "Available Memory: {} GB\n\n",
        state.available_memory_gb()
    ));

    p.push_str("Running Jobs:\n");
    if state.running().count() == 0 {
        p.push_str("None\n");
    } else {
        for (id, start, end) in state.running() {
            let job = state.job(id).expect("running job exists");
            p.push_str(&format!(
                "Job {} ({}): {} Nodes, {} GB, started t={}, ends t={}\n",
                id, job.user_id, job.nodes, job.memory_gb, start, end
            ));
        }
    }

    p.push_str("\nCompleted Jobs:\n");
    let completed: Vec<(u32, u64, u64)> = state.completed().collect();
    if completed.is_empty() {
        p.push_str("None\n");
    } else {
        let show = 10.min(completed.len());
        p.push_str(&format!("{} completed; last {}:\n", completed.len(), show));
        for (id, start, end) in completed.iter().rev().take(show).rev() {
            let job = state.job(*id).expect("completed job exists");
            p.push_str(&format!(
                "Job {} ({}): t={}..{}\n",
                id, job.user_id, start, end
            ));
        }
    }

    p.push_str("\nWaiting Jobs (eligible to schedule):\n");
    if state.waiting().is_empty() {
        p.push_str("None\n");
    } else {
        for &id in state.waiting() {
            let job = state.job(id).expect("waiting job exists");
            p.push_str(&format!(
                "Job {} ({}): {} Nodes, {} GB, walltime={}\n",
                id, job.user_id, job.nodes, job.memory_gb, job.walltime
            ));
        }
    }

    p.push_str("\nFairness indicators (per-user average wait of completed jobs):\n");
    if fairness.per_user_mean_wait.is_empty() {
        p.push_str("None\n");
    } else {
        for (user, mean) in &fairness.per_user_mean_wait {
            p.push_str(&format!("{user}: {mean:.2}\n"));
        }
    }

    p.push_str("\n# Scratchpad (Decision History)\n");
    p.push_str(&render_scratchpad(scratchpad, window));

    p.push_str(&format!(
        "\nYour scheduling objectives are:\n\
         You must balance all of the following:\n\
         - Fairness: Minimize variance in user wait times. Avoid starving any user.\n\
         - Makespan: Minimize total time to finish all jobs.\n\
         - Utilization: Maximize Node & memory usage over time (avoid idle resources).\n\
         - Throughput: Maximize the number of jobs completed per unit time.\n\
         - Feasibility: Do not exceed {} Nodes or {} GB memory at any time.\n\n",
        config.total_nodes, config.total_memory_gb
    ));
    p.push_str(
        "Trade-offs are allowed. Do not over-optimize one metric at the expense of others.\n\
         For example:\n\
         - Prioritizing a long-waiting job improves fairness, but may slightly hurt makespan.\n\
         - Choosing short jobs improves throughput, but may increase wait time for large jobs.\n\n",
    );
    p.push_str(
        "Decide:\n\
         1. Which job should be started now (if any)?\n\
         2. Justify your decision in thought.\n\
         3. Return only one of:\n\
         - StartJob(job_id=X)\n\
         - BackfillJob(job_id=Y)\n\
         - Delay\n\
         - Stop (when all jobs have been scheduled)\n\n",
    );
    p.push_str("Output format:\nThought: <your reasoning>\nAction: <your action>\n");
    p
}

/// Why a model response could not be turned into an action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure(pub String);

fn rfind_marker(text: &str, marker: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let m = marker.as_bytes();
    if bytes.len() < m.len() {
        return None;
    }
    (0..=bytes.len() - m.len())
        .rev()
        .find(|&i| bytes[i..i + m.len()].eq_ignore_ascii_case(m))
}

fn find_marker(text: &str, marker: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let m = marker.as_bytes();
    if bytes.len() < m.len() {
        return None;
    }
    (0..=bytes.len() - m.len()).find(|&i| bytes[i..i + m.len()].eq_ignore_ascii_case(m))
}

fn parse_action_text(raw: &str) -> std::result::Result<Action, String> {
    let s = raw
        .trim()
        .trim_matches('`')
        .trim()
        .trim_end_matches('.')
        .trim();
    if s.is_empty() {
        return Err("empty action".into());
    }
    let (name, args) = match s.find('(') {
        Some(open) => {
            let close = s
                .rfind(')')
                .ok_or_else(|| "unclosed parenthesis".to_string())?;
            if close < open {
                return Err("malformed parentheses".into());
            }
            (s[..open].trim(), Some(s[open + 1..close].trim()))
        }
        None => (s, None),
    };
    let job_id = |args: Option<&str>| -> std::result::Result<u32, String> {
        let inner = args.ok_or_else(|| "missing job id".to_string())?;
        let inner = inner.trim();
        let value = match inner.split_once('=') {
            Some((key, value)) => {
                if !key.trim().eq_ignore_ascii_case("job_id") {
                    return Err(format!("unexpected argument '{}'", key.trim()));
                }
                value.trim()
            }
            None => inner,
        };
        value
            .parse::<u32>()
            .map_err(|_| format!("job id '{value}' is not an integer"))
    };
    match name.to_ascii_lowercase().as_str() {
        "startjob" => Ok(Action::StartJob(job_id(args)?)),
        "backfilljob" => Ok(Action::BackfillJob(job_id(args)?)),
        "delay" => match args {
            None | Some("") => Ok(Action::Delay),
            Some(extra) => Err(format!("Delay takes no arguments, got '{extra}'")),
        },
        "stop" => match args {
            None | Some("") => Ok(Action::Stop),
            Some(extra) => Err(format!("Stop takes no arguments, got '{extra}'")),
        },
        other => Err(format!("unrecognized action '{other}'")),
    }
}

/// Split a model response into (thought, action).
///
/// The thought spans from the first `Thought:` marker to the *last*
/// `Action:` marker (reasoning models sometimes mention actions mid-
/// thought); the action is parsed case-insensitively from that last
/// `Action:` line, tolerating backticks and either `job_id=N` or a bare
/// integer.
pub fn parse_response(text: &str) -> std::result::Result<(String, Action), ParseFailure> {
    let action_pos =
        rfind_marker(text, "action:").ok_or_else(|| ParseFailure("no Action line".into()))?;
    let after = &text[action_pos + "action:".len()..];
    let action_line = after.lines().next().unwrap_or("");
    let action = parse_action_text(action_line).map_err(ParseFailure)?;
    let thought = match find_marker(text, "thought:") {
        Some(thought_pos) if thought_pos < action_pos => text
            [thought_pos + "thought:".len()..action_pos]
            .trim()
            .to_string(),
        _ => String::new(),
    };
    Ok((thought, action))
}

fn prompt_hash(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Everything a finished agent run produces.
#[derive(Debug, Clone)]
pub struct AgentRun {
    pub schedule: Schedule,
    pub trace: Vec<TraceStep>,
    pub overhead: OverheadReport,
}

impl AgentRun {
    pub fn trace_records(&self) -> Vec<TraceRecord> {
        self.trace.iter().map(TraceStep::to_record).collect()
    }
}

/// Drive the provider through the decision loop until every job has a
/// start time and the run drains.
///
/// The loop never lets an invalid action touch the state: rejected actions
/// feed their rendered violation back through the scratchpad. Two safety
/// valves keep runs finite: after `max_consecutive_rejects` rejected steps
/// a feasible action is injected, and once the waiting queue is empty the
/// model gets one further decision before Stop is injected. Exceeding the
/// call budget aborts the run.
pub fn run_react_loop(
    jobs: &[JobSpec],
    config: &ClusterConfig,
    provider: &mut dyn CompletionProvider,
    limits: &AgentLimits,
) -> Result<AgentRun> {
    let mut state = ClusterState::new(*config, jobs)?;
    let call_budget = limits.max_calls.unwrap_or_else(|| 10 * jobs.len() as u32);
    let started = Instant::now();

    let mut scratchpad: Vec<ScratchpadEntry> = Vec::new();
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut latencies: Vec<f64> = Vec::new();
    let mut rejected_count = 0u32;
    let mut consecutive_rejects = 0u32;
    let mut decisions_after_drain = 0u32;
    let mut step = 0u32;

    while !state.is_terminal() {
        step += 1;

        // Reject valve: force progress after too many failed attempts.
        if consecutive_rejects >= limits.max_consecutive_rejects {
            let forced = if state.running().count() > 0 {
                Action::Delay
            } else if let Some(&id) = state.waiting().iter().find(|&&id| {
                let job = state.job(id).expect("waiting job exists");
                job.nodes <= state.available_nodes() && job.memory_gb <= state.available_memory_gb()
            }) {
                Action::StartJob(id)
            } else {
                Action::Stop
            };
            let t = state.now();
            state.apply(&forced)?;
            let entry = ScratchpadEntry {
                t,
                thought: String::new(),
                action_text: forced.text(),
                feedback: Some(format!(
                    "advisory: action injected by the harness after {} consecutive rejected steps",
                    consecutive_rejects
                )),
                outcome: StepOutcome::Forced,
            };
            scratchpad.push(entry.clone());
            trace.push(TraceStep {
                step,
                prompt_hash: String::new(),
                entry,
            });
            consecutive_rejects = 0;
            continue;
        }

        // Auto-Stop: once nothing waits, allow one more model decision and
        // then inject Stop to bound cost.
        if state.waiting().is_empty() && decisions_after_drain >= 1 {
            let t = state.now();
            state.apply(&Action::Stop)?;
            let entry = ScratchpadEntry {
                t,
                thought: String::new(),
                action_text: Action::Stop.text(),
                feedback: Some(
                    "advisory: Stop injected by the harness; every job has been scheduled".into(),
                ),
                outcome: StepOutcome::Forced,
            };
            scratchpad.push(entry.clone());
            trace.push(TraceStep {
                step,
                prompt_hash: String::new(),
                entry,
            });
            continue;
        }

        if latencies.len() as u32 >= call_budget {
            return Err(Error::CallBudgetExhausted {
                calls: latencies.len() as u32,
                limit: call_budget,
            });
        }

        let waiting_was_empty = state.waiting().is_empty();
        let fairness = FairnessContext::from_state(&state);
        let prompt = build_prompt(&state, &scratchpad, limits.scratchpad_window, &fairness);
        let hash = prompt_hash(&prompt);
        let completion = provider.complete(&prompt)?;
        latencies.push(completion.latency);

        let t = state.now();
        let entry = match parse_response(&completion.text) {
            Err(ParseFailure(_reason)) => {
                rejected_count += 1;
                consecutive_rejects += 1;
                ScratchpadEntry {
                    t,
                    // Keep the raw response visible to the model and in the
                    // trace; there is no parseable thought to extract.
                    thought: completion.text.clone(),
                    action_text: "<none>".into(),
                    feedback: Some(render_feedback(
                        t,
                        "<none>",
                        &Violation::UnparseableResponse,
                    )),
                    outcome: StepOutcome::Rejected,
                }
            }
            Ok((thought, action)) => match state.validate(&action) {
                ActionOutcome::Rejected(feedback) => {
                    rejected_count += 1;
                    consecutive_rejects += 1;
                    ScratchpadEntry {
                        t,
                        thought,
                        action_text: action.text(),
                        feedback: Some(feedback),
                        outcome: StepOutcome::Rejected,
                    }
                }
                ActionOutcome::Accepted(_) => {
                    let advisory = match action {
                        Action::BackfillJob(id) if !state.backfill_has_blocked_predecessor(id) => {
                            Some(format!(
                                "advisory: no earlier-queued job is blocked at t={t}; \
                                 BackfillJob(job_id={id}) behaves like StartJob"
                            ))
                        }
                        _ => None,
                    };
                    state.apply(&action)?;
                    consecutive_rejects = 0;
                    ScratchpadEntry {
                        t,
                        thought,
                        action_text: action.text(),
                        feedback: advisory,
                        outcome: StepOutcome::Accepted,
                    }
                }
            },
        };
        scratchpad.push(entry.clone());
        trace.push(TraceStep {
            step,
            prompt_hash: hash,
            entry,
        });
        if waiting_was_empty && !state.is_terminal() {
            decisions_after_drain += 1;
        }
    }

    let schedule = state.realized_schedule();
    debug_assert_eq!(schedule.len(), jobs.len());
    let overhead = OverheadReport {
        total_elapsed: started.elapsed().as_secs_f64(),
        call_count: latencies.len() as u32,
        per_call_latencies: latencies,
        rejected_action_count: rejected_count,
    };
    Ok(AgentRun {
        schedule,
        trace,
        overhead,
    })
}
