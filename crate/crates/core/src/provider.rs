//! Completion providers: a scripted/policy mock for offline runs and tests,
//! and HTTP clients speaking the OpenAI-compatible chat-completions shape
//! and the Anthropic-compatible messages shape.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

/// One model response plus transport measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    /// Wall-clock seconds for the whole call, including transport retries.
    pub latency: f64,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Mock,
    OpenAiCompatible,
    AnthropicCompatible,
}

impl std::str::FromStr for ProviderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mock" => Ok(ProviderKind::Mock),
            "openai" => Ok(ProviderKind::OpenAiCompatible),
            "anthropic" => Ok(ProviderKind::AnthropicCompatible),
            other => Err(Error::InvalidInput(format!("unknown provider '{other}'"))),
        }
    }
}

/// How to reach a completion endpoint. `credential_env` names an
/// environment variable holding the API key; the key itself is never
/// stored or serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub model: String,
    pub temperature: Option<f64>,
    pub max_output_tokens: u32,
    pub reasoning_effort: Option<String>,
    pub endpoint: String,
    pub credential_env: String,
}

impl ProviderConfig {
    pub fn mock(model: &str) -> Self {
        Self {
            kind: ProviderKind::Mock,
            model: model.to_string(),
            temperature: None,
            max_output_tokens: 5000,
            reasoning_effort: None,
            endpoint: String::new(),
            credential_env: String::new(),
        }
    }

    pub fn openai(model: &str) -> Self {
        Self {
            kind: ProviderKind::OpenAiCompatible,
            model: model.to_string(),
            temperature: None,
            max_output_tokens: 5000,
            reasoning_effort: None,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            credential_env: "OPENAI_API_KEY".into(),
        }
    }

    pub fn anthropic(model: &str) -> Self {
        Self {
            kind: ProviderKind::AnthropicCompatible,
            model: model.to_string(),
            temperature: Some(0.0),
            max_output_tokens: 5000,
            reasoning_effort: None,
            endpoint: "https://api.anthropic.com/v1/messages".into(),
            credential_env: "ANTHROPIC_API_KEY".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_output_tokens < 1 {
            return Err(Error::InvalidInput("max_output_tokens must be >= 1".into()));
        }
        if let Some(t) = self.temperature {
            if !(0.0..=2.0).contains(&t) {
                return Err(Error::InvalidInput(format!(
                    "temperature {t} outside [0, 2]"
                )));
            }
        }
        Ok(())
    }
}

/// A source of model completions. Implementations may keep per-run state
/// (e.g. a script position); one instance serves one run.
pub trait CompletionProvider {
    fn name(&self) -> String;
    fn complete(&mut self, prompt: &str) -> Result<CompletionResult>;
}

/// Construct the provider described by `config`.
///
/// For the mock kind, `model` selects a built-in policy
/// (currently `greedy-sjf-text`; an empty model defaults to it).
pub fn build_provider(config: &ProviderConfig) -> Result<Box<dyn CompletionProvider>> {
    config.validate()?;
    match config.kind {
        ProviderKind::Mock => {
            let name = if config.model.is_empty() {
                "greedy-sjf-text"
            } else {
                config.model.as_str()
            };
            Ok(Box::new(MockProvider::policy(name)?))
        }
        ProviderKind::OpenAiCompatible | ProviderKind::AnthropicCompatible => {
            Ok(Box::new(HttpProvider::new(config.clone())?))
        }
    }
}

// ---------------------------------------------------------------------------
// Mock provider
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum MockMode {
    Scripted(Vec<String>),
    GreedySjf,
}

/// Offline provider: replays a script verbatim, or plays a greedy
/// shortest-job-first policy by parsing the waiting list out of the prompt.
#[derive(Debug, Clone)]
pub struct MockProvider {
    mode: MockMode,
    position: usize,
    prompts: Vec<String>,
}

impl MockProvider {
    pub fn scripted(responses: Vec<String>) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::InvalidInput("mock script is empty".into()));
        }
        Ok(Self {
            mode: MockMode::Scripted(responses),
            position: 0,
            prompts: Vec::new(),
        })
    }

    pub fn policy(name: &str) -> Result<Self> {
        match name {
            "greedy-sjf-text" => Ok(Self {
                mode: MockMode::GreedySjf,
                position: 0,
                prompts: Vec::new(),
            }),
            other => Err(Error::InvalidInput(format!(
                "unknown mock policy '{other}' (available: greedy-sjf-text)"
            ))),
        }
    }

    /// Every prompt this provider has been asked to complete, in order.
    pub fn recorded_prompts(&self) -> &[String] {
        &self.prompts
    }
}

impl CompletionProvider for MockProvider {
    fn name(&self) -> String {
        match &self.mode {
            MockMode::Scripted(_) => "mock:scripted".into(),
            MockMode::GreedySjf => "mock:greedy-sjf-text".into(),
        }
    }

    fn complete(&mut self, prompt: &str) -> Result<CompletionResult> {
        let start = Instant::now();
        self.prompts.push(prompt.to_string());
        let text = match &self.mode {
            MockMode::Scripted(script) => {
                if self.position >= script.len() {
                    return Err(Error::ScriptExhausted(script.len()));
                }
                let text = script[self.position].clone();
                self.position += 1;
                text
            }
            MockMode::GreedySjf => greedy_sjf_response(prompt),
        };
        Ok(CompletionResult {
            text,
            latency: start.elapsed().as_secs_f64(),
            prompt_tokens: None,
            completion_tokens: None,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct PromptJobLine {
    job_id: u32,
    nodes: u32,
    memory_gb: u32,
    walltime: u64,
}

/// Parse `Job 12 (user_3): 4 Nodes, 8 GB, walltime=120`.
fn parse_prompt_job_line(line: &str) -> Option<PromptJobLine> {
    let rest = line.trim().strip_prefix("Job ")?;
    let (id_part, rest) = rest.split_once(" (")?;
    let job_id = id_part.trim().parse().ok()?;
    let (_user, demands) = rest.split_once("): ")?;
    let mut fields = demands.split(", ");
    let nodes = fields.next()?.strip_suffix(" Nodes")?.trim().parse().ok()?;
    let memory_gb = fields.next()?.strip_suffix(" GB")?.trim().parse().ok()?;
    let walltime = fields
        .next()?
        .strip_prefix("walltime=")?
        .trim()
        .parse()
        .ok()?;
    Some(PromptJobLine {
        job_id,
        nodes,
        memory_gb,
        walltime,
    })
}

fn parse_tail_number(line: &str, prefix: &str) -> Option<u64> {
    line.strip_prefix(prefix)?
        .trim()
        .trim_end_matches(" GB")
        .trim()
        .parse()
        .ok()
}

/// Render a Thought/Action pair implementing greedy SJF over the prompt's
/// waiting list: start the shortest fitting job, otherwise delay, and stop
/// once nothing waits.
fn greedy_sjf_response(prompt: &str) -> String {
    let mut available_nodes: u64 = 0;
    let mut available_memory: u64 = 0;
    let mut waiting: Vec<PromptJobLine> = Vec::new();
    let mut in_waiting = false;
    for line in prompt.lines() {
        if let Some(v) = parse_tail_number(line, "Available Nodes:") {
            available_nodes = v;
        } else if let Some(v) = parse_tail_number(line, "Available Memory:") {
            available_memory = v;
        } else if line.starts_with("Waiting Jobs") {
            in_waiting = true;
        } else if in_waiting {
            if let Some(job) = parse_prompt_job_line(line) {
                waiting.push(job);
            } else if !line.trim().is_empty() && !line.trim().eq("None") {
                in_waiting = false;
            }
        }
    }

    if waiting.is_empty() {
        return "Thought: every job has been scheduled; nothing is waiting.\nAction: Stop".into();
    }
    waiting.sort_by_key(|j| (j.walltime, j.job_id));
    let fitting = waiting
        .iter()
        .find(|j| j.nodes as u64 <= available_nodes && j.memory_gb as u64 <= available_memory);
    match fitting {
        Some(job) => format!(
            "Thought: job {} is the shortest waiting job (walltime={}) that fits \
             {available_nodes} free nodes and {available_memory} GB.\nAction: StartJob(job_id={})",
            job.job_id, job.walltime, job.job_id
        ),
        None => {
            "Thought: no waiting job fits the free resources; wait for a completion.\nAction: Delay"
                .into()
        }
    }
}

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

/// Transport retry policy: transient failures (connect/timeout, HTTP 429
/// and 5xx) are retried with exponential backoff.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(200),
        }
    }
}

/// Request body for the OpenAI-compatible chat-completions wire shape.
pub fn openai_request_body(config: &ProviderConfig, prompt: &str) -> serde_json::Value {
    let mut body = json!({
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "max_tokens": config.max_output_tokens,
    });
    if let Some(t) = config.temperature {
        body["temperature"] = json!(t);
    }
    if let Some(effort) = &config.reasoning_effort {
        body["reasoning_effort"] = json!(effort);
    }
    body
}

/// Request body for the Anthropic-compatible messages wire shape.
pub fn anthropic_request_body(config: &ProviderConfig, prompt: &str) -> serde_json::Value {
    let mut body = json!({
        "model": config.model,
        "max_tokens": config.max_output_tokens,
        "messages": [{"role": "user", "content": prompt}],
    });
    if let Some(t) = config.temperature {
        body["temperature"] = json!(t);
    }
    body
}

/// Extract (text, prompt_tokens, completion_tokens) from an
/// OpenAI-compatible response.
pub fn parse_openai_response(
    value: &serde_json::Value,
) -> Result<(String, Option<u64>, Option<u64>)> {
    let text = value["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| Error::Provider("response has no choices[0].message.content".into()))?;
    Ok((
        text.to_string(),
        value["usage"]["prompt_tokens"].as_u64(),
        value["usage"]["completion_tokens"].as_u64(),
    ))
}

/// Extract (text, input_tokens, output_tokens) from an Anthropic-compatible
/// response.
pub fn parse_anthropic_response(
    value: &serde_json::Value,
) -> Result<(String, Option<u64>, Option<u64>)> {
    let text = value["content"][0]["text"]
        .as_str()
        .ok_or_else(|| Error::Provider("response has no content[0].text".into()))?;
    Ok((
        text.to_string(),
        value["usage"]["input_tokens"].as_u64(),
        value["usage"]["output_tokens"].as_u64(),
    ))
}

/// Blocking HTTP client for hosted completion endpoints.
pub struct HttpProvider {
    config: ProviderConfig,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        Self::with_retry(config, RetryPolicy::default())
    }

    pub fn with_retry(config: ProviderConfig, retry: RetryPolicy) -> Result<Self> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(600))
            .build()
            .map_err(|e| Error::Provider(format!("client build failed: {e}")))?;
        Ok(Self {
            config,
            retry,
            client,
        })
    }

    fn credential(&self) -> Result<Option<String>> {
        if self.config.credential_env.is_empty() {
            return Ok(None);
        }
        match std::env::var(&self.config.credential_env) {
            Ok(key) if !key.is_empty() => Ok(Some(key)),
            _ => Err(Error::Provider(format!(
                "credential environment variable {} is not set",
                self.config.credential_env
            ))),
        }
    }

    fn send_once(
        &self,
        body: &serde_json::Value,
    ) -> std::result::Result<serde_json::Value, (bool, String)> {
        let key = match self.credential() {
            Ok(k) => k,
            Err(e) => return Err((false, e.to_string())),
        };
        let mut request = self.client.post(&self.config.endpoint).json(body);
        match self.config.kind {
            ProviderKind::OpenAiCompatible => {
                if let Some(key) = key {
                    request = request.bearer_auth(key);
                }
            }
            ProviderKind::AnthropicCompatible => {
                if let Some(key) = key {
                    request = request.header("x-api-key", key);
                }
                request = request.header("anthropic-version", "2023-06-01");
            }
            ProviderKind::Mock => unreachable!("mock requests never reach HTTP"),
        }
        let response = request
            .send()
            .map_err(|e| (true, format!("transport: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| (true, format!("body read: {e}")))?;
        if status.is_success() {
            serde_json::from_str(&text).map_err(|e| (false, format!("bad JSON: {e}")))
        } else {
            let transient = status.as_u16() == 429 || status.is_server_error();
            let snippet: String = text.chars().take(200).collect();
            Err((transient, format!("HTTP {status}: {snippet}")))
        }
    }
}

impl CompletionProvider for HttpProvider {
    fn name(&self) -> String {
        format!("{:?}:{}", self.config.kind, self.config.model)
    }

    fn complete(&mut self, prompt: &str) -> Result<CompletionResult> {
        let body = match self.config.kind {
            ProviderKind::OpenAiCompatible => openai_request_body(&self.config, prompt),
            ProviderKind::AnthropicCompatible => anthropic_request_body(&self.config, prompt),
            ProviderKind::Mock => unreachable!("mock requests never reach HTTP"),
        };
        let start = Instant::now();
        let mut last_error = String::new();
        for attempt in 0..=self.retry.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.retry.base_delay * 2u32.pow(attempt - 1));
            }
            match self.send_once(&body) {
                Ok(value) => {
                    let (text, prompt_tokens, completion_tokens) = match self.config.kind {
                        ProviderKind::OpenAiCompatible => parse_openai_response(&value)?,
                        ProviderKind::AnthropicCompatible => parse_anthropic_response(&value)?,
                        ProviderKind::Mock => unreachable!(),
                    };
                    if text.is_empty() {
                        return Err(Error::Provider("empty completion text".into()));
                    }
                    return Ok(CompletionResult {
                        text,
                        latency: start.elapsed().as_secs_f64(),
                        prompt_tokens,
                        completion_tokens,
                    });
                }
                Err((transient, message)) => {
                    last_error = message;
                    if !transient {
                        return Err(Error::Provider(last_error));
                    }
                }
            }
        }
        Err(Error::Provider(format!(
            "transport failure after {} attempts: {last_error}",
            self.retry.max_retries + 1
        )))
    }
}
