use std::collections::HashMap;
use std::future::Future;
use std::path::PathBuf;
use std::time::Duration;

use ddr_core::filter::normalize_candidate;
use ddr_core::format::Fnv1a;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_PROMPT_TEMPLATE: &str = "List the Lean 4 Mathlib identifiers (definitions and theorems) \
needed to formalize the following statement. Answer with one fully-qualified name per line.\n\n{informal}\n";

#[derive(Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error("generator timed out")]
    Timeout,
    #[error("generator returned HTTP {0}")]
    HttpError(u16),
    #[error("generator transport error: {0}")]
    Transport(String),
    #[error("unparseable generator response: {0}")]
    UnparseableResponse(String),
    #[error("generator configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    FileStub,
    ExternalHttp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub endpoint: Option<String>,
    /// JSON object mapping statement keys to candidate arrays (stub only).
    pub mapping_path: Option<PathBuf>,
    /// Name of the environment variable holding a bearer token.
    pub api_key_env: Option<String>,
    /// Template file; `{informal}` is replaced by the statement.
    pub prompt_template_path: Option<PathBuf>,
    pub timeout: Duration,
    pub max_retries: u32,
}

impl GeneratorConfig {
    pub fn stub(mapping_path: impl Into<PathBuf>) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::FileStub,
            endpoint: None,
            mapping_path: Some(mapping_path.into()),
            api_key_env: None,
            prompt_template_path: None,
            timeout: Duration::from_secs(30),
            max_retries: 0,
        }
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        GeneratorConfig {
            kind: GeneratorKind::ExternalHttp,
            endpoint: Some(endpoint.into()),
            mapping_path: None,
            api_key_env: None,
            prompt_template_path: None,
            timeout: Duration::from_secs(30),
            max_retries: 2,
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        match self.kind {
            GeneratorKind::ExternalHttp if self.endpoint.is_none() => {
                Err(GeneratorError::Config("external_http requires an endpoint".into()))
            }
            GeneratorKind::FileStub if self.mapping_path.is_none() => {
                Err(GeneratorError::Config("file_stub requires a mapping path".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub informal: String,
    /// Statement id, used by the stub to find its mapping entry.
    #[serde(default)]
    pub id: Option<String>,
}

impl GenerationRequest {
    pub fn new(informal: impl Into<String>) -> Self {
        GenerationRequest { informal: informal.into(), id: None }
    }
}

/// Anything that proposes dependency names for a statement.
pub trait CandidateGenerator {
    fn generate(
        &self,
        request: &GenerationRequest,
    ) -> impl Future<Output = Result<Vec<String>, GeneratorError>> + Send;
}

/// Answers from a fixed mapping. Keys are tried in order: the request id,
/// the informal text itself, then the 16-digit hex FNV-1a hash of the
/// informal text.
#[derive(Debug, Clone, Default)]
pub struct StubGenerator {
    mapping: HashMap<String, Vec<String>>,
}

impl StubGenerator {
    pub fn new(mapping: HashMap<String, Vec<String>>) -> Self {
        StubGenerator { mapping }
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self, GeneratorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeneratorError::Config(format!("{}: {e}", path.display())))?;
        let mapping = serde_json::from_str(&text)
            .map_err(|e| GeneratorError::Config(format!("{}: {e}", path.display())))?;
        Ok(StubGenerator { mapping })
    }

    pub fn key_for(informal: &str) -> String {
        format!("{:016x}", Fnv1a::hash(informal.as_bytes()))
    }

    pub fn lookup(&self, request: &GenerationRequest) -> Vec<String> {
        let found = request
            .id
            .as_ref()
            .and_then(|id| self.mapping.get(id))
            .or_else(|| self.mapping.get(&request.informal))
            .or_else(|| self.mapping.get(&Self::key_for(&request.informal)));
        match found {
            Some(c) => c.clone(),
            None => {
                log::warn!("stub generator has no entry for statement {:?}", request.id);
                Vec::new()
            }
        }
    }
}

impl CandidateGenerator for StubGenerator {
    async fn generate(&self, request: &GenerationRequest) -> Result<Vec<String>, GeneratorError> {
        Ok(self.lookup(request))
    }
}

/// Posts `{"prompt": ..., "informal": ...}` to an endpoint and parses the
/// reply with [`parse_identifiers`]. Timeouts, transport failures and 5xx
/// replies are retried up to `max_retries` times; 4xx replies are not.
#[derive(Debug, Clone)]
pub struct HttpGenerator {
    client: reqwest::Client,
    endpoint: String,
    api_key: Option<String>,
    template: String,
    max_retries: u32,
}

impl HttpGenerator {
    pub fn from_config(config: &GeneratorConfig) -> Result<Self, GeneratorError> {
        config.validate()?;
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| GeneratorError::Config("missing endpoint".into()))?;
        let template = match &config.prompt_template_path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| GeneratorError::Config(format!("{}: {e}", p.display())))?,
            None => DEFAULT_PROMPT_TEMPLATE.to_owned(),
        };
        let api_key = match &config.api_key_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| GeneratorError::Config(format!("environment variable {var} is not set")))?,
            ),
            None => None,
        };
        let client = reqwest::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GeneratorError::Config(e.to_string()))?;
        Ok(HttpGenerator {
            client,
            endpoint,
            api_key,
            template,
            max_retries: config.max_retries,
        })
    }

    pub fn render_prompt(&self, informal: &str) -> String {
        self.template.replace("{informal}", informal)
    }
}

impl CandidateGenerator for HttpGenerator {
    async fn generate(&self, request: &GenerationRequest) -> Result<Vec<String>, GeneratorError> {
        let body = serde_json::json!({
            "prompt": self.render_prompt(&request.informal),
            "informal": request.informal,
        });
        let mut last = GeneratorError::Timeout;
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                log::debug!("retrying generator request ({attempt}/{})", self.max_retries);
            }
            let mut req = self.client.post(&self.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            let outcome = match req.send().await {
                Ok(resp) if resp.status().is_success() => match resp.text().await {
                    Ok(text) => return parse_identifiers(&text),
                    Err(e) if e.is_timeout() => GeneratorError::Timeout,
                    Err(e) => GeneratorError::Transport(e.to_string()),
                },
                Ok(resp) if resp.status().is_client_error() => {
                    return Err(GeneratorError::HttpError(resp.status().as_u16()))
                }
                Ok(resp) => GeneratorError::HttpError(resp.status().as_u16()),
                Err(e) if e.is_timeout() => GeneratorError::Timeout,
                Err(e) => GeneratorError::Transport(e.to_string()),
            };
            last = outcome;
        }
        Err(last)
    }
}

/// Either generator, chosen by configuration.
#[derive(Debug, Clone)]
pub enum Generator {
    Stub(StubGenerator),
    Http(HttpGenerator),
}

impl Generator {
    pub fn from_config(config: &GeneratorConfig) -> Result<Self, GeneratorError> {
        config.validate()?;
        Ok(match config.kind {
            GeneratorKind::FileStub => {
                Generator::Stub(StubGenerator::from_file(config.mapping_path.as_ref().unwrap())?)
            }
            GeneratorKind::ExternalHttp => Generator::Http(HttpGenerator::from_config(config)?),
        })
    }
}

impl CandidateGenerator for Generator {
    async fn generate(&self, request: &GenerationRequest) -> Result<Vec<String>, GeneratorError> {
        match self {
            Generator::Stub(g) => g.generate(request).await,
            Generator::Http(g) => g.generate(request).await,
        }
    }
}

fn string_array(v: &Value) -> Option<Vec<String>> {
    v.as_array()?
        .iter()
        .map(|x| x.as_str().map(str::to_owned))
        .collect()
}

/// Parses a generator reply: a JSON array of strings, a JSON object with a
/// `dependencies`/`candidates` array or a `text`/`output`/`content` string,
/// or plain text separated by newlines and commas. Backticks and whitespace
/// around each name are stripped.
pub fn parse_identifiers(body: &str) -> Result<Vec<String>, GeneratorError> {
    let t = body.trim();
    let bad = |m: String| GeneratorError::UnparseableResponse(m);
    let raw: Vec<String> = if t.starts_with('[') {
        let v: Value = serde_json::from_str(t).map_err(|e| bad(e.to_string()))?;
        string_array(&v).ok_or_else(|| bad("array holds non-string entries".into()))?
    } else if t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| bad(e.to_string()))?;
        if let Some(list) = ["dependencies", "candidates"].iter().find_map(|k| v.get(*k).and_then(string_array)) {
            list
        } else if let Some(text) = ["text", "output", "content"].iter().find_map(|k| v.get(*k).and_then(Value::as_str)) {
            return parse_identifiers(text);
        } else {
            return Err(bad("object has no dependency list or text field".into()));
        }
    } else {
        t.split(['\n', ',']).map(str::to_owned).collect()
    };
    Ok(raw.iter().filter_map(|s| normalize_candidate(s)).collect())
}
