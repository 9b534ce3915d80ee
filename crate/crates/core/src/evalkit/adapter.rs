use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Duration;

use base64::Engine as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::benchkit::{letter, BenchmarkManifest};
use crate::error::{Error, Result};
use crate::numeric::derive_seed;

/// What a model sees for one sample.
#[derive(Debug, Clone, Copy)]
pub struct Request<'a> {
    pub sample_id: &'a str,
    pub image_ref: &'a str,
    pub prompt: &'a str,
    pub option_count: usize,
}

pub trait ModelAdapter: Send + Sync {
    fn name(&self) -> &str;

    /// Raw reply text. Timeouts and transport problems are errors.
    fn invoke(&self, request: &Request<'_>) -> Result<String>;
}

/// Always replies with the ground-truth letter.
#[derive(Debug, Clone)]
pub struct OracleAdapter {
    answers: HashMap<String, char>,
}

impl OracleAdapter {
    pub fn new(manifest: &BenchmarkManifest) -> Self {
        OracleAdapter {
            answers: manifest
                .samples
                .iter()
                .map(|s| (s.id.clone(), s.answer_letter))
                .collect(),
        }
    }
}

impl ModelAdapter for OracleAdapter {
    fn name(&self) -> &str {
        "oracle"
    }

    fn invoke(&self, request: &Request<'_>) -> Result<String> {
        self.answers
            .get(request.sample_id)
            .map(|c| c.to_string())
            .ok_or_else(|| Error::Adapter {
                model: "oracle".into(),
                reason: format!("unknown sample {}", request.sample_id),
            })
    }
}

/// Uniform letter per sample, a pure function of the seed and sample id.
#[derive(Debug, Clone)]
pub struct UniformRandomAdapter {
    seed: u64,
}

impl UniformRandomAdapter {
    pub fn new(seed: u64) -> Self {
        UniformRandomAdapter { seed }
    }
}

fn id_tag(id: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(id.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

impl ModelAdapter for UniformRandomAdapter {
    fn name(&self) -> &str {
        "random"
    }

    fn invoke(&self, request: &Request<'_>) -> Result<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[id_tag(request.sample_id)]));
        Ok(letter(rng.gen_range(0..request.option_count)).to_string())
    }
}

/// Generic chat-completion endpoint (`POST {base_url}/chat/completions`).
#[derive(Debug, Clone)]
pub struct HttpChatAdapter {
    model: String,
    endpoint: String,
    token: Option<String>,
    image_root: Option<PathBuf>,
    client: reqwest::blocking::Client,
}

impl HttpChatAdapter {
    /// `token_env` names the environment variable holding the bearer token.
    pub fn new(
        base_url: &str,
        model: &str,
        token_env: Option<&str>,
        image_root: Option<PathBuf>,
        timeout: Duration,
    ) -> Result<Self> {
        let err = |reason: String| Error::Adapter {
            model: model.to_string(),
            reason,
        };
        let token = match token_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| err(format!("environment variable {var} is not set")))?,
            ),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| err(e.to_string()))?;
        Ok(HttpChatAdapter {
            model: model.to_string(),
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            token,
            image_root,
            client,
        })
    }

    fn error(&self, reason: impl Into<String>) -> Error {
        Error::Adapter {
            model: self.model.clone(),
            reason: reason.into(),
        }
    }

    fn image_data_url(&self, image_ref: &str) -> Result<String> {
        let path = match &self.image_root {
            Some(root) => root.join(image_ref),
            None => PathBuf::from(image_ref),
        };
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("jpg" | "jpeg") => "image/jpeg",
            Some("gif") => "image/gif",
            Some("webp") => "image/webp",
            _ => "image/png",
        };
        let encoded = base64::engine::general_purpose::STANDARD.encode(bytes);
        Ok(format!("data:{mime};base64,{encoded}"))
    }

    pub fn request_body(&self, request: &Request<'_>) -> Result<Value> {
        Ok(json!({
            "model": self.model,
            "temperature": 0,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": request.prompt},
                    {"type": "image_url", "image_url": {"url": self.image_data_url(request.image_ref)?}},
                ],
            }],
        }))
    }
}

fn first_choice_text(body: &Value) -> Option<String> {
    let content = body.get("choices")?.get(0)?.get("message")?.get("content")?;
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => Some(
            parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect::<Vec<_>>()
                .join(""),
        ),
        _ => None,
    }
}

impl ModelAdapter for HttpChatAdapter {
    fn name(&self) -> &str {
        &self.model
    }

    fn invoke(&self, request: &Request<'_>) -> Result<String> {
        let body = self.request_body(request)?;
        let mut call = self.client.post(&self.endpoint).json(&body);
        if let Some(token) = &self.token {
            call = call.bearer_auth(token);
        }
        let response = call.send().map_err(|e| self.error(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(self.error(format!("HTTP {status}")));
        }
        let reply: Value = response.json().map_err(|e| self.error(e.to_string()))?;
        first_choice_text(&reply).ok_or_else(|| self.error("response has no first choice content"))
    }
}
