//! Generator backends and the request wire format.

use crate::diag::Diagnostic;
use crate::genloop::prompt::PromptDocument;
use crate::span::Span;
use serde::{Deserialize, Serialize};

pub const WIRE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub name: String,
    pub deterministic: bool,
}

/// Failure details fed back for repair, tagged by stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage")]
pub enum FailureInfo {
    #[serde(rename = "syntax")]
    Compile { diagnostics: Vec<Diagnostic> },
    #[serde(rename = "runtime")]
    Runtime {
        kind: String,
        message: String,
        span: Span,
        /// The five trace events preceding the exception, rendered.
        preceding_events: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairRequest {
    pub prior_candidate: String,
    pub failure: FailureInfo,
    pub prompt: PromptDocument,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendRequest {
    Generate(PromptDocument),
    Repair(RepairRequest),
}

impl BackendRequest {
    /// The process-boundary JSON: `{"kind", "prompt", "prior_candidate"?,
    /// "failure"?, "format_version"}`.
    pub fn wire_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            kind: &'static str,
            prompt: &'a PromptDocument,
            #[serde(skip_serializing_if = "Option::is_none")]
            prior_candidate: Option<&'a str>,
            #[serde(skip_serializing_if = "Option::is_none")]
            failure: Option<&'a FailureInfo>,
            format_version: u32,
        }
        let wire = match self {
            BackendRequest::Generate(prompt) => Wire {
                kind: "generate",
                prompt,
                prior_candidate: None,
                failure: None,
                format_version: WIRE_FORMAT_VERSION,
            },
            BackendRequest::Repair(repair) => Wire {
                kind: "repair",
                prompt: &repair.prompt,
                prior_candidate: Some(&repair.prior_candidate),
                failure: Some(&repair.failure),
                format_version: WIRE_FORMAT_VERSION,
            },
        };
        serde_json::to_string(&wire).expect("request serializes")
    }

    pub fn prompt(&self) -> &PromptDocument {
        match self {
            BackendRequest::Generate(p) => p,
            BackendRequest::Repair(r) => &r.prompt,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("BACKEND_FAILURE: {0}")]
pub struct BackendFailure(pub String);

/// A source of candidate tests. Implementations own any per-session state;
/// sessions construct one backend each, so concurrent sessions never share.
pub trait GeneratorBackend {
    fn descriptor(&self) -> BackendDescriptor;
    fn produce(&mut self, request: &BackendRequest) -> Result<String, BackendFailure>;
}
