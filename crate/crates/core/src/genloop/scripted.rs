//! Scripted backend: replays a fixed response sequence. Used to drive the
//! refinement-loop dynamics deterministically in tests and batch runs.

use crate::genloop::backend::{BackendDescriptor, BackendFailure, BackendRequest, GeneratorBackend};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    /// Responses in round order. A round beyond the end replays the last
    /// entry.
    pub responses: Vec<String>,
}

impl Script {
    pub fn from_json(text: &str) -> Result<Script, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub struct ScriptedBackend {
    script: Script,
    cursor: usize,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> ScriptedBackend {
        ScriptedBackend { script, cursor: 0 }
    }
}

impl GeneratorBackend for ScriptedBackend {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: "scripted".to_string(),
            deterministic: true,
        }
    }

    fn produce(&mut self, _request: &BackendRequest) -> Result<String, BackendFailure> {
        if self.script.responses.is_empty() {
            return Err(BackendFailure("script has no responses".to_string()));
        }
        let idx = self.cursor.min(self.script.responses.len() - 1);
        self.cursor += 1;
        Ok(self.script.responses[idx].clone())
    }
}
