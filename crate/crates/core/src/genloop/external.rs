//! External backend: one child process per request. The request JSON goes to
//! stdin, the candidate source comes back on stdout, bounded by a wall-clock
//! timeout.

use crate::genloop::backend::{BackendDescriptor, BackendFailure, BackendRequest, GeneratorBackend};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

pub const DEFAULT_TIMEOUT_SECS: u64 = 120;

pub struct ExternalBackend {
    /// Run through `sh -c`, so pipelines and arguments work as typed.
    pub command: String,
    pub timeout: Duration,
}

impl ExternalBackend {
    pub fn new(command: impl Into<String>, timeout: Duration) -> ExternalBackend {
        ExternalBackend {
            command: command.into(),
            timeout,
        }
    }
}

impl GeneratorBackend for ExternalBackend {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: format!("external({})", self.command),
            deterministic: false,
        }
    }

    fn produce(&mut self, request: &BackendRequest) -> Result<String, BackendFailure> {
        let payload = request.wire_json();
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| BackendFailure(format!("spawn failed: {e}")))?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let write_result = stdin.write_all(payload.as_bytes());
        drop(stdin);
        if let Err(e) = write_result {
            let _ = child.kill();
            let _ = child.wait();
            return Err(BackendFailure(format!("write to backend failed: {e}")));
        }

        let mut stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let result = stdout.read_to_string(&mut buf).map(|_| buf);
            let _ = tx.send(result);
        });

        let output = match rx.recv_timeout(self.timeout) {
            Ok(Ok(text)) => text,
            Ok(Err(e)) => {
                let _ = child.kill();
                let _ = child.wait();
                let _ = reader.join();
                return Err(BackendFailure(format!("read from backend failed: {e}")));
            }
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                let _ = reader.join();
                return Err(BackendFailure(format!(
                    "backend timed out after {}s",
                    self.timeout.as_secs()
                )));
            }
        };
        let _ = reader.join();
        let status = child
            .wait()
            .map_err(|e| BackendFailure(format!("wait failed: {e}")))?;
        if !status.success() {
            return Err(BackendFailure(format!(
                "backend exited with {}",
                status.code().map(|c| c.to_string()).unwrap_or_else(|| "signal".to_string())
            )));
        }
        if output.trim().is_empty() {
            return Err(BackendFailure("backend produced empty output".to_string()));
        }
        Ok(output)
    }
}
