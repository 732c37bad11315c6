//! The bounded generate–validate–repair loop.

use crate::distill::context::DistilledContext;
use crate::genloop::backend::{
    BackendRequest, FailureInfo, GeneratorBackend, RepairRequest,
};
use crate::genloop::prompt::{build_prompt, PromptDocument};
use crate::genloop::validate::{validate, ValidationOutcome};
use crate::lang::ast::SourceUnit;
use crate::lang::index::ProgramIndex;
use crate::lang::interp::{Limits, TraceEvent};
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_ROUNDS: u32 = 5;

/// Trace events included ahead of the exception in a runtime repair request.
const REPAIR_TRACE_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub max_rounds: u32,
    pub limits: Limits,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            max_rounds: DEFAULT_MAX_ROUNDS,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RoundOutcome {
    BackendFailure(String),
    Outcome(ValidationOutcome),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub candidate: Option<String>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionStatus {
    #[serde(rename = "valid")]
    Valid,
    #[serde(rename = "exhausted")]
    Exhausted,
    #[serde(rename = "infeasible-skipped")]
    InfeasibleSkipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSession {
    pub focal: String,
    pub path_index: usize,
    pub context: DistilledContext,
    pub prompt: Option<PromptDocument>,
    pub rounds: Vec<Round>,
    pub status: SessionStatus,
    /// Wall-clock phase attribution, excluded from persisted artifacts.
    #[serde(skip)]
    pub generate_nanos: u128,
    #[serde(skip)]
    pub validate_nanos: u128,
}

impl RefinementSession {
    pub fn valid_trace(&self) -> Option<&crate::lang::interp::ExecutionTrace> {
        self.rounds.iter().rev().find_map(|r| match &r.outcome {
            RoundOutcome::Outcome(ValidationOutcome::Valid(trace)) => Some(trace),
            _ => None,
        })
    }

    pub fn valid_candidate(&self) -> Option<&str> {
        self.rounds.iter().rev().find_map(|r| match &r.outcome {
            RoundOutcome::Outcome(ValidationOutcome::Valid(_)) => r.candidate.as_deref(),
            _ => None,
        })
    }
}

/// Run one session: prompt, produce, validate, and repair until the
/// candidate is valid or the round budget is spent. Backend failures consume
/// a round. Infeasible contexts are skipped without calling the backend.
pub fn run_session(
    context: &DistilledContext,
    focal_source: &str,
    project: &[SourceUnit],
    index: &ProgramIndex,
    backend: &mut dyn GeneratorBackend,
    config: &SessionConfig,
) -> RefinementSession {
    let focal = context.focal_ref();
    let mut session = RefinementSession {
        focal: context.focal.clone(),
        path_index: context.path.index,
        context: context.clone(),
        prompt: None,
        rounds: Vec::new(),
        status: SessionStatus::Exhausted,
        generate_nanos: 0,
        validate_nanos: 0,
    };

    let prompt = match build_prompt(context, focal_source) {
        Ok(p) => p,
        Err(_) => {
            session.status = SessionStatus::InfeasibleSkipped;
            return session;
        }
    };
    session.prompt = Some(prompt.clone());

    let mut last_failure: Option<(String, FailureInfo)> = None;
    for _round in 0..config.max_rounds {
        let request = match &last_failure {
            None => BackendRequest::Generate(prompt.clone()),
            Some((prior, failure)) => BackendRequest::Repair(RepairRequest {
                prior_candidate: prior.clone(),
                failure: failure.clone(),
                prompt: prompt.clone(),
            }),
        };
        let produce_started = std::time::Instant::now();
        let produced = backend.produce(&request);
        session.generate_nanos += produce_started.elapsed().as_nanos();
        match produced {
            Err(failure) => {
                session.rounds.push(Round {
                    candidate: None,
                    outcome: RoundOutcome::BackendFailure(failure.0),
                });
                // Nothing new to repair; the next round regenerates or
                // retries the previous repair request.
            }
            Ok(candidate) => {
                let validate_started = std::time::Instant::now();
                let outcome = validate(&candidate, project, index, &focal, config.limits);
                session.validate_nanos += validate_started.elapsed().as_nanos();
                let valid = outcome.is_valid();
                if !valid {
                    last_failure = Some((candidate.clone(), failure_info(&outcome)));
                }
                session.rounds.push(Round {
                    candidate: Some(candidate),
                    outcome: RoundOutcome::Outcome(outcome),
                });
                if valid {
                    session.status = SessionStatus::Valid;
                    return session;
                }
            }
        }
    }
    session
}

fn failure_info(outcome: &ValidationOutcome) -> FailureInfo {
    match outcome {
        ValidationOutcome::CompileError(diags) => FailureInfo::Compile {
            diagnostics: diags.clone(),
        },
        ValidationOutcome::ExceptionBeforeFocal(trace) => {
            let position = trace
                .events
                .iter()
                .position(|e| matches!(e, TraceEvent::Exception { .. }));
            let (kind, message, span) = trace
                .exception()
                .map(|(span, kind, message)| {
                    (kind.to_string(), message.to_string(), *span)
                })
                .unwrap_or_else(|| {
                    (
                        "FOCAL_NOT_REACHED".to_string(),
                        "execution finished without entering the focal method".to_string(),
                        crate::span::Span::synthetic(),
                    )
                });
            let preceding = match position {
                Some(pos) => trace.events[pos.saturating_sub(REPAIR_TRACE_WINDOW)..pos]
                    .iter()
                    .map(render_event)
                    .collect(),
                None => Vec::new(),
            };
            FailureInfo::Runtime {
                kind,
                message,
                span,
                preceding_events: preceding,
            }
        }
        ValidationOutcome::Valid(_) => unreachable!("valid outcomes are not repaired"),
    }
}

fn render_event(event: &TraceEvent) -> String {
    match event {
        TraceEvent::Stmt { method, span } => format!("stmt {method} @ {span}"),
        TraceEvent::Branch {
            method,
            guard_site,
            atom,
            outcome,
        } => format!("branch {method} g{guard_site}a{atom} -> {outcome}"),
        TraceEvent::Guard {
            method,
            guard_site,
            outcome,
        } => format!("guard {method} g{guard_site} -> {outcome}"),
        TraceEvent::MethodEnter { method } => format!("enter {method}"),
        TraceEvent::Exception { span, kind, message } => {
            format!("exception {kind} @ {span}: {message}")
        }
    }
}
