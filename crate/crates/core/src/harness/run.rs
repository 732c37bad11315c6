//! End-to-end orchestration: load and check a project, build the knowledge
//! base once, distill every (focal, path) pair, fan sessions out over the
//! configured backend, measure coverage over the valid traces, and write all
//! artifacts to the output directory.

use crate::diag::Diagnostic;
use crate::distill::context::{distill, DistilledContext};
use crate::genloop::brute::{BruteForce, BruteForceBackend};
use crate::genloop::domains::ValueDomains;
use crate::genloop::external::ExternalBackend;
use crate::genloop::scripted::{Script, ScriptedBackend};
use crate::genloop::session::{run_session, RefinementSession, SessionConfig, SessionStatus};
use crate::genloop::validate::TEST_CLASS;
use crate::genloop::GeneratorBackend;
use crate::harness::config::{BackendChoice, RunConfig};
use crate::harness::report::{
    sanitize_method_id, stable_pct, CoverageNumbers, FocalReport, PhaseCounts, RunReport,
    StatusBreakdown, Totals, WallTimings, REPORT_FORMAT_VERSION,
};
use crate::harness::select::select_focals;
use crate::knowledge::kb::build_kb;
use crate::knowledge::persist::save_kb;
use crate::lang::ast::{MethodRef, SourceUnit};
use crate::lang::checker::check;
use crate::lang::coverage::measure_coverage;
use crate::lang::index::ProgramIndex;
use crate::lang::interp::Limits;
use crate::lang::parser::parse;
use crate::lang::pretty::pretty_method;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("project does not compile:\n{}", render_diags(.0))]
    Compile(Vec<Diagnostic>),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn render_diags(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

pub struct RunArtifacts {
    pub report: RunReport,
    pub timings: WallTimings,
    pub sessions: Vec<RefinementSession>,
    pub kb_json: String,
}

/// Load and check every `.sj` file under a directory, sorted by file name.
pub fn load_project(dir: &Path) -> Result<Vec<SourceUnit>, RunError> {
    let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "sj").unwrap_or(false))
        .collect();
    files.sort();
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for file in files {
        let text = std::fs::read_to_string(&file)?;
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| file.display().to_string());
        match parse(&text, &name) {
            Ok(unit) => units.push(unit),
            Err(mut errs) => diags.append(&mut errs),
        }
    }
    if !diags.is_empty() {
        return Err(RunError::Compile(diags));
    }
    Ok(units)
}

pub fn run(config: &RunConfig) -> Result<RunArtifacts, RunError> {
    let total_started = Instant::now();

    // Extraction phase: parse, check, knowledge base.
    let extract_started = Instant::now();
    let units = load_project(&config.project_dir)?;
    let diags = check(&units);
    if !diags.is_empty() {
        return Err(RunError::Compile(diags));
    }
    if units
        .iter()
        .flat_map(|u| &u.classes)
        .any(|c| c.name == TEST_CLASS)
    {
        return Err(RunError::Config(format!(
            "project may not declare a class named `{TEST_CLASS}`; it is reserved for tests"
        )));
    }
    let (index, _) = ProgramIndex::build(&units);
    let kb = build_kb(&units, &index, config.path_cap);
    let domains = config
        .domains
        .clone()
        .unwrap_or_else(|| ValueDomains::for_project(&units));
    let focals =
        select_focals(&kb, &config.focal_filter).map_err(|e| RunError::Config(e.to_string()))?;
    let extract_ms = extract_started.elapsed().as_millis();

    // Distillation phase.
    let distill_started = Instant::now();
    let mut jobs: Vec<(MethodRef, usize, Option<DistilledContext>)> = Vec::new();
    for focal in &focals {
        let Ok(set) = kb.paths_of(focal) else {
            continue;
        };
        for path_index in 0..set.paths.len() {
            let ctx = distill(focal, path_index, &kb, config.recursion_depth).ok();
            jobs.push((focal.clone(), path_index, ctx));
        }
    }
    let distill_ms = distill_started.elapsed().as_millis();

    // Generation and validation phase: independent sessions, fanned out.
    let script = match &config.backend {
        BackendChoice::Scripted { file } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| RunError::Config(format!("cannot read script: {e}")))?;
            Some(
                Script::from_json(&text)
                    .map_err(|e| RunError::Config(format!("bad script: {e}")))?,
            )
        }
        _ => None,
    };
    let session_config = SessionConfig {
        max_rounds: config.max_rounds,
        limits: Limits {
            max_steps: config.step_budget,
        },
    };

    let run_one = |(focal, path_index, ctx): &(MethodRef, usize, Option<DistilledContext>)| {
        let Some(ctx) = ctx else {
            // Planning failed (e.g. no concrete receiver): record as a
            // skipped session with no rounds.
            return RefinementSession {
                focal: focal.id(),
                path_index: *path_index,
                context: empty_context(focal, *path_index),
                prompt: None,
                rounds: Vec::new(),
                status: SessionStatus::InfeasibleSkipped,
                generate_nanos: 0,
                validate_nanos: 0,
            };
        };
        let decl = index
            .class(&focal.class)
            .and_then(|c| {
                c.decl
                    .methods
                    .iter()
                    .find(|m| m.signature() == focal.sig)
                    .cloned()
            })
            .expect("focal declaration exists");
        let source = pretty_method(&decl);
        let mut backend: Box<dyn GeneratorBackend> = match &config.backend {
            BackendChoice::BruteForce => Box::new(BruteForceBackend {
                inner: BruteForce {
                    project: &units,
                    index: &index,
                    kb: &kb,
                    domains: &domains,
                    limits: session_config.limits,
                },
            }),
            BackendChoice::Scripted { .. } => {
                Box::new(ScriptedBackend::new(script.clone().expect("script loaded")))
            }
            BackendChoice::External {
                command,
                timeout_secs,
            } => Box::new(ExternalBackend::new(
                command.clone(),
                std::time::Duration::from_secs(*timeout_secs),
            )),
        };
        run_session(
            ctx,
            &source,
            &units,
            &index,
            backend.as_mut(),
            &session_config,
        )
    };

    let generate_started = Instant::now();
    let sessions: Vec<RefinementSession> = if config.parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| RunError::Config(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_one).collect())
    } else {
        jobs.iter().map(run_one).collect()
    };
    let generate_validate_ms = generate_started.elapsed().as_millis();
    let validate_ms: u128 = sessions.iter().map(|s| s.validate_nanos).sum::<u128>() / 1_000_000;
    let generate_ms = generate_validate_ms.saturating_sub(validate_ms);

    // Coverage over valid traces only.
    let scope: BTreeSet<String> = if config.coverage_scope_all {
        kb.facts
            .methods
            .iter()
            .filter(|m| !m.is_abstract)
            .map(|m| m.id.clone())
            .collect()
    } else {
        focals.iter().map(|f| f.id()).collect()
    };
    let valid_traces: Vec<&crate::lang::interp::ExecutionTrace> =
        sessions.iter().filter_map(|s| s.valid_trace()).collect();
    let coverage = measure_coverage(&valid_traces, &index, &scope);

    // Assemble the report, sorted by focal id.
    let mut focal_reports = Vec::new();
    let mut sorted_focals: Vec<&MethodRef> = focals.iter().collect();
    sorted_focals.sort_by_key(|f| f.id());
    for focal in sorted_focals {
        let id = focal.id();
        let my_sessions: Vec<&RefinementSession> =
            sessions.iter().filter(|s| s.focal == id).collect();
        let generated: usize = my_sessions
            .iter()
            .flat_map(|s| &s.rounds)
            .filter(|r| r.candidate.is_some())
            .count();
        let valid = my_sessions
            .iter()
            .filter(|s| s.status == SessionStatus::Valid)
            .count();
        let breakdown = StatusBreakdown {
            valid,
            exhausted: my_sessions
                .iter()
                .filter(|s| s.status == SessionStatus::Exhausted)
                .count(),
            infeasible_skipped: my_sessions
                .iter()
                .filter(|s| s.status == SessionStatus::InfeasibleSkipped)
                .count(),
        };
        let (branch, line) = match coverage.methods.get(&id) {
            Some(cov) => (
                CoverageNumbers {
                    covered: cov.covered_branch_outcomes.len(),
                    total: cov.total_branch_outcomes,
                    pct: stable_pct(cov.branch_pct()),
                },
                CoverageNumbers {
                    covered: cov.covered_lines.len(),
                    total: cov.total_lines,
                    pct: stable_pct(cov.line_pct()),
                },
            ),
            None => (CoverageNumbers::default(), CoverageNumbers::default()),
        };
        let (paths_found, truncated) = kb
            .paths_of(focal)
            .map(|s| (s.paths.len(), s.truncated))
            .unwrap_or((0, false));
        focal_reports.push(FocalReport {
            method: id,
            paths_found,
            paths_truncated: truncated,
            sessions_run: my_sessions.len(),
            generated_tests: generated,
            valid_tests: valid,
            invalid_tests: generated.saturating_sub(valid),
            status_breakdown: breakdown,
            branch,
            line,
        });
    }

    let total_generated: usize = focal_reports.iter().map(|f| f.generated_tests).sum();
    let total_valid: usize = focal_reports.iter().map(|f| f.valid_tests).sum();
    let report = RunReport {
        format_version: REPORT_FORMAT_VERSION,
        project: config.project_dir.display().to_string(),
        totals: Totals {
            focals: focal_reports.len(),
            sessions_run: sessions.len(),
            generated_tests: total_generated,
            valid_tests: total_valid,
            valid_rate: if total_generated == 0 {
                0.0
            } else {
                stable_pct(total_valid as f64 / total_generated as f64)
            },
            branch_pct: stable_pct(coverage.branch_pct),
            line_pct: stable_pct(coverage.line_pct),
        },
        phase_counts: PhaseCounts {
            extract_methods: kb.cfgs.len(),
            extract_paths: kb.paths.values().map(|s| s.paths.len()).sum(),
            distill_contexts: jobs.iter().filter(|(_, _, c)| c.is_some()).count(),
            generate_backend_calls: sessions.iter().map(|s| s.rounds.len()).sum(),
            validate_runs: sessions
                .iter()
                .flat_map(|s| &s.rounds)
                .filter(|r| r.candidate.is_some())
                .count(),
            validate_interp_steps: sessions
                .iter()
                .flat_map(|s| &s.rounds)
                .filter_map(|r| match &r.outcome {
                    crate::genloop::session::RoundOutcome::Outcome(o) => match o {
                        crate::genloop::validate::ValidationOutcome::Valid(t)
                        | crate::genloop::validate::ValidationOutcome::ExceptionBeforeFocal(t) => {
                            Some(t.steps)
                        }
                        _ => None,
                    },
                    _ => None,
                })
                .sum(),
        },
        focals: focal_reports,
    };

    let kb_json = save_kb(&kb);
    let timings = WallTimings {
        extract_ms,
        distill_ms,
        generate_ms,
        validate_ms,
        total_ms: total_started.elapsed().as_millis(),
    };

    write_artifacts(config, &report, &timings, &sessions, &kb_json)?;

    Ok(RunArtifacts {
        report,
        timings,
        sessions,
        kb_json,
    })
}

fn empty_context(focal: &MethodRef, path_index: usize) -> DistilledContext {
    DistilledContext {
        focal: focal.id(),
        path: crate::distill::context::PathView {
            index: path_index,
            node_ids: Vec::new(),
            obligations: Vec::new(),
        },
        invocation: crate::distill::invocation::InvocationPlan {
            kind: crate::distill::invocation::InvocationKind::Constructor,
            receiver_recipe: crate::distill::invocation::ReceiverRecipe::None,
            dispatch_target: focal.clone(),
            needs_reflection: false,
        },
        variables: Vec::new(),
        resolutions: Vec::new(),
        obligations_rendered: Vec::new(),
        infeasible: true,
    }
}

fn write_artifacts(
    config: &RunConfig,
    report: &RunReport,
    timings: &WallTimings,
    sessions: &[RefinementSession],
    kb_json: &str,
) -> Result<(), RunError> {
    let out = &config.output_dir;
    std::fs::create_dir_all(out.join("tests"))?;
    std::fs::create_dir_all(out.join("prompts"))?;
    std::fs::write(
        out.join("report.json"),
        crate::harness::report::report_render(report, crate::harness::report::ReportFormat::Json),
    )?;
    std::fs::write(
        out.join("timing.json"),
        serde_json::to_string_pretty(timings).expect("timings serialize"),
    )?;
    std::fs::write(out.join("kb.json"), kb_json)?;
    for session in sessions {
        let stem = format!(
            "{}__p{}",
            sanitize_method_id(&session.focal),
            session.path_index
        );
        if let Some(prompt) = &session.prompt {
            std::fs::write(
                out.join("prompts").join(format!("{stem}.txt")),
                prompt.render_text(),
            )?;
        }
        if let Some(source) = session.valid_candidate() {
            std::fs::write(out.join("tests").join(format!("{stem}.sj")), source)?;
        }
    }
    Ok(())
}
