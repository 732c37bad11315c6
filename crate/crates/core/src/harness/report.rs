//! Run reports: deterministic JSON plus a human-readable table. Wall-clock
//! timings live in a separate document so report JSON stays byte-identical
//! across runs.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StatusBreakdown {
    pub valid: usize,
    pub exhausted: usize,
    pub infeasible_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoverageNumbers {
    pub covered: usize,
    pub total: usize,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalReport {
    pub method: String,
    pub paths_found: usize,
    pub paths_truncated: bool,
    pub sessions_run: usize,
    pub generated_tests: usize,
    pub valid_tests: usize,
    pub invalid_tests: usize,
    pub status_breakdown: StatusBreakdown,
    pub branch: CoverageNumbers,
    pub line: CoverageNumbers,
}

/// Deterministic per-phase work counters (the timing breakdown that is safe
/// to persist byte-identically).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub extract_methods: usize,
    pub extract_paths: usize,
    pub distill_contexts: usize,
    pub generate_backend_calls: usize,
    pub validate_runs: usize,
    pub validate_interp_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub focals: usize,
    pub sessions_run: usize,
    pub generated_tests: usize,
    pub valid_tests: usize,
    pub valid_rate: f64,
    pub branch_pct: f64,
    pub line_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub project: String,
    pub focals: Vec<FocalReport>,
    pub totals: Totals,
    pub phase_counts: PhaseCounts,
}

/// Wall-clock milliseconds per phase; persisted separately (timing.json).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WallTimings {
    pub extract_ms: u128,
    pub distill_ms: u128,
    pub generate_ms: u128,
    pub validate_ms: u128,
    pub total_ms: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Table,
}

pub fn report_render(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        ReportFormat::Table => render_table(report),
    }
}

fn render_table(report: &RunReport) -> String {
    let mut rows: Vec<[String; 7]> = Vec::new();
    for f in &report.focals {
        rows.push([
            f.method.clone(),
            f.paths_found.to_string(),
            f.sessions_run.to_string(),
            f.valid_tests.to_string(),
            f.invalid_tests.to_string(),
            format!("{:.2}%", f.branch.pct),
            format!("{:.2}%", f.line.pct),
        ]);
    }
    let header = [
        "focal method".to_string(),
        "paths".to_string(),
        "sessions".to_string(),
        "valid".to_string(),
        "invalid".to_string(),
        "branch".to_string(),
        "line".to_string(),
    ];
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let fmt_row = |row: &[String; 7]| -> String {
        row.iter()
            .enumerate()
            .map(|(i, cell)| format!("{:<width$}", cell, width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = String::new();
    out.push_str(&fmt_row(&header));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in &rows {
        out.push_str(&fmt_row(row));
        out.push('\n');
    }
    out.push_str(&format!(
        "totals: {} focal(s), {} session(s), {} generated, {} valid (rate {:.2}), branch {:.2}%, line {:.2}%\n",
        report.totals.focals,
        report.totals.sessions_run,
        report.totals.generated_tests,
        report.totals.valid_tests,
        report.totals.valid_rate,
        report.totals.branch_pct,
        report.totals.line_pct,
    ));
    out
}

/// Round percentages to a stable printable form so report JSON is identical
/// across platforms.
pub fn stable_pct(value: f64) -> f64 {
    (value * 10_000.0).round() / 10_000.0
}

/// File-system-safe rendering of a method id.
pub fn sanitize_method_id(id: &str) -> String {
    id.chars()
        .map(|c| match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' | '_' | '-' => c,
            '#' => '.',
            _ => '_',
        })
        .collect()
}

/// Per-method coverage rows for persistence in the report.
pub type CoverageRows = BTreeMap<String, (CoverageNumbers, CoverageNumbers)>;
