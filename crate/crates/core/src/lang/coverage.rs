//! Branch and line coverage over execution traces.
//!
//! Branch outcomes are counted per source-level `if`/`while` guard (two
//! outcomes each); lines are source lines containing at least one statement
//! start. Coverage is the union over all supplied traces, so adding a trace
//! never shrinks a covered set.

use crate::lang::ast::*;
use crate::lang::index::ProgramIndex;
use crate::lang::interp::{ExecutionTrace, TraceEvent};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCoverage {
    pub covered_branch_outcomes: BTreeSet<(u32, bool)>,
    pub total_branch_outcomes: usize,
    pub covered_lines: BTreeSet<u32>,
    pub total_lines: usize,
}

impl MethodCoverage {
    pub fn branch_pct(&self) -> f64 {
        pct(self.covered_branch_outcomes.len(), self.total_branch_outcomes)
    }

    pub fn line_pct(&self) -> f64 {
        pct(self.covered_lines.len(), self.total_lines)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Keyed by method id, restricted to the requested scope.
    pub methods: BTreeMap<String, MethodCoverage>,
    pub branch_pct: f64,
    pub line_pct: f64,
}

fn pct(covered: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        covered as f64 * 100.0 / total as f64
    }
}

/// Guard sites of a method body, one entry per `if`/`while` statement.
pub fn guard_sites(method: &MethodDecl) -> Vec<u32> {
    let mut sites = Vec::new();
    if let Some(body) = &method.body {
        collect_sites(body, &mut sites);
    }
    sites.sort_unstable();
    sites
}

fn collect_sites(block: &Block, out: &mut Vec<u32>) {
    for stmt in block {
        match stmt {
            Stmt::If {
                guard_site,
                then_block,
                else_block,
                ..
            } => {
                out.push(*guard_site);
                collect_sites(then_block, out);
                if let Some(els) = else_block {
                    collect_sites(els, out);
                }
            }
            Stmt::While {
                guard_site, body, ..
            } => {
                out.push(*guard_site);
                collect_sites(body, out);
            }
            _ => {}
        }
    }
}

/// Source lines holding at least one statement start.
pub fn statement_lines(method: &MethodDecl) -> BTreeSet<u32> {
    let mut lines = BTreeSet::new();
    if let Some(body) = &method.body {
        collect_lines(body, &mut lines);
    }
    lines
}

fn collect_lines(block: &Block, out: &mut BTreeSet<u32>) {
    for stmt in block {
        out.insert(stmt.span().line);
        match stmt {
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                collect_lines(then_block, out);
                if let Some(els) = else_block {
                    collect_lines(els, out);
                }
            }
            Stmt::While { body, .. } => collect_lines(body, out),
            _ => {}
        }
    }
}

/// Fold traces into a coverage report for the methods in `scope`
/// (method ids). Traces must come from the same project.
pub fn measure_coverage(
    traces: &[&ExecutionTrace],
    index: &ProgramIndex,
    scope: &BTreeSet<String>,
) -> CoverageReport {
    let mut methods: BTreeMap<String, MethodCoverage> = BTreeMap::new();
    for class_name in index.class_names() {
        let class = &index.class(class_name).unwrap().decl;
        for method in &class.methods {
            let id = method.method_ref().id();
            if !scope.contains(&id) {
                continue;
            }
            methods.insert(
                id,
                MethodCoverage {
                    covered_branch_outcomes: BTreeSet::new(),
                    total_branch_outcomes: guard_sites(method).len() * 2,
                    covered_lines: BTreeSet::new(),
                    total_lines: statement_lines(method).len(),
                },
            );
        }
    }
    for trace in traces {
        for event in &trace.events {
            match event {
                TraceEvent::Guard {
                    method,
                    guard_site,
                    outcome,
                } => {
                    if let Some(cov) = methods.get_mut(method) {
                        cov.covered_branch_outcomes.insert((*guard_site, *outcome));
                    }
                }
                TraceEvent::Stmt { method, span } => {
                    if let Some(cov) = methods.get_mut(method) {
                        cov.covered_lines.insert(span.line);
                    }
                }
                _ => {}
            }
        }
    }
    let covered_b: usize = methods.values().map(|m| m.covered_branch_outcomes.len()).sum();
    let total_b: usize = methods.values().map(|m| m.total_branch_outcomes).sum();
    let covered_l: usize = methods.values().map(|m| m.covered_lines.len()).sum();
    let total_l: usize = methods.values().map(|m| m.total_lines).sum();
    CoverageReport {
        methods,
        branch_pct: pct(covered_b, total_b),
        line_pct: pct(covered_l, total_l),
    }
}
