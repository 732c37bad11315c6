//! Focal method selection.
//!
//! The default filter keeps methods with at least one branch node whose
//! control flow also depends on data from outside the method body: a
//! dependent variable, a dependent call, or a built-in result feeding a
//! guard on some path.

use crate::harness::config::FocalFilter;
use crate::knowledge::deps::path_has_guard_builtin;
use crate::knowledge::kb::KnowledgeBase;
use crate::lang::ast::MethodRef;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SelectError {
    #[error("unknown focal method `{0}`")]
    Unknown(String),
    #[error("ambiguous focal method `{0}`: {1} signatures match")]
    Ambiguous(String, usize),
}

pub fn select_focals(
    kb: &KnowledgeBase,
    filter: &FocalFilter,
) -> Result<Vec<MethodRef>, SelectError> {
    match filter {
        FocalFilter::All => Ok(kb
            .facts
            .methods
            .iter()
            .filter(|m| !m.is_abstract)
            .map(|m| MethodRef {
                class: m.owner.clone(),
                sig: m.sig.clone(),
            })
            .collect()),
        FocalFilter::BranchingAndDependent => Ok(kb
            .facts
            .methods
            .iter()
            .filter(|m| !m.is_abstract)
            .map(|m| MethodRef {
                class: m.owner.clone(),
                sig: m.sig.clone(),
            })
            .filter(|r| is_branching_and_dependent(kb, r))
            .collect()),
        FocalFilter::Explicit { methods } => {
            let mut out = Vec::new();
            for name in methods {
                out.push(resolve_method_name(kb, name)?);
            }
            Ok(out)
        }
    }
}

fn is_branching_and_dependent(kb: &KnowledgeBase, method: &MethodRef) -> bool {
    let Ok(cfg) = kb.cfg_of(method) else {
        return false;
    };
    if cfg.branch_nodes().is_empty() {
        return false;
    }
    let Ok(set) = kb.paths_of(method) else {
        return false;
    };
    set.paths.iter().enumerate().any(|(i, path)| {
        let has_deps = kb
            .deps_of(method, i)
            .map(|d| !d.variables.is_empty() || !d.calls.is_empty())
            .unwrap_or(false);
        has_deps || path_has_guard_builtin(cfg, path)
    })
}

/// Accepts a full method id (`Class#name/(types)`) or the `Class#name`
/// shorthand when unambiguous.
pub fn resolve_method_name(kb: &KnowledgeBase, name: &str) -> Result<MethodRef, SelectError> {
    if let Some(m) = kb.facts.method(name) {
        return Ok(MethodRef {
            class: m.owner.clone(),
            sig: m.sig.clone(),
        });
    }
    let Some((class, method_name)) = name.split_once('#') else {
        return Err(SelectError::Unknown(name.to_string()));
    };
    let matches: Vec<&crate::knowledge::facts::MethodFact> = kb
        .facts
        .methods
        .iter()
        .filter(|m| m.owner == class && m.sig.name == method_name)
        .collect();
    match matches.len() {
        0 => Err(SelectError::Unknown(name.to_string())),
        1 => Ok(MethodRef {
            class: matches[0].owner.clone(),
            sig: matches[0].sig.clone(),
        }),
        n => Err(SelectError::Ambiguous(name.to_string(), n)),
    }
}
