//! Distilled context assembly: the minimal per-path bundle handed to the
//! generation loop, with a canonical JSON rendering.

use crate::distill::invocation::{plan_invocation, InvocationPlan, PlanError};
use crate::distill::resolve::{resolve_invocation_group, ResolutionResult, ResolutionStatus};
use crate::distill::variables::{collect_variable_requirements, VariableRequirement};
use crate::knowledge::cfg::NodeKind;
use crate::knowledge::kb::{KbError, KnowledgeBase};
use crate::knowledge::paths::CfgPath;
use crate::lang::ast::MethodRef;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathView {
    pub index: usize,
    pub node_ids: Vec<u32>,
    pub obligations: Vec<(u32, bool)>,
}

/// Field order is the canonical JSON order used by the CLI and goldens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistilledContext {
    pub focal: String,
    pub path: PathView,
    pub invocation: InvocationPlan,
    pub variables: Vec<VariableRequirement>,
    pub resolutions: Vec<ResolutionResult>,
    pub obligations_rendered: Vec<String>,
    pub infeasible: bool,
}

impl DistilledContext {
    pub fn focal_ref(&self) -> MethodRef {
        parse_method_id(&self.focal).expect("focal id round-trips")
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("context serializes")
    }

    pub fn cfg_path(&self) -> CfgPath {
        CfgPath {
            node_ids: self.path.node_ids.clone(),
            obligations: self.path.obligations.clone(),
        }
    }
}

pub fn parse_method_id(id: &str) -> Option<MethodRef> {
    let (class, rest) = id.split_once('#')?;
    let (name, params) = rest.split_once('/')?;
    let inner = params.strip_prefix('(')?.strip_suffix(')')?;
    let params = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|s| match s {
                "int" => crate::lang::ast::Type::Int,
                "bool" => crate::lang::ast::Type::Bool,
                "char" => crate::lang::ast::Type::Char,
                "string" => crate::lang::ast::Type::Str,
                other => crate::lang::ast::Type::Class(other.to_string()),
            })
            .collect()
    };
    Some(MethodRef {
        class: class.to_string(),
        sig: crate::lang::ast::MethodSig {
            name: name.to_string(),
            params,
        },
    })
}

#[derive(Debug, thiserror::Error)]
pub enum DistillError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// Distill one (focal, path) pair. A context is infeasible when any
/// resolution is unsatisfiable: no input can drive the path.
pub fn distill(
    focal: &MethodRef,
    path_index: usize,
    kb: &KnowledgeBase,
    recursion_depth: u32,
) -> Result<DistilledContext, DistillError> {
    let plan = plan_invocation(focal, &kb.facts)?;
    let cfg = kb.cfg_of(focal)?;
    let path = kb.path_of(focal, path_index)?;
    let deps = kb.deps_of(focal, path_index)?;

    let variables = collect_variable_requirements(cfg, path, deps);

    // Group repeated invocations of the same callee: their predicates must
    // intersect to a single satisfiable constraint.
    let mut groups: Vec<(String, Vec<&crate::knowledge::deps::DependentCall>)> = Vec::new();
    for call in &deps.calls {
        let key = format!("{}#{}", call.callee_class, call.callee_sig);
        match groups.iter_mut().find(|(k, _)| k == &key) {
            Some((_, members)) => members.push(call),
            None => groups.push((key, vec![call])),
        }
    }
    let mut by_node: Vec<(u32, ResolutionResult)> = Vec::new();
    for (_, members) in &groups {
        let results = resolve_invocation_group(members, kb, recursion_depth);
        for (call, result) in members.iter().zip(results) {
            by_node.push((call.call_node, result));
        }
    }
    by_node.sort_by_key(|(node, _)| *node);
    let resolutions: Vec<ResolutionResult> = by_node.into_iter().map(|(_, r)| r).collect();

    let infeasible = resolutions
        .iter()
        .any(|r| r.status == ResolutionStatus::Unsatisfiable);

    let obligations_rendered = path
        .obligations
        .iter()
        .map(|(node, outcome)| {
            let NodeKind::Branch { info } = &cfg.node(*node).kind else {
                return format!("n{node} -> {outcome}");
            };
            format!(
                "{} -> {} (line {})",
                info.guard_text(),
                outcome,
                info.span.line
            )
        })
        .collect();

    Ok(DistilledContext {
        focal: focal.id(),
        path: PathView {
            index: path_index,
            node_ids: path.node_ids.clone(),
            obligations: path.obligations.clone(),
        },
        invocation: plan,
        variables,
        resolutions,
        obligations_rendered,
        infeasible,
    })
}
