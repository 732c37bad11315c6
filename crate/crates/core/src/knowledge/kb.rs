//! The knowledge base: type facts, CFGs, loop-once paths, call edges, and
//! per-path dependencies for a whole checked project. Immutable after build;
//! queries are total over built content and fail with `NotFound` otherwise.

use crate::knowledge::cfg::{build_cfg, Cfg, CfgBuild, NodeKind};
use crate::knowledge::deps::{collect_dependencies, PathDependencies};
use crate::knowledge::facts::{extract_type_facts, TypeFacts};
use crate::knowledge::paths::{enumerate_paths, CfgPath, PathSet, DEFAULT_PATH_CAP};
use crate::lang::ast::*;
use crate::lang::ast::Type;
use crate::lang::index::ProgramIndex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: String,
    /// CFG node id (`m:<method>/n:<k>`) for lifted calls, or the use span
    /// rendering for built-ins.
    pub call_site: String,
    /// `Class#name/(types)` for user methods, `builtin#name` for built-ins.
    pub callee: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub facts: TypeFacts,
    pub cfgs: BTreeMap<String, Cfg>,
    pub paths: BTreeMap<String, PathSet>,
    pub call_graph: Vec<CallEdge>,
    /// Keyed by method id and path index (enumeration order).
    pub deps: BTreeMap<(String, usize), PathDependencies>,
    /// Parameter (name, type) lists per method id, for predicate rendering.
    pub param_names: BTreeMap<String, Vec<(String, Type)>>,
    pub path_cap: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KbError {
    #[error("NOT_FOUND: {0}")]
    NotFound(String),
}

/// Build the knowledge base for a checked project.
pub fn build_kb(project: &[SourceUnit], index: &ProgramIndex, path_cap: usize) -> KnowledgeBase {
    let facts = extract_type_facts(project, index);
    let mut cfgs = BTreeMap::new();
    let mut paths = BTreeMap::new();
    let mut call_graph = Vec::new();
    let mut deps = BTreeMap::new();
    let mut param_names: BTreeMap<String, Vec<(String, Type)>> = BTreeMap::new();

    for method_fact in &facts.methods {
        if method_fact.is_abstract {
            continue;
        }
        let class = index.class(&method_fact.owner).expect("class exists");
        let decl = class
            .decl
            .methods
            .iter()
            .find(|m| m.signature() == method_fact.sig)
            .expect("method exists");
        let CfgBuild { cfg, builtin_uses } = build_cfg(decl, index).expect("non-abstract body");
        let method_id = method_fact.id.clone();
        param_names.insert(
            method_id.clone(),
            decl.params
                .iter()
                .map(|p| (p.name.clone(), p.ty.clone()))
                .collect(),
        );

        for node in &cfg.nodes {
            if let NodeKind::Call { info } = &node.kind {
                call_graph.push(CallEdge {
                    caller: method_id.clone(),
                    call_site: cfg.node_id_string(node.id),
                    callee: format!("{}#{}", info.callee_class, info.sig),
                });
            }
        }
        for b in &builtin_uses {
            call_graph.push(CallEdge {
                caller: method_id.clone(),
                call_site: format!("m:{}/b:{}:{}", method_id, b.span.line, b.span.col),
                callee: format!("builtin#{}", b.builtin.name()),
            });
        }

        let path_set = enumerate_paths(&cfg, path_cap);
        for (i, path) in path_set.paths.iter().enumerate() {
            deps.insert(
                (method_id.clone(), i),
                collect_dependencies(&cfg, path, &facts),
            );
        }
        paths.insert(method_id.clone(), path_set);
        cfgs.insert(method_id, cfg);
    }

    call_graph.sort();
    KnowledgeBase {
        facts,
        cfgs,
        paths,
        call_graph,
        deps,
        param_names,
        path_cap,
    }
}

pub fn default_path_cap() -> usize {
    DEFAULT_PATH_CAP
}

impl KnowledgeBase {
    pub fn method_of(&self, id: &str) -> Result<&crate::knowledge::facts::MethodFact, KbError> {
        self.facts
            .method(id)
            .ok_or_else(|| KbError::NotFound(format!("method `{id}`")))
    }

    pub fn cfg_of(&self, method: &MethodRef) -> Result<&Cfg, KbError> {
        self.cfgs
            .get(&method.id())
            .ok_or_else(|| KbError::NotFound(format!("cfg of `{method}`")))
    }

    pub fn paths_of(&self, method: &MethodRef) -> Result<&PathSet, KbError> {
        self.paths
            .get(&method.id())
            .ok_or_else(|| KbError::NotFound(format!("paths of `{method}`")))
    }

    pub fn path_of(&self, method: &MethodRef, path_index: usize) -> Result<&CfgPath, KbError> {
        let set = self.paths_of(method)?;
        set.paths.get(path_index).ok_or_else(|| {
            KbError::NotFound(format!("path {path_index} of `{method}`"))
        })
    }

    pub fn deps_of(&self, method: &MethodRef, path_index: usize) -> Result<&PathDependencies, KbError> {
        self.deps
            .get(&(method.id(), path_index))
            .ok_or_else(|| KbError::NotFound(format!("deps of `{method}` path {path_index}")))
    }

    /// Distinct callee names of a method: user methods by bare name and
    /// built-ins, in first-use order of the call graph.
    pub fn callees_of(&self, method: &MethodRef) -> Result<Vec<String>, KbError> {
        let id = method.id();
        self.method_of(&id)?;
        let mut out = Vec::new();
        for edge in self.call_graph.iter().filter(|e| e.caller == id) {
            let name = callee_display(&edge.callee);
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Methods whose bodies contain a call edge to `method` (by class and
    /// signature match or dispatchable signature).
    pub fn callers_of(&self, method: &MethodRef) -> Result<Vec<String>, KbError> {
        let id = method.id();
        self.method_of(&id)?;
        let mut out: Vec<String> = Vec::new();
        for edge in &self.call_graph {
            if self.edge_targets(&edge.callee, method) && !out.contains(&edge.caller) {
                out.push(edge.caller.clone());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Does a recorded callee signature reach `target` for some receiver?
    /// Call edges record signatures, not resolved targets; resolution
    /// happens per receiver class here.
    fn edge_targets(&self, callee: &str, target: &MethodRef) -> bool {
        if callee.starts_with("builtin#") {
            return false;
        }
        if callee == target.id() {
            return true;
        }
        let Some((class, sig)) = callee.split_once('#') else {
            return false;
        };
        if sig != target.sig.to_string() {
            return false;
        }
        // A call recorded against a superclass signature can dispatch into
        // `target` when some concrete subclass of the recorded class
        // resolves there.
        self.facts
            .classes
            .iter()
            .filter(|c| c.instantiable && self.facts.is_subclass_of(&c.name, class))
            .any(|c| {
                self.facts
                    .resolve_dispatch(&c.name, &target.sig)
                    .map(|m| m.id == target.id())
                    .unwrap_or(false)
            })
    }
}

fn callee_display(callee: &str) -> String {
    if let Some(name) = callee.strip_prefix("builtin#") {
        return name.to_string();
    }
    match callee.split_once('#') {
        Some((_, sig)) => sig.split_once('/').map(|(n, _)| n.to_string()).unwrap_or_else(|| sig.to_string()),
        None => callee.to_string(),
    }
}
