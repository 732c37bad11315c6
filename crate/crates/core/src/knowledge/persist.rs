//! Knowledge-base persistence: a versioned JSON graph document.
//!
//! Top-level arrays `classes`, `methods`, `fields`, `cfg_nodes`, `cfg_edges`,
//! `call_edges`, `path_deps`, each sorted by `id`, plus `format_version`.
//! Serialization is canonical: two builds of the same project produce
//! byte-identical output.

use crate::knowledge::cfg::{Cfg, CfgEdge, CfgNode, EdgeLabel};
use crate::knowledge::deps::PathDependencies;
use crate::knowledge::facts::{ClassFact, FieldFact, MethodFact, TypeFacts};
use crate::knowledge::kb::{CallEdge, KnowledgeBase};
use crate::knowledge::paths::{CfgPath, PathSet};
use crate::lang::ast::MethodRef;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("VERSION_MISMATCH: file has format_version {found}, reader supports {supported}")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("MALFORMED_INPUT: {0}")]
    MalformedInput(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassRow {
    id: String,
    #[serde(flatten)]
    fact: ClassFact,
}

#[derive(Debug, Serialize, Deserialize)]
struct MethodRow {
    id: String,
    owner: String,
    name: String,
    param_types: Vec<String>,
    param_names: Vec<String>,
    return_type: String,
    access: String,
    is_static: bool,
    is_abstract: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct CfgNodeRow {
    id: String,
    method: String,
    node: CfgNode,
    loop_head: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct CfgEdgeRow {
    id: String,
    method: String,
    from: u32,
    to: u32,
    label: EdgeLabel,
}

#[derive(Debug, Serialize, Deserialize)]
struct CallEdgeRow {
    id: String,
    caller: String,
    call_site: String,
    callee: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathDepRow {
    id: String,
    method: String,
    path_index: usize,
    node_ids: Vec<u32>,
    obligations: Vec<(u32, bool)>,
    truncated: bool,
    deps: PathDependencies,
}

#[derive(Debug, Serialize, Deserialize)]
struct KbDocument {
    format_version: u32,
    path_cap: usize,
    classes: Vec<ClassRow>,
    methods: Vec<MethodRow>,
    fields: Vec<FieldFact>,
    cfg_nodes: Vec<CfgNodeRow>,
    cfg_edges: Vec<CfgEdgeRow>,
    call_edges: Vec<CallEdgeRow>,
    path_deps: Vec<PathDepRow>,
    /// Method entries needed to rebuild `Cfg` values losslessly.
    cfg_index: Vec<CfgMethodRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CfgMethodRow {
    id: String,
    class: String,
    name: String,
    param_types: Vec<crate::lang::ast::Type>,
    entry: u32,
    exit: u32,
}

/// Serialize the knowledge base to its canonical JSON document.
pub fn save_kb(kb: &KnowledgeBase) -> String {
    let classes = kb
        .facts
        .classes
        .iter()
        .map(|c| ClassRow {
            id: c.name.clone(),
            fact: c.clone(),
        })
        .collect::<Vec<_>>();
    let methods = kb
        .facts
        .methods
        .iter()
        .map(|m| MethodRow {
            id: m.id.clone(),
            owner: m.owner.clone(),
            name: m.sig.name.clone(),
            param_types: m.sig.params.iter().map(|t| t.to_string()).collect(),
            param_names: kb
                .param_names
                .get(&m.id)
                .map(|ps| ps.iter().map(|(n, _)| n.clone()).collect())
                .unwrap_or_default(),
            return_type: m.return_type.to_string(),
            access: m.access.to_string(),
            is_static: m.is_static,
            is_abstract: m.is_abstract,
        })
        .collect::<Vec<_>>();

    let mut cfg_nodes = Vec::new();
    let mut cfg_edges = Vec::new();
    let mut cfg_index = Vec::new();
    for (method_id, cfg) in &kb.cfgs {
        for node in &cfg.nodes {
            cfg_nodes.push(CfgNodeRow {
                id: format!("m:{method_id}/n:{}", node.id),
                method: method_id.clone(),
                node: node.clone(),
                loop_head: node.loop_head,
            });
        }
        for (i, edge) in cfg.edges.iter().enumerate() {
            cfg_edges.push(CfgEdgeRow {
                id: format!(
                    "m:{method_id}/e:{i:05}:{}->{}:{:?}",
                    edge.from, edge.to, edge.label
                ),
                method: method_id.clone(),
                from: edge.from,
                to: edge.to,
                label: edge.label,
            });
        }
        cfg_index.push(CfgMethodRow {
            id: method_id.clone(),
            class: cfg.method.class.clone(),
            name: cfg.method.sig.name.clone(),
            param_types: cfg.method.sig.params.clone(),
            entry: cfg.entry,
            exit: cfg.exit,
        });
    }

    let call_edges = kb
        .call_graph
        .iter()
        .map(|e| CallEdgeRow {
            id: format!("{}@{}->{}", e.caller, e.call_site, e.callee),
            caller: e.caller.clone(),
            call_site: e.call_site.clone(),
            callee: e.callee.clone(),
        })
        .collect::<Vec<_>>();

    let mut path_deps = Vec::new();
    for ((method_id, idx), deps) in &kb.deps {
        let set = &kb.paths[method_id];
        let path = &set.paths[*idx];
        path_deps.push(PathDepRow {
            id: format!("{method_id}/p:{idx}"),
            method: method_id.clone(),
            path_index: *idx,
            node_ids: path.node_ids.clone(),
            obligations: path.obligations.clone(),
            truncated: set.truncated,
            deps: deps.clone(),
        });
    }
    // Methods whose enumeration produced zero paths still need their
    // truncation flag persisted; represent them with a sentinel row? No:
    // every method has at least one entry-to-exit walk, so this is empty
    // only for capped methods, which keep at least path 0 as well.

    let mut doc = KbDocument {
        format_version: FORMAT_VERSION,
        path_cap: kb.path_cap,
        classes,
        methods,
        fields: kb.facts.fields.clone(),
        cfg_nodes,
        cfg_edges,
        call_edges,
        path_deps,
        cfg_index,
    };
    doc.classes.sort_by(|a, b| a.id.cmp(&b.id));
    doc.methods.sort_by(|a, b| a.id.cmp(&b.id));
    doc.fields.sort_by(|a, b| a.id.cmp(&b.id));
    doc.cfg_nodes.sort_by(|a, b| a.id.cmp(&b.id));
    doc.cfg_edges.sort_by(|a, b| a.id.cmp(&b.id));
    doc.call_edges.sort_by(|a, b| a.id.cmp(&b.id));
    doc.path_deps.sort_by(|a, b| a.id.cmp(&b.id));
    doc.cfg_index.sort_by(|a, b| a.id.cmp(&b.id));
    serde_json::to_string_pretty(&doc).expect("kb serializes")
}

/// Rebuild a knowledge base from its JSON document.
pub fn load_kb(text: &str) -> Result<KnowledgeBase, PersistError> {
    // Check the version before strict decoding so future formats fail with
    // VERSION_MISMATCH rather than MALFORMED_INPUT.
    let probe: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| PersistError::MalformedInput(e.to_string()))?;
    let found = probe
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| PersistError::MalformedInput("missing format_version".to_string()))?
        as u32;
    if found != FORMAT_VERSION {
        return Err(PersistError::VersionMismatch {
            found,
            supported: FORMAT_VERSION,
        });
    }
    let doc: KbDocument =
        serde_json::from_str(text).map_err(|e| PersistError::MalformedInput(e.to_string()))?;

    let mut param_names: BTreeMap<String, Vec<(String, crate::lang::ast::Type)>> = BTreeMap::new();
    for m in &doc.methods {
        if m.is_abstract {
            continue;
        }
        let types: Vec<crate::lang::ast::Type> = m.param_types.iter().map(|t| parse_type(t)).collect();
        if m.param_names.len() == types.len() {
            param_names.insert(
                m.id.clone(),
                m.param_names.iter().cloned().zip(types).collect(),
            );
        }
    }
    let facts = TypeFacts {
        classes: doc.classes.into_iter().map(|c| c.fact).collect(),
        methods: doc
            .methods
            .into_iter()
            .map(|m| {
                let sig = parse_sig(&m.id).ok_or_else(|| {
                    PersistError::MalformedInput(format!("bad method id `{}`", m.id))
                })?;
                Ok(MethodFact {
                    id: m.id,
                    owner: m.owner,
                    sig,
                    return_type: parse_ret(&m.return_type),
                    access: if m.access == "private" {
                        crate::lang::ast::Access::Private
                    } else {
                        crate::lang::ast::Access::Public
                    },
                    is_static: m.is_static,
                    is_abstract: m.is_abstract,
                })
            })
            .collect::<Result<Vec<_>, PersistError>>()?,
        fields: doc.fields,
    };

    let mut cfgs: BTreeMap<String, Cfg> = BTreeMap::new();
    for row in &doc.cfg_index {
        cfgs.insert(
            row.id.clone(),
            Cfg {
                method: MethodRef {
                    class: row.class.clone(),
                    sig: crate::lang::ast::MethodSig {
                        name: row.name.clone(),
                        params: row.param_types.clone(),
                    },
                },
                nodes: Vec::new(),
                edges: Vec::new(),
                entry: row.entry,
                exit: row.exit,
            },
        );
    }
    for row in doc.cfg_nodes {
        let cfg = cfgs.get_mut(&row.method).ok_or_else(|| {
            PersistError::MalformedInput(format!("node for unknown method `{}`", row.method))
        })?;
        cfg.nodes.push(row.node);
    }
    for row in doc.cfg_edges {
        let cfg = cfgs.get_mut(&row.method).ok_or_else(|| {
            PersistError::MalformedInput(format!("edge for unknown method `{}`", row.method))
        })?;
        cfg.edges.push(CfgEdge {
            from: row.from,
            to: row.to,
            label: row.label,
        });
    }
    for cfg in cfgs.values_mut() {
        cfg.nodes.sort_by_key(|n| n.id);
    }

    let mut paths: BTreeMap<String, PathSet> = BTreeMap::new();
    let mut deps = BTreeMap::new();
    let mut rows = doc.path_deps;
    rows.sort_by_key(|r| (r.method.clone(), r.path_index));
    for row in rows {
        let set = paths.entry(row.method.clone()).or_insert_with(|| PathSet {
            paths: Vec::new(),
            truncated: false,
        });
        if set.paths.len() != row.path_index {
            return Err(PersistError::MalformedInput(format!(
                "non-contiguous path indices for `{}`",
                row.method
            )));
        }
        set.paths.push(CfgPath {
            node_ids: row.node_ids,
            obligations: row.obligations,
        });
        set.truncated = row.truncated;
        deps.insert((row.method, row.path_index), row.deps);
    }
    // Methods with a CFG but no recorded paths get an empty set (possible
    // only for degenerate cap = 0 builds).
    for id in cfgs.keys() {
        paths.entry(id.clone()).or_insert_with(|| PathSet {
            paths: Vec::new(),
            truncated: false,
        });
    }

    let call_graph = doc
        .call_edges
        .into_iter()
        .map(|e| CallEdge {
            caller: e.caller,
            call_site: e.call_site,
            callee: e.callee,
        })
        .collect();

    Ok(KnowledgeBase {
        facts,
        cfgs,
        paths,
        call_graph,
        deps,
        param_names,
        path_cap: doc.path_cap,
    })
}

fn parse_sig(id: &str) -> Option<crate::lang::ast::MethodSig> {
    let (_, rest) = id.split_once('#')?;
    let (name, params) = rest.split_once('/')?;
    let inner = params.strip_prefix('(')?.strip_suffix(')')?;
    let params = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(parse_type).collect()
    };
    Some(crate::lang::ast::MethodSig {
        name: name.to_string(),
        params,
    })
}

fn parse_type(s: &str) -> crate::lang::ast::Type {
    use crate::lang::ast::Type;
    match s {
        "int" => Type::Int,
        "bool" => Type::Bool,
        "char" => Type::Char,
        "string" => Type::Str,
        other => Type::Class(other.to_string()),
    }
}

fn parse_ret(s: &str) -> crate::lang::ast::RetType {
    use crate::lang::ast::RetType;
    if s == "void" {
        RetType::Void
    } else {
        RetType::Value(parse_type(s))
    }
}
