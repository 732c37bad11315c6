//! Loop-once path enumeration.
//!
//! Depth-first walks from entry to exit, true edge before false edge. No
//! node is recorded twice on a single path: when a walk reaches a node
//! already on the path (a loop back edge), the revisit is skipped and the
//! walk continues through that node's other out-edges, recording only the
//! branch decision. A loop body therefore contributes at most its first
//! iteration to any path, while the loop-exit decision still appears in the
//! obligations.

use crate::knowledge::cfg::{Cfg, EdgeLabel, NodeKind};
use serde::{Deserialize, Serialize};

/// One branch decision along a path: branch node id and the outcome taken.
pub type Obligation = (u32, bool);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfgPath {
    pub node_ids: Vec<u32>,
    pub obligations: Vec<Obligation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<CfgPath>,
    /// Set when enumeration stopped at the configured cap.
    pub truncated: bool,
}

pub const DEFAULT_PATH_CAP: usize = 256;

pub fn enumerate_paths(cfg: &Cfg, cap: usize) -> PathSet {
    let mut state = Walk {
        cfg,
        cap,
        visited: vec![false; cfg.nodes.len()],
        nodes: Vec::new(),
        obligations: Vec::new(),
        paths: Vec::new(),
        truncated: false,
    };
    state.visited[cfg.entry as usize] = true;
    state.nodes.push(cfg.entry);
    state.walk(cfg.entry);
    PathSet {
        paths: state.paths,
        truncated: state.truncated,
    }
}

struct Walk<'a> {
    cfg: &'a Cfg,
    cap: usize,
    visited: Vec<bool>,
    nodes: Vec<u32>,
    obligations: Vec<Obligation>,
    paths: Vec<CfgPath>,
    truncated: bool,
}

impl<'a> Walk<'a> {
    fn walk(&mut self, node: u32) {
        if self.truncated {
            return;
        }
        if node == self.cfg.exit {
            if self.paths.len() == self.cap {
                self.truncated = true;
                return;
            }
            self.paths.push(CfgPath {
                node_ids: self.nodes.clone(),
                obligations: self.obligations.clone(),
            });
            return;
        }
        let succ: Vec<(u32, EdgeLabel)> = self
            .cfg
            .succ(node)
            .into_iter()
            .map(|e| (e.to, e.label))
            .collect();
        for (to, label) in succ {
            let mut skip = Vec::new();
            self.extend(node, to, label, &mut skip);
        }
    }

    fn extend(&mut self, from: u32, to: u32, label: EdgeLabel, skip: &mut Vec<u32>) {
        if self.truncated {
            return;
        }
        let is_branch = matches!(
            self.cfg.node(from).kind,
            NodeKind::Branch { .. }
        );
        if is_branch {
            let outcome = match label {
                EdgeLabel::True => true,
                EdgeLabel::False => false,
                EdgeLabel::Seq => true,
            };
            self.obligations.push((from, outcome));
        }
        if !self.visited[to as usize] {
            self.visited[to as usize] = true;
            self.nodes.push(to);
            self.walk(to);
            self.nodes.pop();
            self.visited[to as usize] = false;
        } else if !skip.contains(&to) {
            // Revisit: pass through without recording the node, taking any
            // onward edge. The skip set keeps pass-through chains acyclic.
            skip.push(to);
            let succ: Vec<(u32, EdgeLabel)> = self
                .cfg
                .succ(to)
                .into_iter()
                .map(|e| (e.to, e.label))
                .collect();
            for (next, next_label) in succ {
                self.extend(to, next, next_label, skip);
            }
            skip.pop();
        }
        if is_branch {
            self.obligations.pop();
        }
    }
}
