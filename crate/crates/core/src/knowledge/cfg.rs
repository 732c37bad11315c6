//! Per-method control-flow graphs.
//!
//! Structured translation of a method body: `if`/`while` guards are
//! decomposed so every short-circuit operand becomes its own branch node,
//! and every user method call is lifted into a dedicated call node whose
//! result is a synthetic `$tN` temporary. Node ids are assigned in a stable
//! preorder, so two builds of the same method are identical.
//!
//! Field reads are normalized while the builder still knows local types:
//! a bare read of an own static field becomes `Owner.field`, an own instance
//! field becomes `$this.field`. Downstream analyses can then distinguish
//! parameters, locals, temporaries, and fields purely syntactically.

use crate::lang::ast::*;
use crate::lang::index::ProgramIndex;
use crate::span::Span;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SYNTHETIC_THIS: &str = "$this";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeLabel {
    Seq,
    True,
    False,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfgEdge {
    pub from: u32,
    pub to: u32,
    pub label: EdgeLabel,
}

/// How a lifted call site addresses its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CallDispatch {
    /// `Class.m(...)` or a bare call to an own static method.
    Static,
    /// Instance call; dispatch happens on the runtime receiver.
    Virtual,
    /// `reflect call`, targeting a declared method on a named class.
    Reflective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallInfo {
    /// Statically known target class: the declaring class for static and
    /// reflective calls, the receiver's static type for virtual calls.
    pub callee_class: String,
    pub sig: MethodSig,
    pub dispatch: CallDispatch,
    /// Synthetic temporary holding the result, absent for void callees.
    pub result: Option<String>,
    pub result_type: Option<Type>,
    /// Rewritten argument expressions (calls already lifted out).
    pub args: Vec<Expr>,
    pub field_reads: Vec<FieldRef>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchInfo {
    pub guard_site: u32,
    pub atom: u32,
    /// The atom is evaluated and then negated (from `!` in the source).
    pub negated: bool,
    /// Rewritten atom expression, negation not applied.
    pub expr: Expr,
    pub field_reads: Vec<FieldRef>,
    pub temp_reads: Vec<String>,
    pub span: Span,
}

impl BranchInfo {
    /// Canonical text of the branch condition as taken on the true edge.
    pub fn guard_text(&self) -> String {
        let inner = crate::lang::pretty::expr_text(&self.expr);
        if self.negated {
            format!("!({inner})")
        } else {
            inner
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtOp {
    /// Declaration of or assignment to a local, parameter, or temporary.
    Define {
        name: String,
        value: Option<Expr>,
        field_reads: Vec<FieldRef>,
        temp_reads: Vec<String>,
    },
    /// Assignment into a field (including `reflect set`).
    StoreField {
        field: FieldRef,
        is_static: bool,
        value: Expr,
    },
    Return {
        value: Option<Expr>,
    },
    /// Residual expression statement (value discarded).
    Effect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Entry,
    Exit,
    Statement { span: Span, op: StmtOp },
    Call { info: CallInfo },
    Branch { info: BranchInfo },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfgNode {
    pub id: u32,
    pub kind: NodeKind,
    pub loop_head: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cfg {
    pub method: MethodRef,
    pub nodes: Vec<CfgNode>,
    pub edges: Vec<CfgEdge>,
    pub entry: u32,
    pub exit: u32,
}

impl Cfg {
    pub fn node(&self, id: u32) -> &CfgNode {
        &self.nodes[id as usize]
    }

    pub fn succ(&self, id: u32) -> Vec<&CfgEdge> {
        let mut out: Vec<&CfgEdge> = self.edges.iter().filter(|e| e.from == id).collect();
        out.sort_by_key(|e| match e.label {
            EdgeLabel::True => 0,
            EdgeLabel::False => 1,
            EdgeLabel::Seq => 2,
        });
        out
    }

    pub fn branch_nodes(&self) -> Vec<&CfgNode> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Branch { .. }))
            .collect()
    }

    pub fn node_id_string(&self, id: u32) -> String {
        format!("m:{}/n:{id}", self.method.id())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CfgError {
    #[error("ABSTRACT_METHOD: `{0}` has no body")]
    AbstractMethod(String),
}

/// Builtin uses discovered while building; recorded as call-graph edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BuiltinUse {
    pub builtin: Builtin,
    pub span: Span,
    /// Set when the use occurs inside a guard atom.
    pub in_guard: bool,
}

pub struct CfgBuild {
    pub cfg: Cfg,
    pub builtin_uses: Vec<BuiltinUse>,
}

pub fn build_cfg(method: &MethodDecl, index: &ProgramIndex) -> Result<CfgBuild, CfgError> {
    let body = method
        .body
        .as_ref()
        .ok_or_else(|| CfgError::AbstractMethod(method.method_ref().id()))?;
    let mut b = Builder {
        index,
        owner: method.owner.clone(),
        nodes: Vec::new(),
        edges: Vec::new(),
        return_nodes: Vec::new(),
        temp_count: 0,
        env: vec![BTreeMap::new()],
        builtin_uses: Vec::new(),
        in_guard: false,
    };
    for p in &method.params {
        b.env
            .last_mut()
            .unwrap()
            .insert(p.name.clone(), p.ty.clone());
    }
    let entry = b.push(NodeKind::Entry, false);
    let (block_entry, dangling) = b.block(body);
    if let Some(first) = block_entry {
        b.edge(entry, first, EdgeLabel::Seq);
    }
    let exit = b.push(NodeKind::Exit, false);
    if block_entry.is_none() {
        b.edge(entry, exit, EdgeLabel::Seq);
    }
    for (from, label) in dangling {
        b.edge(from, exit, label);
    }
    for ret in std::mem::take(&mut b.return_nodes) {
        b.edge(ret, exit, EdgeLabel::Seq);
    }
    Ok(CfgBuild {
        cfg: Cfg {
            method: method.method_ref(),
            nodes: b.nodes,
            edges: b.edges,
            entry,
            exit,
        },
        builtin_uses: b.builtin_uses,
    })
}

/// Dangling out-edges awaiting their successor.
type Dangling = Vec<(u32, EdgeLabel)>;

struct Builder<'a> {
    index: &'a ProgramIndex,
    owner: String,
    nodes: Vec<CfgNode>,
    edges: Vec<CfgEdge>,
    return_nodes: Vec<u32>,
    temp_count: u32,
    env: Vec<BTreeMap<String, Type>>,
    builtin_uses: Vec<BuiltinUse>,
    in_guard: bool,
}

impl<'a> Builder<'a> {
    fn push(&mut self, kind: NodeKind, loop_head: bool) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(CfgNode {
            id,
            kind,
            loop_head,
        });
        id
    }

    fn edge(&mut self, from: u32, to: u32, label: EdgeLabel) {
        self.edges.push(CfgEdge { from, to, label });
    }

    fn fresh_temp(&mut self, ty: Option<Type>) -> Option<String> {
        ty.map(|t| {
            let name = format!("$t{}", self.temp_count);
            self.temp_count += 1;
            self.env.last_mut().unwrap().insert(name.clone(), t);
            name
        })
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        self.env.iter().rev().find_map(|s| s.get(name)).cloned()
    }

    /// Sequence two fragments: `(entry, dangling)` pairs.
    fn chain(
        &mut self,
        first: (Option<u32>, Dangling),
        second: (Option<u32>, Dangling),
    ) -> (Option<u32>, Dangling) {
        match second.0 {
            None => (first.0, merge_dangling(first.1, second.1)),
            Some(next) => {
                for (from, label) in first.1 {
                    self.edge(from, next, label);
                }
                (first.0.or(Some(next)), second.1)
            }
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> (Option<u32>, Dangling) {
        self.env.push(BTreeMap::new());
        let mut acc: (Option<u32>, Dangling) = (None, Vec::new());
        let mut first = true;
        for stmt in stmts {
            // Statements after an all-returning statement are unreachable
            // and get no nodes.
            if !first && acc.1.is_empty() {
                break;
            }
            let frag = self.stmt(stmt);
            acc = self.chain(acc, frag);
            first = false;
        }
        self.env.pop();
        acc
    }

    fn stmt(&mut self, stmt: &Stmt) -> (Option<u32>, Dangling) {
        match stmt {
            Stmt::VarDecl {
                ty, name, init, span,
            } => {
                let mut frag: (Option<u32>, Dangling) = (None, Vec::new());
                let value = match init {
                    Some(e) => {
                        let (rewritten, _ty, lifted) = self.lift(e);
                        frag = self.splice_calls(frag, lifted);
                        Some(rewritten)
                    }
                    None => None,
                };
                self.env
                    .last_mut()
                    .unwrap()
                    .insert(name.clone(), ty.clone());
                let node = self.define_node(name.clone(), value, *span);
                self.append(frag, node)
            }
            Stmt::Assign {
                target,
                value,
                span,
            } => {
                let (value, _ty, lifted) = self.lift(value);
                let mut frag: (Option<u32>, Dangling) = (None, Vec::new());
                frag = self.splice_calls(frag, lifted);
                let node = match self.classify_target(target) {
                    TargetKind::Local(name) => self.define_node(name, Some(value), *span),
                    TargetKind::Field(field, is_static) => self.push(
                        NodeKind::Statement {
                            span: *span,
                            op: StmtOp::StoreField {
                                field,
                                is_static,
                                value,
                            },
                        },
                        false,
                    ),
                };
                self.append(frag, node)
            }
            Stmt::ReflectSet {
                class,
                field,
                value,
                span,
                receiver,
            } => {
                let (value, _ty, lifted) = self.lift(value);
                let mut frag: (Option<u32>, Dangling) = (None, Vec::new());
                frag = self.splice_calls(frag, lifted);
                if let Some(recv) = receiver {
                    let (_recv, _t, lifted_recv) = self.lift(recv);
                    frag = self.splice_calls(frag, lifted_recv);
                }
                let is_static = self
                    .index
                    .declared_field(class, field)
                    .map(|f| f.is_static)
                    .unwrap_or(true);
                let node = self.push(
                    NodeKind::Statement {
                        span: *span,
                        op: StmtOp::StoreField {
                            field: FieldRef {
                                class: class.clone(),
                                name: field.clone(),
                            },
                            is_static,
                            value,
                        },
                    },
                    false,
                );
                self.append(frag, node)
            }
            Stmt::Return { value, span } => {
                let mut frag: (Option<u32>, Dangling) = (None, Vec::new());
                let value = match value {
                    Some(e) => {
                        let (rewritten, _ty, lifted) = self.lift(e);
                        frag = self.splice_calls(frag, lifted);
                        Some(rewritten)
                    }
                    None => None,
                };
                let node = self.push(
                    NodeKind::Statement {
                        span: *span,
                        op: StmtOp::Return { value },
                    },
                    false,
                );
                let (entry, dangling) = self.append(frag, node);
                debug_assert!(dangling.len() == 1);
                self.return_nodes.push(node);
                (entry, Vec::new())
            }
            Stmt::ExprStmt { expr, span } => {
                let (rewritten, _ty, lifted) = self.lift(expr);
                let mut frag: (Option<u32>, Dangling) = (None, Vec::new());
                frag = self.splice_calls(frag, lifted);
                // A lifted call leaves only a temp (or nothing) behind; keep
                // an effect node only when some computation remains.
                if matches!(rewritten, Expr::Var { .. }) && frag.0.is_some() {
                    return frag;
                }
                let node = self.push(
                    NodeKind::Statement {
                        span: *span,
                        op: StmtOp::Effect,
                    },
                    false,
                );
                self.append(frag, node)
            }
            Stmt::If {
                guard_site,
                guard,
                then_block,
                else_block,
                ..
            } => {
                let plan = guard_plan(guard);
                let (entry, true_d, false_d) = self.guard(&plan, *guard_site, false);
                let then_frag = self.block(then_block);
                let mut dangling = Vec::new();
                match then_frag.0 {
                    Some(t) => {
                        for (from, label) in true_d {
                            self.edge(from, t, label);
                        }
                        dangling.extend(then_frag.1);
                    }
                    None => dangling.extend(true_d),
                }
                match else_block {
                    Some(els) => {
                        let else_frag = self.block(els);
                        match else_frag.0 {
                            Some(e) => {
                                for (from, label) in false_d {
                                    self.edge(from, e, label);
                                }
                                dangling.extend(else_frag.1);
                            }
                            None => dangling.extend(false_d),
                        }
                    }
                    None => dangling.extend(false_d),
                }
                (Some(entry), dangling)
            }
            Stmt::While {
                guard_site,
                guard,
                body,
                ..
            } => {
                let plan = guard_plan(guard);
                let (entry, true_d, false_d) = self.guard(&plan, *guard_site, true);
                let body_frag = self.block(body);
                match body_frag.0 {
                    Some(b) => {
                        for (from, label) in true_d {
                            self.edge(from, b, label);
                        }
                        // Back edge to the start of the guard chain.
                        for (from, label) in body_frag.1 {
                            self.edge(from, entry, label);
                        }
                    }
                    None => {
                        for (from, label) in true_d {
                            self.edge(from, entry, label);
                        }
                    }
                }
                (Some(entry), false_d)
            }
        }
    }

    fn define_node(&mut self, name: String, value: Option<Expr>, span: Span) -> u32 {
        let (field_reads, temp_reads) = match &value {
            Some(e) => (self.field_reads(e), collect_temp_reads(e)),
            None => (Vec::new(), Vec::new()),
        };
        self.push(
            NodeKind::Statement {
                span,
                op: StmtOp::Define {
                    name,
                    value,
                    field_reads,
                    temp_reads,
                },
            },
            false,
        )
    }

    fn append(&mut self, frag: (Option<u32>, Dangling), node: u32) -> (Option<u32>, Dangling) {
        let next = (Some(node), vec![(node, EdgeLabel::Seq)]);
        self.chain(frag, next)
    }

    fn splice_calls(
        &mut self,
        frag: (Option<u32>, Dangling),
        lifted: Vec<u32>,
    ) -> (Option<u32>, Dangling) {
        let mut acc = frag;
        for node in lifted {
            acc = self.append(acc, node);
        }
        acc
    }

    /// Build the branch chain for a guard tree. Returns the chain entry node
    /// and the dangling true/false edge sets.
    fn guard(
        &mut self,
        tree: &GuardTree<'_>,
        guard_site: u32,
        loop_head: bool,
    ) -> (u32, Dangling, Dangling) {
        match tree {
            GuardTree::And(l, r) => {
                let (entry, l_true, l_false) = self.guard(l, guard_site, loop_head);
                let (r_entry, r_true, r_false) = self.guard(r, guard_site, loop_head);
                for (from, label) in l_true {
                    self.edge(from, r_entry, label);
                }
                (entry, r_true, merge_dangling(l_false, r_false))
            }
            GuardTree::Or(l, r) => {
                let (entry, l_true, l_false) = self.guard(l, guard_site, loop_head);
                let (r_entry, r_true, r_false) = self.guard(r, guard_site, loop_head);
                for (from, label) in l_false {
                    self.edge(from, r_entry, label);
                }
                (entry, merge_dangling(l_true, r_true), r_false)
            }
            GuardTree::Atom {
                index,
                negated,
                expr,
            } => {
                let was_in_guard = self.in_guard;
                self.in_guard = true;
                let (rewritten, _ty, lifted) = self.lift(expr);
                self.in_guard = was_in_guard;
                let field_reads = self.field_reads(&rewritten);
                let temp_reads = collect_temp_reads(&rewritten);
                let branch = self.push(
                    NodeKind::Branch {
                        info: BranchInfo {
                            guard_site,
                            atom: *index,
                            negated: *negated,
                            expr: rewritten,
                            field_reads,
                            temp_reads,
                            span: expr.span(),
                        },
                    },
                    loop_head,
                );
                // Chain lifted call nodes ahead of the branch node.
                let mut entry = branch;
                if !lifted.is_empty() {
                    entry = lifted[0];
                    for pair in lifted.windows(2) {
                        self.edge(pair[0], pair[1], EdgeLabel::Seq);
                    }
                    self.edge(*lifted.last().unwrap(), branch, EdgeLabel::Seq);
                    if loop_head {
                        for id in &lifted {
                            self.nodes[*id as usize].loop_head = true;
                        }
                    }
                }
                (
                    entry,
                    vec![(branch, EdgeLabel::True)],
                    vec![(branch, EdgeLabel::False)],
                )
            }
        }
    }

    /// Rewrite an expression: lift calls into call nodes (returned as ids in
    /// evaluation order), normalize field reads, and compute the type.
    fn lift(&mut self, expr: &Expr) -> (Expr, Option<Type>, Vec<u32>) {
        let mut lifted = Vec::new();
        let (rewritten, ty) = self.lift_inner(expr, &mut lifted);
        (rewritten, ty, lifted)
    }

    fn lift_inner(&mut self, expr: &Expr, lifted: &mut Vec<u32>) -> (Expr, Option<Type>) {
        match expr {
            Expr::IntLit { .. } => (expr.clone(), Some(Type::Int)),
            Expr::BoolLit { .. } => (expr.clone(), Some(Type::Bool)),
            Expr::CharLit { .. } => (expr.clone(), Some(Type::Char)),
            Expr::StrLit { .. } => (expr.clone(), Some(Type::Str)),
            Expr::Var { name, span } => {
                if let Some(ty) = self.lookup(name) {
                    return (expr.clone(), Some(ty));
                }
                // Own field: normalize to an explicit access.
                if let Some((owner, field)) = self.index.find_field(&self.owner, name) {
                    let owner_name = owner.decl.name.clone();
                    let ty = field.declared_type.clone();
                    let base = if field.is_static {
                        Expr::Var {
                            name: owner_name,
                            span: *span,
                        }
                    } else {
                        Expr::Var {
                            name: SYNTHETIC_THIS.to_string(),
                            span: *span,
                        }
                    };
                    return (
                        Expr::FieldAccess {
                            base: Box::new(base),
                            name: name.clone(),
                            span: *span,
                        },
                        Some(ty),
                    );
                }
                (expr.clone(), None)
            }
            Expr::FieldAccess { base, name, span } => {
                if let Some(class) = self.static_base(base) {
                    let ty = self
                        .index
                        .find_field(&class, name)
                        .map(|(_, f)| f.declared_type.clone());
                    return (expr.clone(), ty);
                }
                let (base_r, base_ty) = self.lift_inner(base, lifted);
                let ty = match &base_ty {
                    Some(Type::Class(c)) => self
                        .index
                        .find_field(c, name)
                        .map(|(_, f)| f.declared_type.clone()),
                    _ => None,
                };
                (
                    Expr::FieldAccess {
                        base: Box::new(base_r),
                        name: name.clone(),
                        span: *span,
                    },
                    ty,
                )
            }
            Expr::Unary { op, expr: inner, span } => {
                let (inner_r, _) = self.lift_inner(inner, lifted);
                let ty = match op {
                    UnOp::Not => Type::Bool,
                    UnOp::Neg => Type::Int,
                };
                (
                    Expr::Unary {
                        op: *op,
                        expr: Box::new(inner_r),
                        span: *span,
                    },
                    Some(ty),
                )
            }
            Expr::Binary { op, lhs, rhs, span } => {
                let (l, _) = self.lift_inner(lhs, lifted);
                let (r, _) = self.lift_inner(rhs, lifted);
                let ty = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => Type::Int,
                    _ => Type::Bool,
                };
                (
                    Expr::Binary {
                        op: *op,
                        lhs: Box::new(l),
                        rhs: Box::new(r),
                        span: *span,
                    },
                    Some(ty),
                )
            }
            Expr::BuiltinCall { builtin, args, span } => {
                self.builtin_uses.push(BuiltinUse {
                    builtin: *builtin,
                    span: *span,
                    in_guard: self.in_guard,
                });
                let mut new_args = Vec::new();
                for a in args {
                    new_args.push(self.lift_inner(a, lifted).0);
                }
                let ty = match builtin {
                    Builtin::Length | Builtin::IndexOf => Type::Int,
                    Builtin::CharAt => Type::Char,
                    Builtin::Substring | Builtin::Concat => Type::Str,
                };
                (
                    Expr::BuiltinCall {
                        builtin: *builtin,
                        args: new_args,
                        span: *span,
                    },
                    Some(ty),
                )
            }
            Expr::New { class, span } => (
                Expr::New {
                    class: class.clone(),
                    span: *span,
                },
                Some(Type::Class(class.clone())),
            ),
            Expr::Call {
                receiver,
                name,
                args,
                span,
            } => {
                let mut recv_rewritten = None;
                let (callee_class, dispatch) = match receiver {
                    None => {
                        // Own-class call.
                        (self.owner.clone(), None)
                    }
                    Some(base) => {
                        if let Some(class) = self.static_base(base) {
                            (class, Some(CallDispatch::Static))
                        } else {
                            let (base_r, base_ty) = self.lift_inner(base, lifted);
                            let class = match base_ty {
                                Some(Type::Class(c)) => c,
                                _ => self.owner.clone(),
                            };
                            recv_rewritten = Some(base_r);
                            (class, Some(CallDispatch::Virtual))
                        }
                    }
                };
                let mut arg_types = Vec::new();
                let mut new_args = Vec::new();
                for a in args {
                    let (r, t) = self.lift_inner(a, lifted);
                    new_args.push(r);
                    arg_types.push(t);
                }
                let decl = self.resolve(&callee_class, name, &arg_types);
                let (sig, ret, is_static) = match decl {
                    Some(m) => (m.signature(), m.return_type.clone(), m.is_static),
                    None => (
                        MethodSig {
                            name: name.clone(),
                            params: arg_types.iter().flatten().cloned().collect(),
                        },
                        RetType::Void,
                        true,
                    ),
                };
                let dispatch = dispatch.unwrap_or(if is_static {
                    CallDispatch::Static
                } else {
                    CallDispatch::Virtual
                });
                let result_type = match ret {
                    RetType::Void => None,
                    RetType::Value(t) => Some(t),
                };
                let mut field_reads = new_args
                    .iter()
                    .flat_map(|a| self.field_reads(a))
                    .collect::<Vec<_>>();
                if let Some(r) = &recv_rewritten {
                    field_reads.extend(self.field_reads(r));
                }
                let result = self.fresh_temp(result_type.clone());
                let node = self.push(
                    NodeKind::Call {
                        info: CallInfo {
                            callee_class,
                            sig,
                            dispatch,
                            result: result.clone(),
                            result_type: result_type.clone(),
                            args: new_args,
                            field_reads,
                            span: *span,
                        },
                    },
                    false,
                );
                lifted.push(node);
                match result {
                    Some(temp) => (
                        Expr::Var {
                            name: temp,
                            span: *span,
                        },
                        result_type,
                    ),
                    None => (
                        Expr::Var {
                            name: "$void".to_string(),
                            span: *span,
                        },
                        None,
                    ),
                }
            }
            Expr::ReflectCall {
                receiver,
                class,
                method,
                args,
                span,
            } => {
                if let Some(r) = receiver {
                    let _ = self.lift_inner(r, lifted);
                }
                let mut arg_types = Vec::new();
                let mut new_args = Vec::new();
                for a in args {
                    let (r, t) = self.lift_inner(a, lifted);
                    new_args.push(r);
                    arg_types.push(t);
                }
                let decl = self
                    .index
                    .class(class)
                    .and_then(|c| {
                        c.decl.methods.iter().find(|m| {
                            m.name == *method
                                && m.params.len() == arg_types.len()
                                && m.params.iter().zip(&arg_types).all(|(p, t)| {
                                    t.as_ref().map(|t| types_match(&p.ty, t)).unwrap_or(true)
                                })
                        })
                    })
                    .cloned();
                let (sig, ret) = match decl {
                    Some(m) => (m.signature(), m.return_type),
                    None => (
                        MethodSig {
                            name: method.clone(),
                            params: arg_types.iter().flatten().cloned().collect(),
                        },
                        RetType::Void,
                    ),
                };
                let result_type = match ret {
                    RetType::Void => None,
                    RetType::Value(t) => Some(t),
                };
                let field_reads = new_args
                    .iter()
                    .flat_map(|a| self.field_reads(a))
                    .collect::<Vec<_>>();
                let result = self.fresh_temp(result_type.clone());
                let node = self.push(
                    NodeKind::Call {
                        info: CallInfo {
                            callee_class: class.clone(),
                            sig,
                            dispatch: CallDispatch::Reflective,
                            result: result.clone(),
                            result_type: result_type.clone(),
                            args: new_args,
                            field_reads,
                            span: *span,
                        },
                    },
                    false,
                );
                lifted.push(node);
                match result {
                    Some(temp) => (
                        Expr::Var {
                            name: temp,
                            span: *span,
                        },
                        result_type,
                    ),
                    None => (
                        Expr::Var {
                            name: "$void".to_string(),
                            span: *span,
                        },
                        None,
                    ),
                }
            }
        }
    }

    fn static_base(&self, base: &Expr) -> Option<String> {
        if let Expr::Var { name, .. } = base {
            if self.lookup(name).is_none() && self.index.class(name).is_some() {
                return Some(name.clone());
            }
        }
        None
    }

    /// Type of an already-rewritten expression (no call nodes remain).
    fn ty_of(&self, expr: &Expr) -> Option<Type> {
        match expr {
            Expr::IntLit { .. } => Some(Type::Int),
            Expr::BoolLit { .. } => Some(Type::Bool),
            Expr::CharLit { .. } => Some(Type::Char),
            Expr::StrLit { .. } => Some(Type::Str),
            Expr::Var { name, .. } => {
                if name == SYNTHETIC_THIS {
                    Some(Type::Class(self.owner.clone()))
                } else {
                    self.lookup(name)
                }
            }
            Expr::FieldAccess { base, name, .. } => {
                let class = match self.static_base(base) {
                    Some(c) => c,
                    None => match self.ty_of(base)? {
                        Type::Class(c) => c,
                        _ => return None,
                    },
                };
                self.index
                    .find_field(&class, name)
                    .map(|(_, f)| f.declared_type.clone())
            }
            Expr::Unary { op, .. } => Some(match op {
                UnOp::Not => Type::Bool,
                UnOp::Neg => Type::Int,
            }),
            Expr::Binary { op, .. } => Some(match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => Type::Int,
                _ => Type::Bool,
            }),
            Expr::BuiltinCall { builtin, .. } => Some(match builtin {
                Builtin::Length | Builtin::IndexOf => Type::Int,
                Builtin::CharAt => Type::Char,
                Builtin::Substring | Builtin::Concat => Type::Str,
            }),
            Expr::New { class, .. } => Some(Type::Class(class.clone())),
            _ => None,
        }
    }

    /// Fields read by a rewritten expression, with declaring classes
    /// resolved through the chain.
    fn field_reads(&self, expr: &Expr) -> Vec<FieldRef> {
        let mut out = Vec::new();
        self.walk_field_reads(expr, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn walk_field_reads(&self, expr: &Expr, out: &mut Vec<FieldRef>) {
        match expr {
            Expr::FieldAccess { base, name, .. } => {
                let class = if let Expr::Var {
                    name: base_name, ..
                } = base.as_ref()
                {
                    if base_name == SYNTHETIC_THIS {
                        Some(self.owner.clone())
                    } else if self.lookup(base_name).is_none()
                        && self.index.class(base_name).is_some()
                    {
                        Some(base_name.clone())
                    } else {
                        match self.lookup(base_name) {
                            Some(Type::Class(c)) => Some(c),
                            _ => None,
                        }
                    }
                } else {
                    self.walk_field_reads(base, out);
                    match self.ty_of(base) {
                        Some(Type::Class(c)) => Some(c),
                        _ => None,
                    }
                };
                if let Some(class) = class {
                    if let Some((owner, f)) = self.index.find_field(&class, name) {
                        out.push(FieldRef {
                            class: owner.decl.name.clone(),
                            name: f.name.clone(),
                        });
                    }
                }
            }
            Expr::Unary { expr, .. } => self.walk_field_reads(expr, out),
            Expr::Binary { lhs, rhs, .. } => {
                self.walk_field_reads(lhs, out);
                self.walk_field_reads(rhs, out);
            }
            Expr::BuiltinCall { args, .. } => {
                for a in args {
                    self.walk_field_reads(a, out);
                }
            }
            Expr::Call { receiver, args, .. } | Expr::ReflectCall { receiver, args, .. } => {
                if let Some(r) = receiver {
                    self.walk_field_reads(r, out);
                }
                for a in args {
                    self.walk_field_reads(a, out);
                }
            }
            _ => {}
        }
    }

    fn resolve(
        &self,
        class: &str,
        name: &str,
        arg_types: &[Option<Type>],
    ) -> Option<MethodDecl> {
        self.index
            .methods_named(class, name)
            .into_iter()
            .find(|m| {
                m.params.len() == arg_types.len()
                    && m.params.iter().zip(arg_types).all(|(p, t)| {
                        t.as_ref().map(|t| types_match(&p.ty, t)).unwrap_or(true)
                    })
            })
            .cloned()
    }
}

fn types_match(want: &Type, found: &Type) -> bool {
    match (want, found) {
        (Type::Class(_), Type::Class(_)) => true,
        (a, b) => a == b,
    }
}

fn merge_dangling(mut a: Dangling, b: Dangling) -> Dangling {
    a.extend(b);
    a
}

enum TargetKind {
    Local(String),
    Field(FieldRef, bool),
}

impl<'a> Builder<'a> {
    fn classify_target(&self, target: &Expr) -> TargetKind {
        match target {
            Expr::Var { name, .. } => {
                if self.lookup(name).is_some() {
                    TargetKind::Local(name.clone())
                } else if let Some((owner, f)) = self.index.find_field(&self.owner, name) {
                    TargetKind::Field(
                        FieldRef {
                            class: owner.decl.name.clone(),
                            name: f.name.clone(),
                        },
                        f.is_static,
                    )
                } else {
                    TargetKind::Local(name.clone())
                }
            }
            Expr::FieldAccess { base, name, .. } => {
                if let Some(class) = self.static_base(base) {
                    if let Some((owner, f)) = self.index.find_field(&class, name) {
                        return TargetKind::Field(
                            FieldRef {
                                class: owner.decl.name.clone(),
                                name: f.name.clone(),
                            },
                            f.is_static,
                        );
                    }
                }
                TargetKind::Field(
                    FieldRef {
                        class: String::new(),
                        name: name.clone(),
                    },
                    false,
                )
            }
            _ => unreachable!("parser restricts assignment targets"),
        }
    }
}

/// Fields read by a rewritten expression. After normalization these appear
/// as `Class.f` (static) or `$this.f` / `obj.f` (instance) accesses.
pub fn collect_field_reads(expr: &Expr) -> Vec<FieldRef> {
    let mut out = Vec::new();
    walk_fields(expr, &mut out);
    out.sort();
    out.dedup();
    out
}

fn walk_fields(expr: &Expr, out: &mut Vec<FieldRef>) {
    match expr {
        Expr::FieldAccess { base, name, .. } => {
            if let Expr::Var { name: base_name, .. } = base.as_ref() {
                out.push(FieldRef {
                    class: base_name.clone(),
                    name: name.clone(),
                });
            } else {
                walk_fields(base, out);
                out.push(FieldRef {
                    class: String::new(),
                    name: name.clone(),
                });
            }
        }
        Expr::Unary { expr, .. } => walk_fields(expr, out),
        Expr::Binary { lhs, rhs, .. } => {
            walk_fields(lhs, out);
            walk_fields(rhs, out);
        }
        Expr::BuiltinCall { args, .. } => {
            for a in args {
                walk_fields(a, out);
            }
        }
        Expr::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_fields(r, out);
            }
            for a in args {
                walk_fields(a, out);
            }
        }
        Expr::ReflectCall { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_fields(r, out);
            }
            for a in args {
                walk_fields(a, out);
            }
        }
        _ => {}
    }
}

/// Synthetic `$tN` temporaries read by a rewritten expression.
pub fn collect_temp_reads(expr: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    walk_temps(expr, &mut out);
    out.sort();
    out.dedup();
    out
}

fn walk_temps(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Var { name, .. } => {
            if name.starts_with("$t") {
                out.push(name.clone());
            }
        }
        Expr::FieldAccess { base, .. } => walk_temps(base, out),
        Expr::Unary { expr, .. } => walk_temps(expr, out),
        Expr::Binary { lhs, rhs, .. } => {
            walk_temps(lhs, out);
            walk_temps(rhs, out);
        }
        Expr::BuiltinCall { args, .. } => {
            for a in args {
                walk_temps(a, out);
            }
        }
        Expr::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_temps(r, out);
            }
            for a in args {
                walk_temps(a, out);
            }
        }
        Expr::ReflectCall { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_temps(r, out);
            }
            for a in args {
                walk_temps(a, out);
            }
        }
        _ => {}
    }
}
