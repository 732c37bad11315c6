//! Abstract syntax for the SJ subject language.
//!
//! SJ is a small class-based imperative language: single inheritance, two
//! access levels, static and instance members, four primitive types, and
//! first-class reflection constructs (`reflect call`, `reflect set`) that
//! bypass access checks at runtime only.

use crate::span::Span;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Value types. Fields are restricted to primitives by the checker; locals
/// and parameters may also hold class instances.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    Char,
    Str,
    Class(String),
}

impl Type {
    pub fn is_primitive(&self) -> bool {
        !matches!(self, Type::Class(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
            Type::Char => f.write_str("char"),
            Type::Str => f.write_str("string"),
            Type::Class(name) => f.write_str(name),
        }
    }
}

/// Method return types: primitives or void.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RetType {
    Void,
    Value(Type),
}

impl fmt::Display for RetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetType::Void => f.write_str("void"),
            RetType::Value(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Access {
    Public,
    Private,
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Access::Public => f.write_str("public"),
            Access::Private => f.write_str("private"),
        }
    }
}

/// One parsed `.sj` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub path: String,
    pub classes: Vec<ClassDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDecl {
    pub name: String,
    pub superclass: Option<String>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub span: Span,
}

impl ClassDecl {
    /// A class is abstract iff it declares at least one abstract method.
    pub fn is_abstract(&self) -> bool {
        self.methods.iter().any(|m| m.is_abstract)
    }
}

/// Constant initializers allowed on field declarations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstValue {
    Int(i64),
    Bool(bool),
    Char(char),
    Str(String),
}

impl ConstValue {
    pub fn ty(&self) -> Type {
        match self {
            ConstValue::Int(_) => Type::Int,
            ConstValue::Bool(_) => Type::Bool,
            ConstValue::Char(_) => Type::Char,
            ConstValue::Str(_) => Type::Str,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub declared_type: Type,
    pub is_static: bool,
    pub access: Access,
    pub initializer: Option<ConstValue>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodDecl {
    pub owner: String,
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: RetType,
    pub is_static: bool,
    pub is_abstract: bool,
    pub access: Access,
    pub body: Option<Block>,
    pub span: Span,
}

impl MethodDecl {
    pub fn signature(&self) -> MethodSig {
        MethodSig {
            name: self.name.clone(),
            params: self.params.iter().map(|p| p.ty.clone()).collect(),
        }
    }

    pub fn method_ref(&self) -> MethodRef {
        MethodRef {
            class: self.owner.clone(),
            sig: self.signature(),
        }
    }
}

/// A method signature: name plus parameter types (the overriding key).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<Type>,
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/(", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            p.fmt(f)?;
        }
        f.write_str(")")
    }
}

/// A fully qualified method reference: `Class#name/(types)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodRef {
    pub class: String,
    pub sig: MethodSig,
}

impl MethodRef {
    pub fn id(&self) -> String {
        format!("{}#{}", self.class, self.sig)
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.class, self.sig)
    }
}

/// A fully qualified field reference: `Class#name`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldRef {
    pub class: String,
    pub name: String,
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.class, self.name)
    }
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Stmt {
    VarDecl {
        ty: Type,
        name: String,
        init: Option<Expr>,
        span: Span,
    },
    Assign {
        target: Expr,
        value: Expr,
        span: Span,
    },
    If {
        /// Per-method ordinal of this guard, assigned by the parser in
        /// source order; shared by the CFG builder and the interpreter.
        guard_site: u32,
        guard: Expr,
        then_block: Block,
        else_block: Option<Block>,
        span: Span,
    },
    While {
        guard_site: u32,
        guard: Expr,
        body: Block,
        span: Span,
    },
    Return {
        value: Option<Expr>,
        span: Span,
    },
    ExprStmt {
        expr: Expr,
        span: Span,
    },
    /// `reflect set [recv.]Class#field = expr;` — runtime field write that
    /// bypasses access checks, mirroring `Field.setAccessible(true)`.
    ReflectSet {
        receiver: Option<Expr>,
        class: String,
        field: String,
        value: Expr,
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::VarDecl { span, .. }
            | Stmt::Assign { span, .. }
            | Stmt::If { span, .. }
            | Stmt::While { span, .. }
            | Stmt::Return { span, .. }
            | Stmt::ExprStmt { span, .. }
            | Stmt::ReflectSet { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
}

/// String built-ins. These evaluate inline (they are expressions, not call
/// nodes in the CFG) but are recorded as call-graph edges for queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Builtin {
    Length,
    CharAt,
    IndexOf,
    Substring,
    Concat,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Length => "length",
            Builtin::CharAt => "charAt",
            Builtin::IndexOf => "indexOf",
            Builtin::Substring => "substring",
            Builtin::Concat => "concat",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "length" => Some(Builtin::Length),
            "charAt" => Some(Builtin::CharAt),
            "indexOf" => Some(Builtin::IndexOf),
            "substring" => Some(Builtin::Substring),
            "concat" => Some(Builtin::Concat),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Builtin::Length => 1,
            Builtin::CharAt | Builtin::IndexOf | Builtin::Concat => 2,
            Builtin::Substring => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    IntLit {
        value: i64,
        span: Span,
    },
    BoolLit {
        value: bool,
        span: Span,
    },
    CharLit {
        value: char,
        span: Span,
    },
    StrLit {
        value: String,
        span: Span,
    },
    /// A bare name: a local, parameter, or (resolved by the checker) an own
    /// field of the enclosing class.
    Var {
        name: String,
        span: Span,
    },
    /// `base.name` — instance field when `base` is an object expression,
    /// static field when `base` names a class.
    FieldAccess {
        base: Box<Expr>,
        name: String,
        span: Span,
    },
    Unary {
        op: UnOp,
        expr: Box<Expr>,
        span: Span,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: Span,
    },
    /// `name(args)`, `recv.name(args)`, or `Class.name(args)`.
    Call {
        receiver: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
        span: Span,
    },
    /// `reflect call [recv.]Class#method(args)`.
    ReflectCall {
        receiver: Option<Box<Expr>>,
        class: String,
        method: String,
        args: Vec<Expr>,
        span: Span,
    },
    BuiltinCall {
        builtin: Builtin,
        args: Vec<Expr>,
        span: Span,
    },
    New {
        class: String,
        span: Span,
    },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::IntLit { span, .. }
            | Expr::BoolLit { span, .. }
            | Expr::CharLit { span, .. }
            | Expr::StrLit { span, .. }
            | Expr::Var { span, .. }
            | Expr::FieldAccess { span, .. }
            | Expr::Unary { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Call { span, .. }
            | Expr::ReflectCall { span, .. }
            | Expr::BuiltinCall { span, .. }
            | Expr::New { span, .. } => *span,
        }
    }
}

/// A guard decomposed to negation normal form over short-circuit operators.
///
/// The atoms appear in evaluation order with stable per-guard indices; the
/// CFG builder turns each atom into a branch node, and the interpreter emits
/// one branch event per atom it actually evaluates, so static obligations
/// and runtime events share an id space.
#[derive(Debug, Clone, PartialEq)]
pub enum GuardTree<'a> {
    And(Box<GuardTree<'a>>, Box<GuardTree<'a>>),
    Or(Box<GuardTree<'a>>, Box<GuardTree<'a>>),
    Atom {
        index: u32,
        negated: bool,
        expr: &'a Expr,
    },
}

/// Decompose a guard expression into its `GuardTree`, assigning atom indices
/// in evaluation order starting from 0.
pub fn guard_plan(guard: &Expr) -> GuardTree<'_> {
    let mut next = 0;
    build_plan(guard, false, &mut next)
}

fn build_plan<'a>(expr: &'a Expr, negated: bool, next: &mut u32) -> GuardTree<'a> {
    match expr {
        Expr::Binary {
            op: BinOp::And,
            lhs,
            rhs,
            ..
        } => {
            let l = build_plan(lhs, negated, next);
            let r = build_plan(rhs, negated, next);
            if negated {
                GuardTree::Or(Box::new(l), Box::new(r))
            } else {
                GuardTree::And(Box::new(l), Box::new(r))
            }
        }
        Expr::Binary {
            op: BinOp::Or,
            lhs,
            rhs,
            ..
        } => {
            let l = build_plan(lhs, negated, next);
            let r = build_plan(rhs, negated, next);
            if negated {
                GuardTree::And(Box::new(l), Box::new(r))
            } else {
                GuardTree::Or(Box::new(l), Box::new(r))
            }
        }
        Expr::Unary {
            op: UnOp::Not,
            expr: inner,
            ..
        } => build_plan(inner, !negated, next),
        _ => {
            let index = *next;
            *next += 1;
            GuardTree::Atom {
                index,
                negated,
                expr,
            }
        }
    }
}

/// Collect the atoms of a guard in evaluation order.
pub fn guard_atoms<'a>(guard: &'a Expr) -> Vec<(u32, bool, &'a Expr)> {
    let plan = guard_plan(guard);
    let mut out = Vec::new();
    collect_atoms(&plan, &mut out);
    out
}

fn collect_atoms<'a>(tree: &GuardTree<'a>, out: &mut Vec<(u32, bool, &'a Expr)>) {
    match tree {
        GuardTree::And(l, r) | GuardTree::Or(l, r) => {
            collect_atoms(l, out);
            collect_atoms(r, out);
        }
        GuardTree::Atom {
            index,
            negated,
            expr,
        } => out.push((*index, *negated, expr)),
    }
}
