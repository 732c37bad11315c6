//! Tree-walking interpreter with execution tracing.
//!
//! Every statement start, every guard-atom decision, every source-level
//! guard outcome, and every method entry is recorded in order, so traces can
//! be replayed against CFG path obligations and folded into coverage.
//! Reflective constructs bypass access checks here; direct access was
//! already validated by `check`.

use crate::lang::ast::*;
use crate::lang::index::ProgramIndex;
use crate::span::Span;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_steps: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Char(char),
    Str(Rc<String>),
    Obj(ObjRef),
    Null,
}

impl Value {
    pub fn from_const(c: &ConstValue) -> Value {
        match c {
            ConstValue::Int(v) => Value::Int(*v),
            ConstValue::Bool(b) => Value::Bool(*b),
            ConstValue::Char(c) => Value::Char(*c),
            ConstValue::Str(s) => Value::Str(Rc::new(s.clone())),
        }
    }

    pub fn default_of(ty: &Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::Char => Value::Char('\0'),
            Type::Str => Value::Str(Rc::new(String::new())),
            Type::Class(_) => Value::Null,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Char(c) => write!(f, "'{}'", crate::lang::pretty::escape_char(*c)),
            Value::Str(s) => write!(f, "\"{}\"", crate::lang::pretty::escape_str(s)),
            Value::Obj(o) => write!(f, "<{}>", o.borrow().class),
            Value::Null => write!(f, "null"),
        }
    }
}

pub type ObjRef = Rc<RefCell<Instance>>;

#[derive(Debug, PartialEq)]
pub struct Instance {
    pub class: String,
    /// Keyed by declaring class and field name; superclass sub-objects are
    /// flattened in.
    pub fields: BTreeMap<(String, String), Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExceptionKind {
    DivisionByZero,
    IndexOutOfBounds,
    NullReceiver,
    StepBudgetExceeded,
    /// Name or type confusion; unreachable when the project checks clean.
    Internal,
}

impl ExceptionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExceptionKind::DivisionByZero => "DIVISION_BY_ZERO",
            ExceptionKind::IndexOutOfBounds => "INDEX_OUT_OF_BOUNDS",
            ExceptionKind::NullReceiver => "NULL_RECEIVER",
            ExceptionKind::StepBudgetExceeded => "STEP_BUDGET_EXCEEDED",
            ExceptionKind::Internal => "INTERNAL",
        }
    }
}

impl fmt::Display for ExceptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded execution event. Branch events carry the guard site and atom
/// index so they can be aligned with CFG branch nodes; guard events carry the
/// source-level outcome used for branch coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraceEvent {
    Stmt {
        method: String,
        span: Span,
    },
    Branch {
        method: String,
        guard_site: u32,
        atom: u32,
        outcome: bool,
    },
    Guard {
        method: String,
        guard_site: u32,
        outcome: bool,
    },
    MethodEnter {
        method: String,
    },
    Exception {
        span: Span,
        kind: ExceptionKind,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Completed,
    UncaughtException,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub events: Vec<TraceEvent>,
    pub focal_reached: bool,
    pub outcome: Outcome,
    pub steps: u64,
}

impl ExecutionTrace {
    /// Atom-level branch decisions taken inside `method`, in order.
    pub fn branch_events_of(&self, method_id: &str) -> Vec<(u32, u32, bool)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Branch {
                    method,
                    guard_site,
                    atom,
                    outcome,
                } if method == method_id => Some((*guard_site, *atom, *outcome)),
                _ => None,
            })
            .collect()
    }

    pub fn exception(&self) -> Option<(&Span, ExceptionKind, &str)> {
        self.events.iter().find_map(|e| match e {
            TraceEvent::Exception {
                span,
                kind,
                message,
            } => Some((span, *kind, message.as_str())),
            _ => None,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("entry method `{0}` not found")]
    EntryNotFound(String),
    #[error("entry method `{0}` must be public, static, and take no parameters")]
    BadEntry(String),
}

struct RuntimeError {
    span: Span,
    kind: ExceptionKind,
    message: String,
}

enum Control {
    Normal,
    Return(Value),
}

/// Run `entry` (a public static zero-parameter method) over the project,
/// tracing everything and watching for the first entry into `focal`.
pub fn execute(
    index: &ProgramIndex,
    entry: &MethodRef,
    focal: &MethodRef,
    limits: Limits,
) -> Result<ExecutionTrace, EngineError> {
    let entry_decl = index
        .declared_method(&entry.class, &entry.sig)
        .ok_or_else(|| EngineError::EntryNotFound(entry.id()))?;
    if !entry_decl.is_static || entry_decl.access != Access::Public || !entry_decl.params.is_empty()
    {
        return Err(EngineError::BadEntry(entry.id()));
    }
    let mut interp = Interp::new(index, limits);
    let result = interp.call_decl(entry_decl, None, Vec::new(), entry_decl.span);
    let outcome = match result {
        Ok(_) => Outcome::Completed,
        Err(e) => {
            interp.events.push(TraceEvent::Exception {
                span: e.span,
                kind: e.kind,
                message: e.message,
            });
            Outcome::UncaughtException
        }
    };
    let focal_reached = focal_reached(&interp.events, &focal.id());
    Ok(ExecutionTrace {
        events: interp.events,
        focal_reached,
        outcome,
        steps: interp.steps,
    })
}

/// A direct method invocation without a synthesized test program: field
/// presets are applied (bypassing access checks, like `reflect set`), an
/// optional receiver is constructed, and the target is called with the
/// given argument values. Used by the brute-force search and exhaustive
/// reachability checks, where building a test AST per tuple would dominate.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub target: MethodRef,
    pub target_private: bool,
    /// Class to instantiate for instance targets.
    pub receiver_class: Option<String>,
    pub args: Vec<Value>,
    pub static_sets: Vec<(String, String, Value)>,
    pub instance_sets: Vec<(String, String, Value)>,
}

pub struct InvokeOutcome {
    pub trace: ExecutionTrace,
    /// The target's return value when execution completed.
    pub value: Option<Value>,
}

pub fn invoke(
    index: &ProgramIndex,
    invocation: &Invocation,
    limits: Limits,
) -> InvokeOutcome {
    let mut interp = Interp::new(index, limits);
    for (class, field, value) in &invocation.static_sets {
        interp
            .statics
            .insert((class.clone(), field.clone()), value.clone());
    }
    let receiver = invocation.receiver_class.as_ref().map(|class| {
        let obj = interp.instantiate(class);
        for (decl_class, field, value) in &invocation.instance_sets {
            obj.borrow_mut()
                .fields
                .insert((decl_class.clone(), field.clone()), value.clone());
        }
        obj
    });

    // Dispatch mirrors reflective invocation: private targets run exactly,
    // public instance targets dispatch on the receiver's runtime class.
    let decl = match (&receiver, invocation.target_private) {
        (Some(obj), false) => {
            let runtime_class = obj.borrow().class.clone();
            index
                .resolve_dispatch(&runtime_class, &invocation.target.sig)
                .cloned()
        }
        _ => index
            .declared_method(&invocation.target.class, &invocation.target.sig)
            .cloned(),
    };
    let Some(decl) = decl else {
        return InvokeOutcome {
            trace: ExecutionTrace {
                events: Vec::new(),
                focal_reached: false,
                outcome: Outcome::UncaughtException,
                steps: 0,
            },
            value: None,
        };
    };

    let result = interp.call_decl(&decl, receiver, invocation.args.clone(), decl.span);
    let (outcome, value) = match result {
        Ok(v) => (Outcome::Completed, Some(v)),
        Err(e) => {
            interp.events.push(TraceEvent::Exception {
                span: e.span,
                kind: e.kind,
                message: e.message,
            });
            (Outcome::UncaughtException, None)
        }
    };
    let focal_hit = focal_reached(&interp.events, &decl.method_ref().id());
    InvokeOutcome {
        trace: ExecutionTrace {
            events: interp.events,
            focal_reached: focal_hit,
            outcome,
            steps: interp.steps,
        },
        value,
    }
}

/// The validity-relevant predicate: a method-entered event for the focal
/// method precedes any exception event.
pub fn focal_reached(events: &[TraceEvent], focal_id: &str) -> bool {
    for event in events {
        match event {
            TraceEvent::MethodEnter { method } if method == focal_id => return true,
            TraceEvent::Exception { .. } => return false,
            _ => {}
        }
    }
    false
}

struct Interp<'a> {
    index: &'a ProgramIndex,
    limits: Limits,
    steps: u64,
    events: Vec<TraceEvent>,
    statics: BTreeMap<(String, String), Value>,
}

type RunResult<T> = Result<T, RuntimeError>;

struct Frame {
    method_id: String,
    locals: Vec<BTreeMap<String, Value>>,
    this: Option<ObjRef>,
    class: String,
}

impl Frame {
    fn get(&self, name: &str) -> Option<&Value> {
        self.locals.iter().rev().find_map(|s| s.get(name))
    }

    fn set(&mut self, name: &str, value: Value) -> bool {
        for scope in self.locals.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(name) {
                *slot = value;
                return true;
            }
        }
        false
    }
}

impl<'a> Interp<'a> {
    fn new(index: &'a ProgramIndex, limits: Limits) -> Self {
        let mut statics = BTreeMap::new();
        for name in index.class_names() {
            let class = &index.class(name).unwrap().decl;
            for field in class.fields.iter().filter(|f| f.is_static) {
                let value = field
                    .initializer
                    .as_ref()
                    .map(Value::from_const)
                    .unwrap_or_else(|| Value::default_of(&field.declared_type));
                statics.insert((name.clone(), field.name.clone()), value);
            }
        }
        Interp {
            index,
            limits,
            steps: 0,
            events: Vec::new(),
            statics,
        }
    }

    fn step(&mut self, span: Span) -> RunResult<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            Err(RuntimeError {
                span,
                kind: ExceptionKind::StepBudgetExceeded,
                message: format!("step budget of {} exceeded", self.limits.max_steps),
            })
        } else {
            Ok(())
        }
    }

    fn instantiate(&self, class: &str) -> ObjRef {
        let mut fields = BTreeMap::new();
        for info in self.index.super_chain(class) {
            for field in info.decl.fields.iter().filter(|f| !f.is_static) {
                let value = field
                    .initializer
                    .as_ref()
                    .map(Value::from_const)
                    .unwrap_or_else(|| Value::default_of(&field.declared_type));
                fields.insert((info.decl.name.clone(), field.name.clone()), value);
            }
        }
        Rc::new(RefCell::new(Instance {
            class: class.to_string(),
            fields,
        }))
    }

    fn call_decl(
        &mut self,
        decl: &MethodDecl,
        this: Option<ObjRef>,
        args: Vec<Value>,
        call_span: Span,
    ) -> RunResult<Value> {
        self.step(call_span)?;
        let method_id = decl.method_ref().id();
        self.events.push(TraceEvent::MethodEnter {
            method: method_id.clone(),
        });
        let mut locals = BTreeMap::new();
        for (param, value) in decl.params.iter().zip(args) {
            locals.insert(param.name.clone(), value);
        }
        let mut frame = Frame {
            method_id,
            locals: vec![locals],
            this,
            class: decl.owner.clone(),
        };
        let body = decl.body.as_ref().expect("abstract method has no body");
        match self.exec_block(body, &mut frame)? {
            Control::Return(v) => Ok(v),
            Control::Normal => Ok(Value::Null),
        }
    }

    fn exec_block(&mut self, block: &Block, frame: &mut Frame) -> RunResult<Control> {
        frame.locals.push(BTreeMap::new());
        for stmt in block {
            match self.exec_stmt(stmt, frame) {
                Ok(Control::Normal) => {}
                other => {
                    frame.locals.pop();
                    return other;
                }
            }
        }
        frame.locals.pop();
        Ok(Control::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> RunResult<Control> {
        self.step(stmt.span())?;
        self.events.push(TraceEvent::Stmt {
            method: frame.method_id.clone(),
            span: stmt.span(),
        });
        match stmt {
            Stmt::VarDecl { ty, name, init, .. } => {
                let value = match init {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::default_of(ty),
                };
                frame
                    .locals
                    .last_mut()
                    .unwrap()
                    .insert(name.clone(), value);
                Ok(Control::Normal)
            }
            Stmt::Assign { target, value, .. } => {
                let v = self.eval(value, frame)?;
                self.assign(target, v, frame)?;
                Ok(Control::Normal)
            }
            Stmt::If {
                guard_site,
                guard,
                then_block,
                else_block,
                ..
            } => {
                let taken = self.eval_guard(*guard_site, guard, frame)?;
                if taken {
                    self.exec_block(then_block, frame)
                } else if let Some(els) = else_block {
                    self.exec_block(els, frame)
                } else {
                    Ok(Control::Normal)
                }
            }
            Stmt::While {
                guard_site,
                guard,
                body,
                ..
            } => {
                while self.eval_guard(*guard_site, guard, frame)? {
                    match self.exec_block(body, frame)? {
                        Control::Normal => {}
                        ret => return Ok(ret),
                    }
                }
                Ok(Control::Normal)
            }
            Stmt::Return { value, .. } => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Null,
                };
                Ok(Control::Return(v))
            }
            Stmt::ExprStmt { expr, .. } => {
                self.eval(expr, frame)?;
                Ok(Control::Normal)
            }
            Stmt::ReflectSet {
                receiver,
                class,
                field,
                value,
                span,
            } => {
                let v = self.eval(value, frame)?;
                match receiver {
                    None => {
                        self.statics
                            .insert((class.clone(), field.clone()), v);
                    }
                    Some(recv) => {
                        let obj = self.eval_receiver(recv, frame, *span)?;
                        obj.borrow_mut()
                            .fields
                            .insert((class.clone(), field.clone()), v);
                    }
                }
                Ok(Control::Normal)
            }
        }
    }

    /// Evaluate a guard in short-circuit order, emitting one branch event per
    /// atom actually evaluated and one guard event for the overall outcome.
    fn eval_guard(&mut self, guard_site: u32, guard: &Expr, frame: &mut Frame) -> RunResult<bool> {
        let plan = guard_plan(guard);
        let outcome = self.eval_guard_tree(&plan, guard_site, frame)?;
        self.events.push(TraceEvent::Guard {
            method: frame.method_id.clone(),
            guard_site,
            outcome,
        });
        Ok(outcome)
    }

    fn eval_guard_tree(
        &mut self,
        tree: &GuardTree<'_>,
        guard_site: u32,
        frame: &mut Frame,
    ) -> RunResult<bool> {
        match tree {
            GuardTree::And(l, r) => {
                if !self.eval_guard_tree(l, guard_site, frame)? {
                    Ok(false)
                } else {
                    self.eval_guard_tree(r, guard_site, frame)
                }
            }
            GuardTree::Or(l, r) => {
                if self.eval_guard_tree(l, guard_site, frame)? {
                    Ok(true)
                } else {
                    self.eval_guard_tree(r, guard_site, frame)
                }
            }
            GuardTree::Atom {
                index,
                negated,
                expr,
            } => {
                let raw = match self.eval(expr, frame)? {
                    Value::Bool(b) => b,
                    other => {
                        // Unreachable on checked programs.
                        return Err(RuntimeError {
                            span: expr.span(),
                            kind: ExceptionKind::Internal,
                            message: format!("guard atom evaluated to non-bool {other}"),
                        });
                    }
                };
                let outcome = raw != *negated;
                self.events.push(TraceEvent::Branch {
                    method: frame.method_id.clone(),
                    guard_site,
                    atom: *index,
                    outcome,
                });
                Ok(outcome)
            }
        }
    }

    fn assign(&mut self, target: &Expr, value: Value, frame: &mut Frame) -> RunResult<()> {
        match target {
            Expr::Var { name, span } => {
                if frame.set(name, value.clone()) {
                    return Ok(());
                }
                // Own field: static first on the declaring chain, else
                // instance field through `this`.
                let class = frame.class.clone();
                if let Some((owner, field)) = self.index.find_field(&class, name) {
                    let owner_name = owner.decl.name.clone();
                    let field_name = field.name.clone();
                    if field.is_static {
                        self.statics.insert((owner_name, field_name), value);
                        return Ok(());
                    }
                    let this = frame.this.clone().ok_or_else(|| RuntimeError {
                        span: *span,
                        kind: ExceptionKind::NullReceiver,
                        message: format!("no instance for field `{name}`"),
                    })?;
                    this.borrow_mut()
                        .fields
                        .insert((owner_name, field_name), value);
                    return Ok(());
                }
                Err(RuntimeError {
                    span: *span,
                    kind: ExceptionKind::Internal,
                    message: format!("unknown assignment target `{name}`"),
                })
            }
            Expr::FieldAccess { base, name, span } => {
                if let Some(class) = self.static_base(base, frame) {
                    let (owner, _) = self
                        .index
                        .find_field(&class, name)
                        .expect("checked static field");
                    let owner_name = owner.decl.name.clone();
                    self.statics.insert((owner_name, name.clone()), value);
                    return Ok(());
                }
                let obj = self.eval_receiver(base, frame, *span)?;
                let class = obj.borrow().class.clone();
                let (owner, _) = self
                    .index
                    .find_field(&class, name)
                    .expect("checked instance field");
                let owner_name = owner.decl.name.clone();
                obj.borrow_mut()
                    .fields
                    .insert((owner_name, name.clone()), value);
                Ok(())
            }
            _ => unreachable!("parser restricts assignment targets"),
        }
    }

    /// `Some(class)` when the base expression is a class name rather than a
    /// value (static member access).
    fn static_base(&self, base: &Expr, frame: &Frame) -> Option<String> {
        if let Expr::Var { name, .. } = base {
            if frame.get(name).is_none() && self.index.class(name).is_some() {
                return Some(name.clone());
            }
        }
        None
    }

    fn eval_receiver(&mut self, expr: &Expr, frame: &mut Frame, span: Span) -> RunResult<ObjRef> {
        match self.eval(expr, frame)? {
            Value::Obj(o) => Ok(o),
            Value::Null => Err(RuntimeError {
                span,
                kind: ExceptionKind::NullReceiver,
                message: "receiver is null".to_string(),
            }),
            other => Err(RuntimeError {
                span,
                kind: ExceptionKind::Internal,
                message: format!("receiver is not an object: {other}"),
            }),
        }
    }

    fn eval(&mut self, expr: &Expr, frame: &mut Frame) -> RunResult<Value> {
        self.step(expr.span())?;
        match expr {
            Expr::IntLit { value, .. } => Ok(Value::Int(*value)),
            Expr::BoolLit { value, .. } => Ok(Value::Bool(*value)),
            Expr::CharLit { value, .. } => Ok(Value::Char(*value)),
            Expr::StrLit { value, .. } => Ok(Value::Str(Rc::new(value.clone()))),
            Expr::Var { name, span } => {
                if let Some(v) = frame.get(name) {
                    return Ok(v.clone());
                }
                let class = frame.class.clone();
                if let Some((owner, field)) = self.index.find_field(&class, name) {
                    let key = (owner.decl.name.clone(), field.name.clone());
                    if field.is_static {
                        return Ok(self.statics[&key].clone());
                    }
                    let this = frame.this.clone().ok_or_else(|| RuntimeError {
                        span: *span,
                        kind: ExceptionKind::NullReceiver,
                        message: format!("no instance for field `{name}`"),
                    })?;
                    let v = this.borrow().fields[&key].clone();
                    return Ok(v);
                }
                Err(RuntimeError {
                    span: *span,
                    kind: ExceptionKind::Internal,
                    message: format!("unknown name `{name}`"),
                })
            }
            Expr::FieldAccess { base, name, span } => {
                if let Some(class) = self.static_base(base, frame) {
                    let (owner, _) = self
                        .index
                        .find_field(&class, name)
                        .expect("checked static field");
                    let key = (owner.decl.name.clone(), name.clone());
                    return Ok(self.statics[&key].clone());
                }
                let obj = self.eval_receiver(base, frame, *span)?;
                let class = obj.borrow().class.clone();
                let (owner, _) = self
                    .index
                    .find_field(&class, name)
                    .expect("checked instance field");
                let key = (owner.decl.name.clone(), name.clone());
                let v = obj.borrow().fields[&key].clone();
                Ok(v)
            }
            Expr::Unary { op, expr: inner, span } => {
                let v = self.eval(inner, frame)?;
                match (op, v) {
                    (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnOp::Neg, Value::Int(i)) => Ok(Value::Int(i.wrapping_neg())),
                    (_, other) => Err(RuntimeError {
                        span: *span,
                        kind: ExceptionKind::Internal,
                        message: format!("bad operand {other}"),
                    }),
                }
            }
            Expr::Binary { op, lhs, rhs, span } => {
                // Short-circuit operators outside guard position.
                if *op == BinOp::And {
                    let l = self.eval_bool(lhs, frame)?;
                    if !l {
                        return Ok(Value::Bool(false));
                    }
                    return Ok(Value::Bool(self.eval_bool(rhs, frame)?));
                }
                if *op == BinOp::Or {
                    let l = self.eval_bool(lhs, frame)?;
                    if l {
                        return Ok(Value::Bool(true));
                    }
                    return Ok(Value::Bool(self.eval_bool(rhs, frame)?));
                }
                let l = self.eval(lhs, frame)?;
                let r = self.eval(rhs, frame)?;
                self.binary(*op, l, r, *span)
            }
            Expr::BuiltinCall { builtin, args, span } => self.builtin(*builtin, args, frame, *span),
            Expr::New { class, .. } => Ok(Value::Obj(self.instantiate(class))),
            Expr::Call {
                receiver,
                name,
                args,
                span,
            } => {
                let arg_values = self.eval_args(args, frame)?;
                match receiver {
                    None => {
                        // Own-class call: static target or dispatch on this.
                        let class = frame.class.clone();
                        let decl = self
                            .select_runtime_method(&class, name, &arg_values)
                            .ok_or_else(|| RuntimeError {
                                span: *span,
                                kind: ExceptionKind::Internal,
                                message: format!("unknown method `{name}`"),
                            })?;
                        if decl.is_static {
                            self.call_decl(&decl, None, arg_values, *span)
                        } else {
                            let this = frame.this.clone().ok_or_else(|| RuntimeError {
                                span: *span,
                                kind: ExceptionKind::NullReceiver,
                                message: format!("no instance for call to `{name}`"),
                            })?;
                            let runtime_class = this.borrow().class.clone();
                            let target = self
                                .index
                                .resolve_dispatch(&runtime_class, &decl.signature())
                                .expect("checked dispatch")
                                .clone();
                            self.call_decl(&target, Some(this), arg_values, *span)
                        }
                    }
                    Some(base) => {
                        if let Some(class) = self.static_base(base, frame) {
                            let decl = self
                                .select_runtime_method(&class, name, &arg_values)
                                .expect("checked static call");
                            return self.call_decl(&decl, None, arg_values, *span);
                        }
                        let obj = self.eval_receiver(base, frame, *span)?;
                        let runtime_class = obj.borrow().class.clone();
                        let decl = self
                            .select_runtime_method(&runtime_class, name, &arg_values)
                            .ok_or_else(|| RuntimeError {
                                span: *span,
                                kind: ExceptionKind::Internal,
                                message: format!("unknown method `{name}`"),
                            })?;
                        self.call_decl(&decl, Some(obj), arg_values, *span)
                    }
                }
            }
            Expr::ReflectCall {
                receiver,
                class,
                method,
                args,
                span,
            } => {
                let arg_values = self.eval_args(args, frame)?;
                let decl = self
                    .index
                    .class(class)
                    .and_then(|c| {
                        c.decl
                            .methods
                            .iter()
                            .find(|m| m.name == *method && self.args_match(&m.params, &arg_values))
                    })
                    .cloned()
                    .ok_or_else(|| RuntimeError {
                        span: *span,
                        kind: ExceptionKind::Internal,
                        message: format!("no reflective target `{class}#{method}`"),
                    })?;
                if decl.is_static {
                    self.call_decl(&decl, None, arg_values, *span)
                } else {
                    let recv = receiver.as_ref().ok_or_else(|| RuntimeError {
                        span: *span,
                        kind: ExceptionKind::NullReceiver,
                        message: "reflective instance call without receiver".to_string(),
                    })?;
                    let obj = self.eval_receiver(recv, frame, *span)?;
                    // Private targets are invoked exactly; public instance
                    // targets dispatch on the runtime class, like
                    // Method.invoke.
                    let target = if decl.access == Access::Private {
                        decl
                    } else {
                        let runtime_class = obj.borrow().class.clone();
                        self.index
                            .resolve_dispatch(&runtime_class, &decl.signature())
                            .unwrap_or(&decl)
                            .clone()
                    };
                    self.call_decl(&target, Some(obj), arg_values, *span)
                }
            }
        }
    }

    fn eval_bool(&mut self, expr: &Expr, frame: &mut Frame) -> RunResult<bool> {
        match self.eval(expr, frame)? {
            Value::Bool(b) => Ok(b),
            other => Err(RuntimeError {
                span: expr.span(),
                kind: ExceptionKind::Internal,
                message: format!("expected bool, found {other}"),
            }),
        }
    }

    fn eval_args(&mut self, args: &[Expr], frame: &mut Frame) -> RunResult<Vec<Value>> {
        args.iter().map(|a| self.eval(a, frame)).collect()
    }

    fn args_match(&self, params: &[Param], args: &[Value]) -> bool {
        params.len() == args.len()
            && params.iter().zip(args).all(|(p, a)| match (&p.ty, a) {
                (Type::Int, Value::Int(_)) => true,
                (Type::Bool, Value::Bool(_)) => true,
                (Type::Char, Value::Char(_)) => true,
                (Type::Str, Value::Str(_)) => true,
                (Type::Class(_), Value::Null) => true,
                (Type::Class(want), Value::Obj(o)) => {
                    self.index.is_subclass_of(&o.borrow().class, want)
                }
                _ => false,
            })
    }

    fn select_runtime_method(
        &self,
        class: &str,
        name: &str,
        args: &[Value],
    ) -> Option<MethodDecl> {
        self.index
            .methods_named(class, name)
            .into_iter()
            .find(|m| self.args_match(&m.params, args))
            .cloned()
    }

    fn binary(&mut self, op: BinOp, l: Value, r: Value, span: Span) -> RunResult<Value> {
        use BinOp::*;
        let v = match (op, &l, &r) {
            (Add, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_add(*b)),
            (Sub, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_sub(*b)),
            (Mul, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_mul(*b)),
            (Div, Value::Int(a), Value::Int(b)) => {
                if *b == 0 {
                    return Err(RuntimeError {
                        span,
                        kind: ExceptionKind::DivisionByZero,
                        message: format!("{a} / 0"),
                    });
                }
                Value::Int(a.wrapping_div(*b))
            }
            (Rem, Value::Int(a), Value::Int(b)) => {
                if *b == 0 {
                    return Err(RuntimeError {
                        span,
                        kind: ExceptionKind::DivisionByZero,
                        message: format!("{a} % 0"),
                    });
                }
                Value::Int(a.wrapping_rem(*b))
            }
            (Lt, Value::Int(a), Value::Int(b)) => Value::Bool(a < b),
            (Le, Value::Int(a), Value::Int(b)) => Value::Bool(a <= b),
            (Gt, Value::Int(a), Value::Int(b)) => Value::Bool(a > b),
            (Ge, Value::Int(a), Value::Int(b)) => Value::Bool(a >= b),
            (Lt, Value::Char(a), Value::Char(b)) => Value::Bool(a < b),
            (Le, Value::Char(a), Value::Char(b)) => Value::Bool(a <= b),
            (Gt, Value::Char(a), Value::Char(b)) => Value::Bool(a > b),
            (Ge, Value::Char(a), Value::Char(b)) => Value::Bool(a >= b),
            (Eq, a, b) => Value::Bool(value_eq(a, b)),
            (Ne, a, b) => Value::Bool(!value_eq(a, b)),
            _ => {
                return Err(RuntimeError {
                    span,
                    kind: ExceptionKind::Internal,
                    message: format!("bad operands for `{}`: {l}, {r}", op.symbol()),
                })
            }
        };
        Ok(v)
    }

    fn builtin(
        &mut self,
        builtin: Builtin,
        args: &[Expr],
        frame: &mut Frame,
        span: Span,
    ) -> RunResult<Value> {
        let values = self.eval_args(args, frame)?;
        match builtin {
            Builtin::Length => {
                let s = as_str(&values[0], span)?;
                Ok(Value::Int(s.chars().count() as i64))
            }
            Builtin::CharAt => {
                let s = as_str(&values[0], span)?;
                let i = as_int(&values[1], span)?;
                let len = s.chars().count() as i64;
                if i < 0 || i >= len {
                    return Err(RuntimeError {
                        span,
                        kind: ExceptionKind::IndexOutOfBounds,
                        message: format!("charAt index {i} out of bounds for length {len}"),
                    });
                }
                Ok(Value::Char(s.chars().nth(i as usize).unwrap()))
            }
            Builtin::IndexOf => {
                let s = as_str(&values[0], span)?;
                let c = match &values[1] {
                    Value::Char(c) => *c,
                    other => {
                        return Err(RuntimeError {
                            span,
                            kind: ExceptionKind::Internal,
                            message: format!("indexOf expects a char, found {other}"),
                        })
                    }
                };
                let idx = s
                    .chars()
                    .position(|x| x == c)
                    .map(|p| p as i64)
                    .unwrap_or(-1);
                Ok(Value::Int(idx))
            }
            Builtin::Substring => {
                let s = as_str(&values[0], span)?;
                let lo = as_int(&values[1], span)?;
                let hi = as_int(&values[2], span)?;
                let len = s.chars().count() as i64;
                if lo < 0 || hi > len || lo > hi {
                    return Err(RuntimeError {
                        span,
                        kind: ExceptionKind::IndexOutOfBounds,
                        message: format!("substring({lo}, {hi}) out of bounds for length {len}"),
                    });
                }
                let sub: String = s
                    .chars()
                    .skip(lo as usize)
                    .take((hi - lo) as usize)
                    .collect();
                Ok(Value::Str(Rc::new(sub)))
            }
            Builtin::Concat => {
                let a = as_str(&values[0], span)?;
                let b = as_str(&values[1], span)?;
                Ok(Value::Str(Rc::new(format!("{a}{b}"))))
            }
        }
    }
}

fn value_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Char(x), Value::Char(y)) => x == y,
        (Value::Str(x), Value::Str(y)) => x == y,
        _ => false,
    }
}

fn as_str(v: &Value, span: Span) -> RunResult<Rc<String>> {
    match v {
        Value::Str(s) => Ok(s.clone()),
        other => Err(RuntimeError {
            span,
            kind: ExceptionKind::Internal,
            message: format!("expected string, found {other}"),
        }),
    }
}

fn as_int(v: &Value, span: Span) -> RunResult<i64> {
    match v {
        Value::Int(i) => Ok(*i),
        other => Err(RuntimeError {
            span,
            kind: ExceptionKind::Internal,
            message: format!("expected int, found {other}"),
        }),
    }
}
