//! Test-program synthesis: turn an invocation plan plus concrete values
//! into an SJ `Test` class, either reflection-correct or (for negative
//! access tests) with direct access to private members.

use crate::distill::invocation::{InvocationKind, InvocationPlan};
use crate::distill::variables::{SetVia, VariableRequirement};
use crate::lang::ast::*;
use crate::lang::interp::Value;
use crate::span::Span;

/// A concrete assignment for one dependent variable.
#[derive(Debug, Clone)]
pub struct FieldAssignment {
    pub requirement: VariableRequirement,
    pub value: Value,
}

#[derive(Debug, Clone)]
pub struct TestSpec {
    pub plan: InvocationPlan,
    pub fields: Vec<FieldAssignment>,
    pub args: Vec<Value>,
    pub return_type: RetType,
}

const RECEIVER: &str = "receiver";

/// Build the `Test` class AST. With `direct_access`, reflective constructs
/// are replaced by direct member access; on private members that variant
/// must fail `check` with ACCESS_PRIVATE.
pub fn synthesize_test(spec: &TestSpec, direct_access: bool) -> SourceUnit {
    let s = Span::synthetic();
    let mut body: Vec<Stmt> = Vec::new();

    // Static field assignments first.
    for assign in spec.fields.iter().filter(|f| f.requirement.is_static) {
        body.push(field_set_stmt(assign, None, direct_access));
    }

    // Receiver construction for instance plans.
    let receiver_class = spec.plan.receiver_recipe.class();
    if let Some(class) = receiver_class {
        body.push(Stmt::VarDecl {
            ty: Type::Class(class.to_string()),
            name: RECEIVER.to_string(),
            init: Some(Expr::New {
                class: class.to_string(),
                span: s,
            }),
            span: s,
        });
        for assign in spec.fields.iter().filter(|f| !f.requirement.is_static) {
            body.push(field_set_stmt(
                assign,
                Some(Expr::Var {
                    name: RECEIVER.to_string(),
                    span: s,
                }),
                direct_access,
            ));
        }
    }

    // The focal invocation.
    let target = &spec.plan.dispatch_target;
    let args: Vec<Expr> = spec.args.iter().map(|v| value_expr(v)).collect();
    let call = match (&spec.plan.kind, direct_access) {
        (InvocationKind::StaticReflective, false) => Expr::ReflectCall {
            receiver: None,
            class: target.class.clone(),
            method: target.sig.name.clone(),
            args,
            span: s,
        },
        (InvocationKind::StaticReflective, true) | (InvocationKind::StaticDirect, _) => {
            Expr::Call {
                receiver: Some(Box::new(Expr::Var {
                    name: target.class.clone(),
                    span: s,
                })),
                name: target.sig.name.clone(),
                args,
                span: s,
            }
        }
        (InvocationKind::InstanceReflective, false) => Expr::ReflectCall {
            receiver: Some(Box::new(Expr::Var {
                name: RECEIVER.to_string(),
                span: s,
            })),
            class: target.class.clone(),
            method: target.sig.name.clone(),
            args,
            span: s,
        },
        (InvocationKind::InstanceReflective, true) | (InvocationKind::InstanceDirect, _) => {
            Expr::Call {
                receiver: Some(Box::new(Expr::Var {
                    name: RECEIVER.to_string(),
                    span: s,
                })),
                name: target.sig.name.clone(),
                args,
                span: s,
            }
        }
        (InvocationKind::Constructor, _) => Expr::New {
            class: target.class.clone(),
            span: s,
        },
    };
    body.push(match &spec.return_type {
        RetType::Void => Stmt::ExprStmt { expr: call, span: s },
        RetType::Value(ty) => Stmt::VarDecl {
            ty: ty.clone(),
            name: "result".to_string(),
            init: Some(call),
            span: s,
        },
    });

    SourceUnit {
        path: "Test.sj".to_string(),
        classes: vec![ClassDecl {
            name: "Test".to_string(),
            superclass: None,
            fields: Vec::new(),
            methods: vec![MethodDecl {
                owner: "Test".to_string(),
                name: "test".to_string(),
                params: Vec::new(),
                return_type: RetType::Void,
                is_static: true,
                is_abstract: false,
                access: Access::Public,
                body: Some(body),
                span: s,
            }],
            span: s,
        }],
    }
}

fn field_set_stmt(
    assign: &FieldAssignment,
    receiver: Option<Expr>,
    direct_access: bool,
) -> Stmt {
    let s = Span::synthetic();
    let req = &assign.requirement;
    let value = value_expr(&assign.value);
    let use_reflect = req.set_via == SetVia::ReflectSet && !direct_access;
    if use_reflect {
        Stmt::ReflectSet {
            receiver,
            class: req.field.class.clone(),
            field: req.field.name.clone(),
            value,
            span: s,
        }
    } else {
        let target = match receiver {
            Some(recv) => Expr::FieldAccess {
                base: Box::new(recv),
                name: req.field.name.clone(),
                span: s,
            },
            None => Expr::FieldAccess {
                base: Box::new(Expr::Var {
                    name: req.field.class.clone(),
                    span: s,
                }),
                name: req.field.name.clone(),
                span: s,
            },
        };
        Stmt::Assign {
            target,
            value,
            span: s,
        }
    }
}

fn value_expr(value: &Value) -> Expr {
    let s = Span::synthetic();
    match value {
        Value::Int(v) => {
            if *v < 0 {
                Expr::Unary {
                    op: UnOp::Neg,
                    expr: Box::new(Expr::IntLit { value: -v, span: s }),
                    span: s,
                }
            } else {
                Expr::IntLit { value: *v, span: s }
            }
        }
        Value::Bool(v) => Expr::BoolLit { value: *v, span: s },
        Value::Char(v) => Expr::CharLit { value: *v, span: s },
        Value::Str(v) => Expr::StrLit {
            value: v.as_ref().clone(),
            span: s,
        },
        Value::Obj(_) | Value::Null => unreachable!("only primitive values are synthesized"),
    }
}
