//! Canonical pretty-printer.
//!
//! The printed form is the normalization format used by golden tests and by
//! prompt payloads: deterministic, four-space indented, minimally
//! parenthesized. `parse(pretty(parse(t)))` is structurally equal to
//! `parse(t)`.

use crate::lang::ast::*;

pub fn pretty_unit(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, class) in unit.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        pretty_class(class, &mut out);
    }
    out
}

pub fn pretty_class(class: &ClassDecl, out: &mut String) {
    out.push_str("class ");
    out.push_str(&class.name);
    if let Some(sup) = &class.superclass {
        out.push_str(" extends ");
        out.push_str(sup);
    }
    out.push_str(" {\n");
    for field in &class.fields {
        out.push_str("    ");
        out.push_str(&field.access.to_string());
        out.push(' ');
        if field.is_static {
            out.push_str("static ");
        }
        out.push_str(&field.declared_type.to_string());
        out.push(' ');
        out.push_str(&field.name);
        if let Some(init) = &field.initializer {
            out.push_str(" = ");
            out.push_str(&const_text(init));
        }
        out.push_str(";\n");
    }
    for method in &class.methods {
        out.push('\n');
        pretty_method_into(method, out);
    }
    out.push_str("}\n");
}

/// Render one method declaration at class indentation, as shown in prompts.
pub fn pretty_method(method: &MethodDecl) -> String {
    let mut out = String::new();
    pretty_method_into(method, &mut out);
    out
}

fn pretty_method_into(method: &MethodDecl, out: &mut String) {
    out.push_str("    ");
    out.push_str(&method.access.to_string());
    out.push(' ');
    if method.is_static {
        out.push_str("static ");
    }
    if method.is_abstract {
        out.push_str("abstract ");
    }
    out.push_str(&method.return_type.to_string());
    out.push(' ');
    out.push_str(&method.name);
    out.push('(');
    for (i, p) in method.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&p.ty.to_string());
        out.push(' ');
        out.push_str(&p.name);
    }
    out.push(')');
    match &method.body {
        None => out.push_str(";\n"),
        Some(body) => {
            out.push_str(" {\n");
            for stmt in body {
                pretty_stmt(stmt, 2, out);
            }
            out.push_str("    }\n");
        }
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn pretty_stmt(stmt: &Stmt, level: usize, out: &mut String) {
    indent(level, out);
    match stmt {
        Stmt::VarDecl { ty, name, init, .. } => {
            out.push_str(&ty.to_string());
            out.push(' ');
            out.push_str(name);
            if let Some(e) = init {
                out.push_str(" = ");
                out.push_str(&expr_text(e));
            }
            out.push_str(";\n");
        }
        Stmt::Assign { target, value, .. } => {
            out.push_str(&expr_text(target));
            out.push_str(" = ");
            out.push_str(&expr_text(value));
            out.push_str(";\n");
        }
        Stmt::If {
            guard,
            then_block,
            else_block,
            ..
        } => {
            out.push_str("if (");
            out.push_str(&expr_text(guard));
            out.push_str(") {\n");
            for s in then_block {
                pretty_stmt(s, level + 1, out);
            }
            indent(level, out);
            out.push('}');
            if let Some(els) = else_block {
                out.push_str(" else ");
                // `else if` chains print without an extra brace level.
                if els.len() == 1 {
                    if let Stmt::If { .. } = &els[0] {
                        let mut inner = String::new();
                        pretty_stmt(&els[0], level, &mut inner);
                        out.push_str(inner.trim_start());
                        return;
                    }
                }
                out.push_str("{\n");
                for s in els {
                    pretty_stmt(s, level + 1, out);
                }
                indent(level, out);
                out.push('}');
            }
            out.push('\n');
        }
        Stmt::While { guard, body, .. } => {
            out.push_str("while (");
            out.push_str(&expr_text(guard));
            out.push_str(") {\n");
            for s in body {
                pretty_stmt(s, level + 1, out);
            }
            indent(level, out);
            out.push_str("}\n");
        }
        Stmt::Return { value, .. } => {
            out.push_str("return");
            if let Some(e) = value {
                out.push(' ');
                out.push_str(&expr_text(e));
            }
            out.push_str(";\n");
        }
        Stmt::ExprStmt { expr, .. } => {
            out.push_str(&expr_text(expr));
            out.push_str(";\n");
        }
        Stmt::ReflectSet {
            receiver,
            class,
            field,
            value,
            ..
        } => {
            out.push_str("reflect set ");
            if let Some(recv) = receiver {
                out.push_str(&with_prec(recv, PREC_PRIMARY));
                out.push('.');
            }
            out.push_str(class);
            out.push('#');
            out.push_str(field);
            out.push_str(" = ");
            out.push_str(&expr_text(value));
            out.push_str(";\n");
        }
    }
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_EQ: u8 = 3;
const PREC_CMP: u8 = 4;
const PREC_ADD: u8 = 5;
const PREC_MUL: u8 = 6;
const PREC_UNARY: u8 = 7;
const PREC_PRIMARY: u8 = 8;

fn op_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => PREC_OR,
        BinOp::And => PREC_AND,
        BinOp::Eq | BinOp::Ne => PREC_EQ,
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => PREC_CMP,
        BinOp::Add | BinOp::Sub => PREC_ADD,
        BinOp::Mul | BinOp::Div | BinOp::Rem => PREC_MUL,
    }
}

/// Render an expression in canonical form.
pub fn expr_text(expr: &Expr) -> String {
    with_prec(expr, 0)
}

fn with_prec(expr: &Expr, min_prec: u8) -> String {
    let (text, prec) = render(expr);
    if prec < min_prec {
        format!("({text})")
    } else {
        text
    }
}

fn render(expr: &Expr) -> (String, u8) {
    match expr {
        Expr::IntLit { value, .. } => (value.to_string(), PREC_PRIMARY),
        Expr::BoolLit { value, .. } => (value.to_string(), PREC_PRIMARY),
        Expr::CharLit { value, .. } => (format!("'{}'", escape_char(*value)), PREC_PRIMARY),
        Expr::StrLit { value, .. } => (format!("\"{}\"", escape_str(value)), PREC_PRIMARY),
        Expr::Var { name, .. } => (name.clone(), PREC_PRIMARY),
        Expr::FieldAccess { base, name, .. } => (
            format!("{}.{}", with_prec(base, PREC_PRIMARY), name),
            PREC_PRIMARY,
        ),
        Expr::Unary { op, expr, .. } => {
            let sym = match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            };
            (
                format!("{sym}{}", with_prec(expr, PREC_UNARY)),
                PREC_UNARY,
            )
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let prec = op_prec(*op);
            (
                format!(
                    "{} {} {}",
                    with_prec(lhs, prec),
                    op.symbol(),
                    with_prec(rhs, prec + 1)
                ),
                prec,
            )
        }
        Expr::Call {
            receiver,
            name,
            args,
            ..
        } => {
            let mut text = String::new();
            if let Some(recv) = receiver {
                text.push_str(&with_prec(recv, PREC_PRIMARY));
                text.push('.');
            }
            text.push_str(name);
            push_args(args, &mut text);
            (text, PREC_PRIMARY)
        }
        Expr::ReflectCall {
            receiver,
            class,
            method,
            args,
            ..
        } => {
            let mut text = String::from("reflect call ");
            if let Some(recv) = receiver {
                text.push_str(&with_prec(recv, PREC_PRIMARY));
                text.push('.');
            }
            text.push_str(class);
            text.push('#');
            text.push_str(method);
            push_args(args, &mut text);
            // Treated as primary: the call syntax is self-delimiting.
            (text, PREC_PRIMARY)
        }
        Expr::BuiltinCall { builtin, args, .. } => {
            let mut text = builtin.name().to_string();
            push_args(args, &mut text);
            (text, PREC_PRIMARY)
        }
        Expr::New { class, .. } => (format!("new {class}()"), PREC_PRIMARY),
    }
}

fn push_args(args: &[Expr], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&expr_text(a));
    }
    out.push(')');
}

pub fn const_text(value: &ConstValue) -> String {
    match value {
        ConstValue::Int(v) => v.to_string(),
        ConstValue::Bool(b) => b.to_string(),
        ConstValue::Char(c) => format!("'{}'", escape_char(*c)),
        ConstValue::Str(s) => format!("\"{}\"", escape_str(s)),
    }
}

pub fn escape_char(c: char) -> String {
    match c {
        '\n' => "\\n".to_string(),
        '\t' => "\\t".to_string(),
        '\0' => "\\0".to_string(),
        '\\' => "\\\\".to_string(),
        '\'' => "\\'".to_string(),
        '"' => "\\\"".to_string(),
        other => other.to_string(),
    }
}

pub fn escape_str(s: &str) -> String {
    s.chars().map(escape_char).collect()
}
