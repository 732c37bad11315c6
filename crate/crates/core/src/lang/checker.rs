//! Static semantics for SJ projects.
//!
//! `check` returns the complete, deterministically ordered diagnostic list:
//! type errors, unknown names, access violations, abstract-class misuse,
//! missing returns, and override problems. A project with an empty result is
//! safe to interpret: execution can still raise runtime exceptions (division
//! by zero, bounds, null receivers) but never name or type confusion.

use crate::diag::{sort_diags, DiagCode, Diagnostic};
use crate::lang::ast::*;
use crate::lang::index::ProgramIndex;
use crate::span::Span;
use std::collections::BTreeMap;

pub fn check(project: &[SourceUnit]) -> Vec<Diagnostic> {
    let (index, mut diags) = ProgramIndex::build(project);
    if !diags.is_empty() {
        // Structural problems (duplicates, cycles) make member checking
        // unreliable; report them alone.
        return diags;
    }
    for unit in project {
        for class in &unit.classes {
            check_class(&index, unit, class, &mut diags);
        }
    }
    sort_diags(&mut diags);
    diags
}

fn check_class(
    index: &ProgramIndex,
    unit: &SourceUnit,
    class: &ClassDecl,
    diags: &mut Vec<Diagnostic>,
) {
    let file = &unit.path;

    // Field rules: unique along the whole chain, primitive types, typed
    // initializers.
    let mut seen_fields: BTreeMap<&str, Span> = BTreeMap::new();
    for field in &class.fields {
        if let Some(_prev) = seen_fields.insert(&field.name, field.span) {
            diags.push(Diagnostic::error(
                file,
                field.span,
                DiagCode::DuplicateMember,
                format!("field `{}` is declared twice in `{}`", field.name, class.name),
            ));
        }
        if let Some(sup) = &class.superclass {
            if index.find_field(sup, &field.name).is_some() {
                diags.push(Diagnostic::error(
                    file,
                    field.span,
                    DiagCode::DuplicateMember,
                    format!(
                        "field `{}` hides an inherited field of the same name",
                        field.name
                    ),
                ));
            }
        }
        if !field.declared_type.is_primitive() {
            diags.push(Diagnostic::error(
                file,
                field.span,
                DiagCode::InvalidFieldType,
                format!(
                    "field `{}` must have a primitive type, found `{}`",
                    field.name, field.declared_type
                ),
            ));
        }
        if let Some(init) = &field.initializer {
            if init.ty() != field.declared_type {
                diags.push(Diagnostic::error(
                    file,
                    field.span,
                    DiagCode::TypeMismatch,
                    format!(
                        "initializer of `{}` has type `{}`, expected `{}`",
                        field.name,
                        init.ty(),
                        field.declared_type
                    ),
                ));
            }
        }
    }

    // Method rules: unique signatures per class, legal overrides, abstract
    // modifiers.
    let mut seen_sigs: Vec<MethodSig> = Vec::new();
    for method in &class.methods {
        let sig = method.signature();
        if seen_sigs.contains(&sig) {
            diags.push(Diagnostic::error(
                file,
                method.span,
                DiagCode::DuplicateMember,
                format!("method `{}` is declared twice in `{}`", sig, class.name),
            ));
        } else {
            seen_sigs.push(sig.clone());
        }
        if method.is_abstract {
            if method.is_static {
                diags.push(Diagnostic::error(
                    file,
                    method.span,
                    DiagCode::AbstractBody,
                    format!("abstract method `{}` cannot be static", method.name),
                ));
            }
            if method.access == Access::Private {
                diags.push(Diagnostic::error(
                    file,
                    method.span,
                    DiagCode::AbstractBody,
                    format!("abstract method `{}` cannot be private", method.name),
                ));
            }
        }
        if let Some(sup) = &class.superclass {
            if let Some(inherited) = index.resolve_dispatch(sup, &sig) {
                let legal_override = !inherited.is_static
                    && !method.is_static
                    && inherited.access != Access::Private
                    && method.access != Access::Private
                    && inherited.return_type == method.return_type;
                if !legal_override {
                    diags.push(Diagnostic::error(
                        file,
                        method.span,
                        DiagCode::InvalidOverride,
                        format!(
                            "`{}` conflicts with `{}`: overriding requires matching return \
                             type and non-private instance methods on both sides",
                            sig,
                            inherited.method_ref()
                        ),
                    ));
                }
            }
        }
    }

    // A concrete class must implement every inherited abstract signature.
    if !class.is_abstract() {
        for missing in index.unimplemented_abstract(&class.name) {
            diags.push(Diagnostic::error(
                file,
                class.span,
                DiagCode::MissingOverride,
                format!(
                    "concrete class `{}` does not implement abstract method `{missing}`",
                    class.name
                ),
            ));
        }
    }

    for method in &class.methods {
        if let Some(body) = &method.body {
            let mut ctx = MethodCtx {
                index,
                file,
                class,
                method,
                scopes: vec![BTreeMap::new()],
                diags,
            };
            for p in &method.params {
                ctx.declare(&p.name, p.ty.clone(), p.span);
            }
            let guaranteed = ctx.check_block(body);
            if method.return_type != RetType::Void && !guaranteed {
                ctx.diags.push(Diagnostic::error(
                    file,
                    method.span,
                    DiagCode::MissingReturn,
                    format!(
                        "method `{}` must return `{}` on every path",
                        method.name, method.return_type
                    ),
                ));
            }
        }
    }
}

struct MethodCtx<'a> {
    index: &'a ProgramIndex,
    file: &'a str,
    class: &'a ClassDecl,
    method: &'a MethodDecl,
    scopes: Vec<BTreeMap<String, Type>>,
    diags: &'a mut Vec<Diagnostic>,
}

impl<'a> MethodCtx<'a> {
    fn err(&mut self, span: Span, code: DiagCode, message: String) {
        self.diags
            .push(Diagnostic::error(self.file, span, code, message));
    }

    fn declare(&mut self, name: &str, ty: Type, span: Span) {
        if self.index.class(name).is_some() {
            self.err(
                span,
                DiagCode::DuplicateMember,
                format!("`{name}` is also a class name; rename the variable"),
            );
        }
        if self.lookup_local(name).is_some() {
            self.err(
                span,
                DiagCode::DuplicateParam,
                format!("`{name}` is already declared in this method"),
            );
        }
        self.scopes.last_mut().unwrap().insert(name.to_string(), ty);
    }

    fn lookup_local(&self, name: &str) -> Option<&Type> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    /// Returns whether the block guarantees a return on every path.
    fn check_block(&mut self, block: &Block) -> bool {
        self.scopes.push(BTreeMap::new());
        let mut guaranteed = false;
        for stmt in block {
            if self.check_stmt(stmt) {
                guaranteed = true;
            }
        }
        self.scopes.pop();
        guaranteed
    }

    fn check_stmt(&mut self, stmt: &Stmt) -> bool {
        match stmt {
            Stmt::VarDecl {
                ty, name, init, span,
            } => {
                if let Type::Class(cname) = ty {
                    if self.index.class(cname).is_none() {
                        self.err(
                            *span,
                            DiagCode::UnknownName,
                            format!("unknown type `{cname}`"),
                        );
                    }
                }
                if let Some(e) = init {
                    if let Some(found) = self.type_of(e) {
                        if !self.assignable(ty, &found) {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("cannot initialize `{ty}` variable `{name}` with `{found}`"),
                            );
                        }
                    }
                }
                self.declare(name, ty.clone(), *span);
                false
            }
            Stmt::Assign {
                target,
                value,
                span,
            } => {
                let target_ty = self.type_of_lvalue(target);
                let value_ty = self.type_of(value);
                if let (Some(t), Some(v)) = (target_ty, value_ty) {
                    if !self.assignable(&t, &v) {
                        self.err(
                            *span,
                            DiagCode::TypeMismatch,
                            format!("cannot assign `{v}` to `{t}`"),
                        );
                    }
                }
                false
            }
            Stmt::If {
                guard,
                then_block,
                else_block,
                span,
                ..
            } => {
                self.require_bool(guard, *span);
                let then_ret = self.check_block(then_block);
                let else_ret = match else_block {
                    Some(els) => self.check_block(els),
                    None => false,
                };
                then_ret && else_ret
            }
            Stmt::While { guard, body, span, .. } => {
                self.require_bool(guard, *span);
                self.check_block(body);
                false
            }
            Stmt::Return { value, span } => {
                match (&self.method.return_type, value) {
                    (RetType::Void, None) => {}
                    (RetType::Void, Some(_)) => self.err(
                        *span,
                        DiagCode::TypeMismatch,
                        "void method cannot return a value".to_string(),
                    ),
                    (RetType::Value(want), None) => self.err(
                        *span,
                        DiagCode::TypeMismatch,
                        format!("method must return `{want}`"),
                    ),
                    (RetType::Value(want), Some(e)) => {
                        if let Some(found) = self.type_of(e) {
                            if !self.assignable(want, &found) {
                                self.err(
                                    *span,
                                    DiagCode::TypeMismatch,
                                    format!("return type is `{found}`, expected `{want}`"),
                                );
                            }
                        }
                    }
                }
                true
            }
            Stmt::ExprStmt { expr, .. } => {
                // Void calls are legal only here; check without the
                // value-position restriction.
                self.type_of_allow_void(expr);
                false
            }
            Stmt::ReflectSet {
                receiver,
                class,
                field,
                value,
                span,
            } => {
                self.check_reflect_set(receiver.as_ref(), class, field, value, *span);
                false
            }
        }
    }

    fn require_bool(&mut self, guard: &Expr, span: Span) {
        if let Some(t) = self.type_of(guard) {
            if t != Type::Bool {
                self.err(
                    span,
                    DiagCode::TypeMismatch,
                    format!("condition must be `bool`, found `{t}`"),
                );
            }
        }
    }

    fn assignable(&self, want: &Type, found: &Type) -> bool {
        if want == found {
            return true;
        }
        match (want, found) {
            (Type::Class(sup), Type::Class(sub)) => self.index.is_subclass_of(sub, sup),
            _ => false,
        }
    }

    /// `base` of a field access / receiver position: either a class name
    /// (static access) or an object expression.
    fn classify_base(&mut self, base: &Expr) -> Option<BaseKind> {
        if let Expr::Var { name, .. } = base {
            if self.lookup_local(name).is_none() && self.index.class(name).is_some() {
                return Some(BaseKind::Static(name.clone()));
            }
        }
        let ty = self.type_of(base)?;
        match ty {
            Type::Class(c) => Some(BaseKind::Instance(c)),
            other => {
                self.err(
                    base.span(),
                    DiagCode::TypeMismatch,
                    format!("`{other}` has no members"),
                );
                None
            }
        }
    }

    fn access_field(
        &mut self,
        class: &str,
        name: &str,
        want_static: bool,
        span: Span,
    ) -> Option<Type> {
        let (owner_name, field) = match self.index.find_field(class, name) {
            Some((owner, f)) => (owner.decl.name.clone(), f.clone()),
            None => {
                self.err(
                    span,
                    DiagCode::UnknownName,
                    format!("no field `{name}` on `{class}`"),
                );
                return None;
            }
        };
        if field.is_static != want_static {
            self.err(
                span,
                DiagCode::StaticMisuse,
                format!(
                    "field `{}` is {}; access it through {}",
                    name,
                    if field.is_static { "static" } else { "an instance field" },
                    if field.is_static { "its class name" } else { "an instance" },
                ),
            );
        }
        if field.access == Access::Private && owner_name != self.class.name {
            self.err(
                span,
                DiagCode::AccessPrivate,
                format!("field `{owner_name}#{name}` is private"),
            );
        }
        Some(field.declared_type)
    }

    fn type_of_lvalue(&mut self, target: &Expr) -> Option<Type> {
        match target {
            Expr::Var { name, span } => {
                if let Some(t) = self.lookup_local(name).cloned() {
                    return Some(t);
                }
                // Own-class field (instance or static).
                self.own_field(name, *span)
            }
            Expr::FieldAccess { base, name, span } => match self.classify_base(base)? {
                BaseKind::Static(class) => self.access_field(&class, name, true, *span),
                BaseKind::Instance(class) => self.access_field(&class, name, false, *span),
            },
            other => {
                self.err(
                    other.span(),
                    DiagCode::TypeMismatch,
                    "assignment target must be a variable or field".to_string(),
                );
                None
            }
        }
    }

    fn own_field(&mut self, name: &str, span: Span) -> Option<Type> {
        match self.index.find_field(&self.class.name, name) {
            Some((owner, field)) => {
                let field = field.clone();
                let owner_name = owner.decl.name.clone();
                if field.access == Access::Private && owner_name != self.class.name {
                    self.err(
                        span,
                        DiagCode::AccessPrivate,
                        format!("field `{owner_name}#{name}` is private"),
                    );
                }
                if self.method.is_static && !field.is_static {
                    self.err(
                        span,
                        DiagCode::StaticMisuse,
                        format!("instance field `{name}` is not available in a static method"),
                    );
                }
                Some(field.declared_type)
            }
            None => {
                self.err(
                    span,
                    DiagCode::UnknownName,
                    format!("unknown name `{name}`"),
                );
                None
            }
        }
    }

    fn type_of(&mut self, expr: &Expr) -> Option<Type> {
        let t = self.type_of_allow_void(expr)?;
        match t {
            RetType::Void => {
                self.err(
                    expr.span(),
                    DiagCode::VoidValue,
                    "void call used where a value is required".to_string(),
                );
                None
            }
            RetType::Value(t) => Some(t),
        }
    }

    fn type_of_allow_void(&mut self, expr: &Expr) -> Option<RetType> {
        let value = match expr {
            Expr::IntLit { .. } => Type::Int,
            Expr::BoolLit { .. } => Type::Bool,
            Expr::CharLit { .. } => Type::Char,
            Expr::StrLit { .. } => Type::Str,
            Expr::Var { name, span } => {
                if let Some(t) = self.lookup_local(name).cloned() {
                    t
                } else {
                    self.own_field(name, *span)?
                }
            }
            Expr::FieldAccess { base, name, span } => match self.classify_base(base)? {
                BaseKind::Static(class) => self.access_field(&class, name, true, *span)?,
                BaseKind::Instance(class) => self.access_field(&class, name, false, *span)?,
            },
            Expr::Unary { op, expr: inner, span } => {
                let t = self.type_of(inner)?;
                match op {
                    UnOp::Not => {
                        if t != Type::Bool {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("`!` requires `bool`, found `{t}`"),
                            );
                        }
                        Type::Bool
                    }
                    UnOp::Neg => {
                        if t != Type::Int {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("unary `-` requires `int`, found `{t}`"),
                            );
                        }
                        Type::Int
                    }
                }
            }
            Expr::Binary { op, lhs, rhs, span } => {
                let lt = self.type_of(lhs);
                let rt = self.type_of(rhs);
                let (Some(lt), Some(rt)) = (lt, rt) else {
                    return None;
                };
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                        if lt != Type::Int || rt != Type::Int {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("`{}` requires `int` operands, found `{lt}` and `{rt}`", op.symbol()),
                            );
                        }
                        Type::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        let ordered = (lt == Type::Int && rt == Type::Int)
                            || (lt == Type::Char && rt == Type::Char);
                        if !ordered {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("`{}` compares `int` or `char` operands, found `{lt}` and `{rt}`", op.symbol()),
                            );
                        }
                        Type::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if lt != rt || !lt.is_primitive() {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("`{}` requires equal primitive types, found `{lt}` and `{rt}`", op.symbol()),
                            );
                        }
                        Type::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        if lt != Type::Bool || rt != Type::Bool {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!("`{}` requires `bool` operands, found `{lt}` and `{rt}`", op.symbol()),
                            );
                        }
                        Type::Bool
                    }
                }
            }
            Expr::BuiltinCall { builtin, args, span } => {
                let expected: &[Type] = match builtin {
                    Builtin::Length => &[Type::Str],
                    Builtin::CharAt => &[Type::Str, Type::Int],
                    Builtin::IndexOf => &[Type::Str, Type::Char],
                    Builtin::Substring => &[Type::Str, Type::Int, Type::Int],
                    Builtin::Concat => &[Type::Str, Type::Str],
                };
                for (arg, want) in args.iter().zip(expected) {
                    if let Some(found) = self.type_of(arg) {
                        if &found != want {
                            self.err(
                                *span,
                                DiagCode::TypeMismatch,
                                format!(
                                    "built-in `{}` expects `{want}`, found `{found}`",
                                    builtin.name()
                                ),
                            );
                        }
                    }
                }
                match builtin {
                    Builtin::Length | Builtin::IndexOf => Type::Int,
                    Builtin::CharAt => Type::Char,
                    Builtin::Substring | Builtin::Concat => Type::Str,
                }
            }
            Expr::New { class, span } => {
                match self.index.class(class) {
                    None => {
                        self.err(
                            *span,
                            DiagCode::UnknownName,
                            format!("unknown class `{class}`"),
                        );
                        return None;
                    }
                    Some(_) if self.index.is_abstract(class) => {
                        self.err(
                            *span,
                            DiagCode::AbstractInstantiation,
                            format!("cannot instantiate abstract class `{class}`"),
                        );
                    }
                    Some(_) => {}
                }
                Type::Class(class.clone())
            }
            Expr::Call {
                receiver,
                name,
                args,
                span,
            } => return self.check_call(receiver.as_deref(), name, args, *span),
            Expr::ReflectCall {
                receiver,
                class,
                method,
                args,
                span,
            } => {
                return self.check_reflect_call(receiver.as_deref(), class, method, args, *span)
            }
        };
        Some(RetType::Value(value))
    }

    fn arg_types(&mut self, args: &[Expr]) -> Option<Vec<Type>> {
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            out.push(self.type_of(a)?);
        }
        Some(out)
    }

    fn select_method(
        &mut self,
        class: &str,
        name: &str,
        arg_types: &[Type],
        span: Span,
    ) -> Option<MethodDecl> {
        let candidates: Vec<MethodDecl> = self
            .index
            .methods_named(class, name)
            .into_iter()
            .cloned()
            .collect();
        if candidates.is_empty() {
            self.err(
                span,
                DiagCode::UnknownName,
                format!("no method `{name}` on `{class}`"),
            );
            return None;
        }
        let exact = candidates.iter().find(|m| {
            m.params.len() == arg_types.len()
                && m.params
                    .iter()
                    .zip(arg_types)
                    .all(|(p, a)| self.assignable(&p.ty, a))
        });
        match exact {
            Some(m) => Some(m.clone()),
            None => {
                if candidates.iter().all(|m| m.params.len() != arg_types.len()) {
                    self.err(
                        span,
                        DiagCode::ArityMismatch,
                        format!(
                            "no overload of `{name}` on `{class}` takes {} argument(s)",
                            arg_types.len()
                        ),
                    );
                } else {
                    self.err(
                        span,
                        DiagCode::TypeMismatch,
                        format!("no overload of `{name}` on `{class}` matches the argument types"),
                    );
                }
                None
            }
        }
    }

    fn check_call(
        &mut self,
        receiver: Option<&Expr>,
        name: &str,
        args: &[Expr],
        span: Span,
    ) -> Option<RetType> {
        let arg_types = self.arg_types(args)?;
        let (target_class, is_static_access) = match receiver {
            None => (self.class.name.clone(), false),
            Some(base) => match self.classify_base(base)? {
                BaseKind::Static(c) => (c, true),
                BaseKind::Instance(c) => (c, false),
            },
        };
        let method = self.select_method(&target_class, name, &arg_types, span)?;
        if method.access == Access::Private && method.owner != self.class.name {
            self.err(
                span,
                DiagCode::AccessPrivate,
                format!("method `{}` is private", method.method_ref()),
            );
        }
        match receiver {
            None => {
                if !method.is_static && self.method.is_static {
                    self.err(
                        span,
                        DiagCode::StaticMisuse,
                        format!("instance method `{name}` is not available in a static method"),
                    );
                }
            }
            Some(_) if is_static_access => {
                if !method.is_static {
                    self.err(
                        span,
                        DiagCode::StaticMisuse,
                        format!("`{name}` is an instance method; call it on an instance"),
                    );
                }
            }
            Some(_) => {
                if method.is_static {
                    self.err(
                        span,
                        DiagCode::StaticMisuse,
                        format!("`{name}` is static; call it through its class name"),
                    );
                }
            }
        }
        Some(method.return_type.clone())
    }

    fn check_reflect_call(
        &mut self,
        receiver: Option<&Expr>,
        class: &str,
        method: &str,
        args: &[Expr],
        span: Span,
    ) -> Option<RetType> {
        if self.index.class(class).is_none() {
            self.err(
                span,
                DiagCode::UnknownName,
                format!("unknown class `{class}` in reflective call"),
            );
            return None;
        }
        let arg_types = self.arg_types(args)?;
        let sig = MethodSig {
            name: method.to_string(),
            params: arg_types.clone(),
        };
        // Reflective targets are the class's declared methods; argument
        // types must match a declared signature exactly (no dispatch here).
        let decl = self
            .index
            .class(class)
            .and_then(|c| {
                c.decl.methods.iter().find(|m| {
                    m.name == method
                        && m.params.len() == arg_types.len()
                        && m.params
                            .iter()
                            .zip(&arg_types)
                            .all(|(p, a)| self.assignable(&p.ty, a))
                })
            })
            .cloned();
        let Some(decl) = decl else {
            self.err(
                span,
                DiagCode::UnknownName,
                format!("class `{class}` declares no method `{sig}`"),
            );
            return None;
        };
        if decl.is_abstract {
            self.err(
                span,
                DiagCode::AbstractBody,
                format!("cannot reflectively invoke abstract method `{}`", decl.method_ref()),
            );
        }
        match (decl.is_static, receiver) {
            (true, Some(_)) => self.err(
                span,
                DiagCode::StaticMisuse,
                format!("static method `{method}` takes no receiver"),
            ),
            (false, None) => self.err(
                span,
                DiagCode::StaticMisuse,
                format!("instance method `{method}` requires a receiver"),
            ),
            (false, Some(recv)) => {
                if let Some(t) = self.type_of(recv) {
                    let compatible = matches!(
                        &t,
                        Type::Class(c) if self.index.is_subclass_of(c, class)
                    );
                    if !compatible {
                        self.err(
                            span,
                            DiagCode::TypeMismatch,
                            format!("receiver of type `{t}` is not a `{class}`"),
                        );
                    }
                }
            }
            (true, None) => {}
        }
        Some(decl.return_type)
    }

    fn check_reflect_set(
        &mut self,
        receiver: Option<&Expr>,
        class: &str,
        field: &str,
        value: &Expr,
        span: Span,
    ) {
        if self.index.class(class).is_none() {
            self.err(
                span,
                DiagCode::UnknownName,
                format!("unknown class `{class}` in reflect set"),
            );
            return;
        }
        let Some(decl) = self.index.declared_field(class, field).cloned() else {
            self.err(
                span,
                DiagCode::UnknownName,
                format!("class `{class}` declares no field `{field}`"),
            );
            return;
        };
        if let Some(found) = self.type_of(value) {
            if !self.assignable(&decl.declared_type, &found) {
                self.err(
                    span,
                    DiagCode::TypeMismatch,
                    format!(
                        "cannot assign `{found}` to field `{class}#{field}` of type `{}`",
                        decl.declared_type
                    ),
                );
            }
        }
        match (decl.is_static, receiver) {
            (true, Some(_)) => self.err(
                span,
                DiagCode::StaticMisuse,
                format!("static field `{field}` takes no receiver"),
            ),
            (false, None) => self.err(
                span,
                DiagCode::StaticMisuse,
                format!("instance field `{field}` requires a receiver"),
            ),
            (false, Some(recv)) => {
                if let Some(t) = self.type_of(recv) {
                    let compatible = matches!(
                        &t,
                        Type::Class(c) if self.index.is_subclass_of(c, class)
                    );
                    if !compatible {
                        self.err(
                            span,
                            DiagCode::TypeMismatch,
                            format!("receiver of type `{t}` is not a `{class}`"),
                        );
                    }
                }
            }
            (true, None) => {}
        }
    }
}

enum BaseKind {
    Static(String),
    Instance(String),
}
