//! Recursive-descent parser for `.sj` sources.
//!
//! Syntax errors abort the parse: no partial `SourceUnit` is produced,
//! matching the frontend contract that failed parses yield diagnostics only.

use crate::diag::{DiagCode, Diagnostic};
use crate::lang::ast::*;
use crate::lang::lexer::{lex, Tok, Token};
use crate::span::Span;

pub fn parse(text: &str, path: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    let tokens = lex(text, path).map_err(|d| vec![d])?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        file: path.to_string(),
        guard_site: 0,
    };
    match parser.source_unit() {
        Ok(unit) => Ok(unit),
        Err(diag) => Err(vec![diag]),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: String,
    guard_site: u32,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(format!("expected {what}, found {}", self.peek())))
        }
    }

    fn error(&self, message: String) -> Diagnostic {
        Diagnostic::error(&self.file, self.span(), DiagCode::SyntaxError, message)
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            other => Err(self.error(format!("expected {what}, found {other}"))),
        }
    }

    fn source_unit(&mut self) -> PResult<SourceUnit> {
        let mut classes = Vec::new();
        while *self.peek() != Tok::Eof {
            classes.push(self.class_decl()?);
        }
        Ok(SourceUnit {
            path: self.file.clone(),
            classes,
        })
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let start = self.expect(Tok::Class, "`class`")?;
        let (name, _) = self.ident("class name")?;
        let superclass = if self.eat(Tok::Extends) {
            Some(self.ident("superclass name")?.0)
        } else {
            None
        };
        self.expect(Tok::LBrace, "`{`")?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while *self.peek() != Tok::RBrace {
            self.member(&name, &mut fields, &mut methods)?;
        }
        let end = self.expect(Tok::RBrace, "`}`")?;
        Ok(ClassDecl {
            name,
            superclass,
            fields,
            methods,
            span: start.merge(end),
        })
    }

    fn member(
        &mut self,
        owner: &str,
        fields: &mut Vec<FieldDecl>,
        methods: &mut Vec<MethodDecl>,
    ) -> PResult<()> {
        let start = self.span();
        let access = match self.peek() {
            Tok::Public => {
                self.bump();
                Access::Public
            }
            Tok::Private => {
                self.bump();
                Access::Private
            }
            other => {
                return Err(self.error(format!(
                    "expected `public` or `private` to start a member, found {other}"
                )))
            }
        };
        let is_static = self.eat(Tok::Static);
        let is_abstract = self.eat(Tok::Abstract);

        if is_abstract {
            let ret = self.ret_type()?;
            let (name, _) = self.ident("method name")?;
            let params = self.params()?;
            let end = self.expect(Tok::Semi, "`;` after abstract method")?;
            methods.push(MethodDecl {
                owner: owner.to_string(),
                name,
                params,
                return_type: ret,
                is_static,
                is_abstract: true,
                access,
                body: None,
                span: start.merge(end),
            });
            return Ok(());
        }

        // `void` can only start a method; otherwise decide by the token
        // after the member name.
        if *self.peek() == Tok::Void {
            self.bump();
            let (name, _) = self.ident("method name")?;
            let params = self.params()?;
            self.guard_site = 0;
            let body = self.block()?;
            methods.push(MethodDecl {
                owner: owner.to_string(),
                name,
                params,
                return_type: RetType::Void,
                is_static,
                is_abstract: false,
                access,
                body: Some(body),
                span: start.merge(self.prev_span()),
            });
            return Ok(());
        }

        let ty = self.value_type()?;
        let (name, _) = self.ident("member name")?;
        if *self.peek() == Tok::LParen {
            let params = self.params()?;
            self.guard_site = 0;
            let body = self.block()?;
            methods.push(MethodDecl {
                owner: owner.to_string(),
                name,
                params,
                return_type: RetType::Value(ty),
                is_static,
                is_abstract: false,
                access,
                body: Some(body),
                span: start.merge(self.prev_span()),
            });
        } else {
            let initializer = if self.eat(Tok::Assign) {
                Some(self.const_value()?)
            } else {
                None
            };
            let end = self.expect(Tok::Semi, "`;` after field")?;
            fields.push(FieldDecl {
                name,
                declared_type: ty,
                is_static,
                access,
                initializer,
                span: start.merge(end),
            });
        }
        Ok(())
    }

    fn value_type(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::Int => {
                self.bump();
                Ok(Type::Int)
            }
            Tok::Bool => {
                self.bump();
                Ok(Type::Bool)
            }
            Tok::Char => {
                self.bump();
                Ok(Type::Char)
            }
            Tok::Str => {
                self.bump();
                Ok(Type::Str)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Type::Class(name))
            }
            other => Err(self.error(format!("expected a type, found {other}"))),
        }
    }

    fn ret_type(&mut self) -> PResult<RetType> {
        if *self.peek() == Tok::Void {
            self.bump();
            Ok(RetType::Void)
        } else {
            Ok(RetType::Value(self.value_type()?))
        }
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let start = self.span();
                let ty = self.value_type()?;
                let (name, end) = self.ident("parameter name")?;
                params.push(Param {
                    name,
                    ty,
                    span: start.merge(end),
                });
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(params)
    }

    fn const_value(&mut self) -> PResult<ConstValue> {
        match self.peek().clone() {
            Tok::IntLit(v) => {
                self.bump();
                Ok(ConstValue::Int(v))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::IntLit(v) => {
                        self.bump();
                        Ok(ConstValue::Int(-v))
                    }
                    other => Err(self.error(format!("expected integer literal, found {other}"))),
                }
            }
            Tok::True => {
                self.bump();
                Ok(ConstValue::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(ConstValue::Bool(false))
            }
            Tok::CharLit(c) => {
                self.bump();
                Ok(ConstValue::Char(c))
            }
            Tok::StrLit(s) => {
                self.bump();
                Ok(ConstValue::Str(s))
            }
            other => Err(self.error(format!("expected constant initializer, found {other}"))),
        }
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            stmts.push(self.stmt()?);
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        match self.peek().clone() {
            Tok::If => self.if_stmt(),
            Tok::While => {
                let start = self.bump().span;
                let guard_site = self.guard_site;
                self.guard_site += 1;
                self.expect(Tok::LParen, "`(`")?;
                let guard = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.block()?;
                Ok(Stmt::While {
                    guard_site,
                    guard,
                    body,
                    span: start.merge(self.prev_span()),
                })
            }
            Tok::Return => {
                let start = self.bump().span;
                let value = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                let end = self.expect(Tok::Semi, "`;` after return")?;
                Ok(Stmt::Return {
                    value,
                    span: start.merge(end),
                })
            }
            Tok::Reflect if matches!(self.peek_at(1), Tok::Ident(s) if s == "set") => {
                self.reflect_set()
            }
            Tok::Int | Tok::Bool | Tok::Char | Tok::Str => self.var_decl(),
            Tok::Ident(_) if matches!(self.peek_at(1), Tok::Ident(_)) => self.var_decl(),
            _ => {
                let start = self.span();
                let expr = self.expr()?;
                if self.eat(Tok::Assign) {
                    match expr {
                        Expr::Var { .. } | Expr::FieldAccess { .. } => {}
                        _ => {
                            return Err(Diagnostic::error(
                                &self.file,
                                expr.span(),
                                DiagCode::SyntaxError,
                                "assignment target must be a variable or field".to_string(),
                            ))
                        }
                    }
                    let value = self.expr()?;
                    let end = self.expect(Tok::Semi, "`;` after assignment")?;
                    Ok(Stmt::Assign {
                        target: expr,
                        value,
                        span: start.merge(end),
                    })
                } else {
                    let end = self.expect(Tok::Semi, "`;` after expression")?;
                    Ok(Stmt::ExprStmt {
                        expr,
                        span: start.merge(end),
                    })
                }
            }
        }
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.expect(Tok::If, "`if`")?;
        let guard_site = self.guard_site;
        self.guard_site += 1;
        self.expect(Tok::LParen, "`(`")?;
        let guard = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        let then_block = self.block()?;
        let else_block = if self.eat(Tok::Else) {
            if *self.peek() == Tok::If {
                Some(vec![self.if_stmt()?])
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt::If {
            guard_site,
            guard,
            then_block,
            else_block,
            span: start.merge(self.prev_span()),
        })
    }

    fn var_decl(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let ty = self.value_type()?;
        let (name, _) = self.ident("variable name")?;
        let init = if self.eat(Tok::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        let end = self.expect(Tok::Semi, "`;` after declaration")?;
        Ok(Stmt::VarDecl {
            ty,
            name,
            init,
            span: start.merge(end),
        })
    }

    /// `reflect set [recv.]Class#field = expr;`
    fn reflect_set(&mut self) -> PResult<Stmt> {
        let start = self.expect(Tok::Reflect, "`reflect`")?;
        self.ident("`set`")?;
        let (receiver, class) = self.reflect_target()?;
        let (field, _) = self.ident("field name")?;
        self.expect(Tok::Assign, "`=`")?;
        let value = self.expr()?;
        let end = self.expect(Tok::Semi, "`;`")?;
        Ok(Stmt::ReflectSet {
            receiver,
            class,
            field,
            value,
            span: start.merge(end),
        })
    }

    /// Parses `[recv.]Class#` and leaves the cursor after the `#`.
    /// The receiver, when present, is a primary expression.
    fn reflect_target(&mut self) -> PResult<(Option<Expr>, String)> {
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Hash {
            let (class, _) = self.ident("class name")?;
            self.expect(Tok::Hash, "`#`")?;
            return Ok((None, class));
        }
        let receiver = self.primary()?;
        self.expect(Tok::Dot, "`.` before reflective class name")?;
        let (class, _) = self.ident("class name")?;
        self.expect(Tok::Hash, "`#`")?;
        Ok((Some(receiver), class))
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rhs = self.and_expr()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.equality()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.equality()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn equality(&mut self) -> PResult<Expr> {
        let mut lhs = self.comparison()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => BinOp::Eq,
                Tok::NotEq => BinOp::Ne,
                _ => break,
            };
            self.bump();
            let rhs = self.comparison()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                _ => break,
            };
            self.bump();
            let rhs = self.additive()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.multiplicative()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Bang => {
                let start = self.bump().span;
                let inner = self.unary()?;
                let span = start.merge(inner.span());
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    expr: Box::new(inner),
                    span,
                })
            }
            Tok::Minus => {
                let start = self.bump().span;
                let inner = self.unary()?;
                let span = start.merge(inner.span());
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    expr: Box::new(inner),
                    span,
                })
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.primary()?;
        while self.eat(Tok::Dot) {
            let (name, name_span) = self.ident("member name")?;
            if *self.peek() == Tok::LParen {
                let args = self.args()?;
                let span = expr.span().merge(self.prev_span());
                expr = Expr::Call {
                    receiver: Some(Box::new(expr)),
                    name,
                    args,
                    span,
                };
            } else {
                let span = expr.span().merge(name_span);
                expr = Expr::FieldAccess {
                    base: Box::new(expr),
                    name,
                    span,
                };
            }
        }
        Ok(expr)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::IntLit(value) => {
                self.bump();
                Ok(Expr::IntLit { value, span })
            }
            Tok::True => {
                self.bump();
                Ok(Expr::BoolLit { value: true, span })
            }
            Tok::False => {
                self.bump();
                Ok(Expr::BoolLit { value: false, span })
            }
            Tok::CharLit(value) => {
                self.bump();
                Ok(Expr::CharLit { value, span })
            }
            Tok::StrLit(value) => {
                self.bump();
                Ok(Expr::StrLit { value, span })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::New => {
                self.bump();
                let (class, _) = self.ident("class name")?;
                self.expect(Tok::LParen, "`(`")?;
                let end = self.expect(Tok::RParen, "`)` (constructors take no arguments)")?;
                Ok(Expr::New {
                    class,
                    span: span.merge(end),
                })
            }
            Tok::Reflect => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(kw) if kw == "call" => {
                        self.bump();
                    }
                    other => {
                        return Err(
                            self.error(format!("expected `call` after `reflect`, found {other}"))
                        )
                    }
                }
                let (receiver, class) = self.reflect_target()?;
                let (method, _) = self.ident("method name")?;
                let args = self.args()?;
                Ok(Expr::ReflectCall {
                    receiver: receiver.map(Box::new),
                    class,
                    method,
                    args,
                    span: span.merge(self.prev_span()),
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    let full = span.merge(self.prev_span());
                    if let Some(builtin) = Builtin::from_name(&name) {
                        if args.len() != builtin.arity() {
                            return Err(Diagnostic::error(
                                &self.file,
                                full,
                                DiagCode::SyntaxError,
                                format!(
                                    "built-in `{}` takes {} argument(s), got {}",
                                    builtin.name(),
                                    builtin.arity(),
                                    args.len()
                                ),
                            ));
                        }
                        return Ok(Expr::BuiltinCall {
                            builtin,
                            args,
                            span: full,
                        });
                    }
                    Ok(Expr::Call {
                        receiver: None,
                        name,
                        args,
                        span: full,
                    })
                } else {
                    Ok(Expr::Var { name, span })
                }
            }
            other => Err(self.error(format!("expected an expression, found {other}"))),
        }
    }
}
