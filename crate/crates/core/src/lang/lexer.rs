//! Tokenizer for `.sj` sources.

use crate::diag::{DiagCode, Diagnostic};
use crate::span::Span;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    // Keywords.
    Class,
    Extends,
    Public,
    Private,
    Static,
    Abstract,
    Int,
    Bool,
    Char,
    Str,
    Void,
    If,
    Else,
    While,
    Return,
    New,
    Reflect,
    True,
    False,
    // Literals and names. `call`/`set` are contextual after `reflect`.
    Ident(String),
    IntLit(i64),
    CharLit(char),
    StrLit(String),
    // Punctuation.
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Dot,
    Hash,
    Assign,
    // Operators.
    EqEq,
    NotEq,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::IntLit(v) => write!(f, "integer `{v}`"),
            Tok::CharLit(c) => write!(f, "char literal `{c:?}`"),
            Tok::StrLit(s) => write!(f, "string literal {s:?}"),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", token_text(other)),
        }
    }
}

fn token_text(tok: &Tok) -> &'static str {
    match tok {
        Tok::Class => "class",
        Tok::Extends => "extends",
        Tok::Public => "public",
        Tok::Private => "private",
        Tok::Static => "static",
        Tok::Abstract => "abstract",
        Tok::Int => "int",
        Tok::Bool => "bool",
        Tok::Char => "char",
        Tok::Str => "string",
        Tok::Void => "void",
        Tok::If => "if",
        Tok::Else => "else",
        Tok::While => "while",
        Tok::Return => "return",
        Tok::New => "new",
        Tok::Reflect => "reflect",
        Tok::True => "true",
        Tok::False => "false",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::Semi => ";",
        Tok::Comma => ",",
        Tok::Dot => ".",
        Tok::Hash => "#",
        Tok::Assign => "=",
        Tok::EqEq => "==",
        Tok::NotEq => "!=",
        Tok::Le => "<=",
        Tok::Ge => ">=",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Percent => "%",
        Tok::AndAnd => "&&",
        Tok::OrOr => "||",
        Tok::Bang => "!",
        _ => "",
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(text: &str, file: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! err {
        ($span:expr, $($arg:tt)*) => {
            return Err(Diagnostic::error(file, $span, DiagCode::SyntaxError, format!($($arg)*)))
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let start = Span::point(line, col);
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let begin = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                    col += 1;
                }
                let word: String = chars[begin..i].iter().collect();
                let tok = match word.as_str() {
                    "class" => Tok::Class,
                    "extends" => Tok::Extends,
                    "public" => Tok::Public,
                    "private" => Tok::Private,
                    "static" => Tok::Static,
                    "abstract" => Tok::Abstract,
                    "int" => Tok::Int,
                    "bool" => Tok::Bool,
                    "char" => Tok::Char,
                    "string" => Tok::Str,
                    "void" => Tok::Void,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "return" => Tok::Return,
                    "new" => Tok::New,
                    "reflect" => Tok::Reflect,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                };
                tokens.push(Token {
                    tok,
                    span: Span::new(start.line, start.col, line, col.saturating_sub(1)),
                });
            }
            '0'..='9' => {
                let begin = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                let digits: String = chars[begin..i].iter().collect();
                let value: i64 = match digits.parse() {
                    Ok(v) => v,
                    Err(_) => err!(start, "integer literal out of range"),
                };
                tokens.push(Token {
                    tok: Tok::IntLit(value),
                    span: Span::new(start.line, start.col, line, col.saturating_sub(1)),
                });
            }
            '\'' => {
                i += 1;
                col += 1;
                if i >= chars.len() {
                    err!(start, "unterminated char literal");
                }
                let value = if chars[i] == '\\' {
                    i += 1;
                    col += 1;
                    if i >= chars.len() {
                        err!(start, "unterminated char literal");
                    }
                    let esc = unescape(chars[i]);
                    match esc {
                        Some(c) => {
                            i += 1;
                            col += 1;
                            c
                        }
                        None => err!(start, "unknown escape `\\{}`", chars[i]),
                    }
                } else if chars[i] == '\'' {
                    err!(start, "empty char literal");
                } else {
                    let c = chars[i];
                    i += 1;
                    col += 1;
                    c
                };
                if i >= chars.len() || chars[i] != '\'' {
                    err!(start, "unterminated char literal");
                }
                i += 1;
                col += 1;
                tokens.push(Token {
                    tok: Tok::CharLit(value),
                    span: Span::new(start.line, start.col, line, col.saturating_sub(1)),
                });
            }
            '"' => {
                i += 1;
                col += 1;
                let mut value = String::new();
                loop {
                    if i >= chars.len() || chars[i] == '\n' {
                        err!(start, "unterminated string literal");
                    }
                    if chars[i] == '"' {
                        i += 1;
                        col += 1;
                        break;
                    }
                    if chars[i] == '\\' {
                        i += 1;
                        col += 1;
                        if i >= chars.len() {
                            err!(start, "unterminated string literal");
                        }
                        match unescape(chars[i]) {
                            Some(c) => value.push(c),
                            None => err!(start, "unknown escape `\\{}`", chars[i]),
                        }
                        i += 1;
                        col += 1;
                    } else {
                        value.push(chars[i]);
                        i += 1;
                        col += 1;
                    }
                }
                tokens.push(Token {
                    tok: Tok::StrLit(value),
                    span: Span::new(start.line, start.col, line, col.saturating_sub(1)),
                });
            }
            _ => {
                let two: Option<Tok> = if i + 1 < chars.len() {
                    match (c, chars[i + 1]) {
                        ('=', '=') => Some(Tok::EqEq),
                        ('!', '=') => Some(Tok::NotEq),
                        ('<', '=') => Some(Tok::Le),
                        ('>', '=') => Some(Tok::Ge),
                        ('&', '&') => Some(Tok::AndAnd),
                        ('|', '|') => Some(Tok::OrOr),
                        _ => None,
                    }
                } else {
                    None
                };
                if let Some(tok) = two {
                    tokens.push(Token {
                        tok,
                        span: Span::new(line, col, line, col + 1),
                    });
                    i += 2;
                    col += 2;
                    continue;
                }
                let one = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '#' => Tok::Hash,
                    '=' => Tok::Assign,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '%' => Tok::Percent,
                    '!' => Tok::Bang,
                    other => err!(start, "unexpected character `{other}`"),
                };
                tokens.push(Token {
                    tok: one,
                    span: Span::point(line, col),
                });
                i += 1;
                col += 1;
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: Span::point(line, col),
    });
    Ok(tokens)
}

fn unescape(c: char) -> Option<char> {
    match c {
        'n' => Some('\n'),
        't' => Some('\t'),
        '0' => Some('\0'),
        '\\' => Some('\\'),
        '\'' => Some('\''),
        '"' => Some('"'),
        _ => None,
    }
}
