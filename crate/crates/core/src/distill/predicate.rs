//! Parameter predicates: per-parameter conjunctions from a closed atom
//! vocabulary, with normalization and decidable intersection.
//!
//! Int parameters carry at most one interval (plus exclusions), bools an
//! equality, chars an allowed/forbidden set, strings an equality and a
//! length interval. Contradictions collapse to the distinguished `Empty`
//! predicate.

use crate::lang::ast::Type;
use crate::lang::interp::Value;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntConstraint {
    pub lo: i64,
    pub hi: i64,
    pub excluded: BTreeSet<i64>,
}

impl IntConstraint {
    fn full() -> Self {
        IntConstraint {
            lo: i64::MIN,
            hi: i64::MAX,
            excluded: BTreeSet::new(),
        }
    }

    fn is_full(&self) -> bool {
        self.lo == i64::MIN && self.hi == i64::MAX && self.excluded.is_empty()
    }

    fn contradictory(&self) -> bool {
        if self.lo > self.hi {
            return true;
        }
        // A small interval may be hollowed out entirely by exclusions.
        let width = (self.hi as i128) - (self.lo as i128) + 1;
        if width <= self.excluded.len() as i128 + 8 {
            let mut v = self.lo;
            loop {
                if !self.excluded.contains(&v) {
                    return false;
                }
                if v == self.hi {
                    break;
                }
                v += 1;
            }
            return true;
        }
        false
    }

    pub fn accepts(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi && !self.excluded.contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharMode {
    In,
    NotIn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharConstraint {
    pub mode: CharMode,
    pub chars: BTreeSet<char>,
}

impl CharConstraint {
    pub fn accepts(&self, c: char) -> bool {
        match self.mode {
            CharMode::In => self.chars.contains(&c),
            CharMode::NotIn => !self.chars.contains(&c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrConstraint {
    pub equals: Option<String>,
    pub len: IntConstraint,
}

impl StrConstraint {
    fn is_full(&self) -> bool {
        self.equals.is_none() && self.len.is_full()
    }

    pub fn accepts(&self, s: &str) -> bool {
        if let Some(want) = &self.equals {
            if want != s {
                return false;
            }
        }
        self.len.accepts(s.chars().count() as i64)
    }
}

/// The normalized constraint on one parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamConstraint {
    Unconstrained,
    Int(IntConstraint),
    Bool(bool),
    Char(CharConstraint),
    Str(StrConstraint),
}

impl ParamConstraint {
    pub fn accepts(&self, v: &Value) -> bool {
        match (self, v) {
            (ParamConstraint::Unconstrained, _) => true,
            (ParamConstraint::Int(c), Value::Int(i)) => c.accepts(*i),
            (ParamConstraint::Bool(b), Value::Bool(v)) => b == v,
            (ParamConstraint::Char(c), Value::Char(ch)) => c.accepts(*ch),
            (ParamConstraint::Str(c), Value::Str(s)) => c.accepts(s),
            _ => false,
        }
    }
}

/// One atom of the closed vocabulary, as harvested from a guard.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    /// Closed interval; `i64::MIN`/`MAX` are unbounded ends.
    IntInterval { lo: i64, hi: i64 },
    IntNe(i64),
    BoolEq(bool),
    CharIn(BTreeSet<char>),
    CharNotIn(BTreeSet<char>),
    StrEq(String),
    /// Constraint on `length(p)`.
    StrLenInterval { lo: i64, hi: i64 },
    StrLenNe(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateParam {
    pub name: String,
    pub ty: Type,
    pub constraint: ParamConstraint,
}

/// A conjunction of per-parameter constraints, or the contradictory `Empty`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamPredicate {
    Empty,
    Conj { params: Vec<PredicateParam> },
}

impl ParamPredicate {
    pub fn unconstrained(params: &[(String, Type)]) -> Self {
        ParamPredicate::Conj {
            params: params
                .iter()
                .map(|(name, ty)| PredicateParam {
                    name: name.clone(),
                    ty: ty.clone(),
                    constraint: ParamConstraint::Unconstrained,
                })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ParamPredicate::Empty)
    }

    pub fn is_unconstrained(&self) -> bool {
        match self {
            ParamPredicate::Empty => false,
            ParamPredicate::Conj { params } => params
                .iter()
                .all(|p| matches!(p.constraint, ParamConstraint::Unconstrained)),
        }
    }

    /// Conjoin an atom onto one parameter, normalizing and collapsing to
    /// `Empty` on contradiction.
    pub fn conjoin(&mut self, param_index: usize, atom: Atom) {
        let ParamPredicate::Conj { params } = self else {
            return;
        };
        let Some(entry) = params.get_mut(param_index) else {
            *self = ParamPredicate::Empty;
            return;
        };
        let current = entry.constraint.clone();
        match merge(current, &entry.ty, atom) {
            Some(next) => entry.constraint = next,
            None => *self = ParamPredicate::Empty,
        }
    }

    pub fn satisfied_by(&self, args: &[Value]) -> bool {
        match self {
            ParamPredicate::Empty => false,
            ParamPredicate::Conj { params } => {
                params.len() == args.len()
                    && params.iter().zip(args).all(|(p, a)| p.constraint.accepts(a))
            }
        }
    }

    /// Render one condition per parameter, paper-style inequalities.
    pub fn render(&self) -> Vec<String> {
        match self {
            ParamPredicate::Empty => vec!["unsatisfiable".to_string()],
            ParamPredicate::Conj { params } => params
                .iter()
                .map(|p| render_param(&p.name, &p.constraint))
                .collect(),
        }
    }
}

fn merge(current: ParamConstraint, ty: &Type, atom: Atom) -> Option<ParamConstraint> {
    let base = match current {
        ParamConstraint::Unconstrained => fresh(ty),
        other => other,
    };
    let merged = match (base, atom) {
        (ParamConstraint::Int(mut c), Atom::IntInterval { lo, hi }) => {
            c.lo = c.lo.max(lo);
            c.hi = c.hi.min(hi);
            ParamConstraint::Int(c)
        }
        (ParamConstraint::Int(mut c), Atom::IntNe(v)) => {
            c.excluded.insert(v);
            ParamConstraint::Int(c)
        }
        (ParamConstraint::Unconstrained, Atom::BoolEq(v)) => ParamConstraint::Bool(v),
        (ParamConstraint::Bool(b), Atom::BoolEq(v)) => {
            if b != v {
                return None;
            }
            ParamConstraint::Bool(b)
        }
        (ParamConstraint::Char(c), Atom::CharIn(set)) => {
            let next = match c.mode {
                CharMode::In => CharConstraint {
                    mode: CharMode::In,
                    chars: c.chars.intersection(&set).copied().collect(),
                },
                CharMode::NotIn => CharConstraint {
                    mode: CharMode::In,
                    chars: set.difference(&c.chars).copied().collect(),
                },
            };
            ParamConstraint::Char(next)
        }
        (ParamConstraint::Char(c), Atom::CharNotIn(set)) => {
            let next = match c.mode {
                CharMode::In => CharConstraint {
                    mode: CharMode::In,
                    chars: c.chars.difference(&set).copied().collect(),
                },
                CharMode::NotIn => CharConstraint {
                    mode: CharMode::NotIn,
                    chars: c.chars.union(&set).copied().collect(),
                },
            };
            ParamConstraint::Char(next)
        }
        (ParamConstraint::Str(mut c), Atom::StrEq(s)) => {
            if let Some(prev) = &c.equals {
                if prev != &s {
                    return None;
                }
            }
            c.equals = Some(s);
            ParamConstraint::Str(c)
        }
        (ParamConstraint::Str(mut c), Atom::StrLenInterval { lo, hi }) => {
            c.len.lo = c.len.lo.max(lo);
            c.len.hi = c.len.hi.min(hi);
            ParamConstraint::Str(c)
        }
        (ParamConstraint::Str(mut c), Atom::StrLenNe(v)) => {
            c.len.excluded.insert(v);
            ParamConstraint::Str(c)
        }
        _ => return None,
    };
    normalize(merged)
}

fn fresh(ty: &Type) -> ParamConstraint {
    match ty {
        Type::Int => ParamConstraint::Int(IntConstraint::full()),
        Type::Bool => ParamConstraint::Unconstrained,
        Type::Char => ParamConstraint::Char(CharConstraint {
            mode: CharMode::NotIn,
            chars: BTreeSet::new(),
        }),
        Type::Str => ParamConstraint::Str(StrConstraint {
            equals: None,
            len: IntConstraint::full(),
        }),
        Type::Class(_) => ParamConstraint::Unconstrained,
    }
}

fn normalize(c: ParamConstraint) -> Option<ParamConstraint> {
    match c {
        ParamConstraint::Int(i) => {
            if i.contradictory() {
                None
            } else if i.is_full() {
                Some(ParamConstraint::Unconstrained)
            } else {
                Some(ParamConstraint::Int(i))
            }
        }
        ParamConstraint::Char(c) => {
            match c.mode {
                CharMode::In if c.chars.is_empty() => None,
                CharMode::NotIn if c.chars.is_empty() => Some(ParamConstraint::Unconstrained),
                _ => Some(ParamConstraint::Char(c)),
            }
        }
        ParamConstraint::Str(s) => {
            if s.len.contradictory() {
                return None;
            }
            if let Some(lit) = &s.equals {
                if !s.len.accepts(lit.chars().count() as i64) {
                    return None;
                }
            }
            if s.is_full() {
                Some(ParamConstraint::Unconstrained)
            } else {
                Some(ParamConstraint::Str(s))
            }
        }
        other => Some(other),
    }
}

/// Pointwise intersection of two predicates over the same parameter list.
pub fn intersect_predicates(a: &ParamPredicate, b: &ParamPredicate) -> ParamPredicate {
    match (a, b) {
        (ParamPredicate::Empty, _) | (_, ParamPredicate::Empty) => ParamPredicate::Empty,
        (ParamPredicate::Conj { params: pa }, ParamPredicate::Conj { params: pb }) => {
            if pa.len() != pb.len() {
                return ParamPredicate::Empty;
            }
            let mut out = Vec::with_capacity(pa.len());
            for (x, y) in pa.iter().zip(pb) {
                match intersect_constraint(&x.constraint, &y.constraint) {
                    Some(c) => out.push(PredicateParam {
                        name: x.name.clone(),
                        ty: x.ty.clone(),
                        constraint: c,
                    }),
                    None => return ParamPredicate::Empty,
                }
            }
            ParamPredicate::Conj { params: out }
        }
    }
}

/// Fold a list of predicates into their intersection; identity is the
/// unconstrained predicate.
pub fn intersect_all(preds: &[ParamPredicate]) -> Option<ParamPredicate> {
    let mut iter = preds.iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, p| intersect_predicates(&acc, p)))
}

fn intersect_constraint(a: &ParamConstraint, b: &ParamConstraint) -> Option<ParamConstraint> {
    match (a, b) {
        (ParamConstraint::Unconstrained, other) | (other, ParamConstraint::Unconstrained) => {
            Some(other.clone())
        }
        (ParamConstraint::Int(x), ParamConstraint::Int(y)) => normalize(ParamConstraint::Int(
            IntConstraint {
                lo: x.lo.max(y.lo),
                hi: x.hi.min(y.hi),
                excluded: x.excluded.union(&y.excluded).copied().collect(),
            },
        )),
        (ParamConstraint::Bool(x), ParamConstraint::Bool(y)) => {
            if x == y {
                Some(ParamConstraint::Bool(*x))
            } else {
                None
            }
        }
        (ParamConstraint::Char(x), ParamConstraint::Char(y)) => {
            let folded = match (x.mode, y.mode) {
                (CharMode::In, CharMode::In) => CharConstraint {
                    mode: CharMode::In,
                    chars: x.chars.intersection(&y.chars).copied().collect(),
                },
                (CharMode::In, CharMode::NotIn) => CharConstraint {
                    mode: CharMode::In,
                    chars: x.chars.difference(&y.chars).copied().collect(),
                },
                (CharMode::NotIn, CharMode::In) => CharConstraint {
                    mode: CharMode::In,
                    chars: y.chars.difference(&x.chars).copied().collect(),
                },
                (CharMode::NotIn, CharMode::NotIn) => CharConstraint {
                    mode: CharMode::NotIn,
                    chars: x.chars.union(&y.chars).copied().collect(),
                },
            };
            normalize(ParamConstraint::Char(folded))
        }
        (ParamConstraint::Str(x), ParamConstraint::Str(y)) => {
            let equals = match (&x.equals, &y.equals) {
                (Some(a), Some(b)) if a != b => return None,
                (Some(a), _) => Some(a.clone()),
                (_, other) => other.clone(),
            };
            normalize(ParamConstraint::Str(StrConstraint {
                equals,
                len: IntConstraint {
                    lo: x.len.lo.max(y.len.lo),
                    hi: x.len.hi.min(y.len.hi),
                    excluded: x.len.excluded.union(&y.len.excluded).copied().collect(),
                },
            }))
        }
        _ => None,
    }
}

fn render_param(name: &str, c: &ParamConstraint) -> String {
    match c {
        ParamConstraint::Unconstrained => format!("{name} unconstrained"),
        ParamConstraint::Bool(b) => format!("{name} == {b}"),
        ParamConstraint::Int(i) => {
            let mut parts = Vec::new();
            match (i.lo, i.hi) {
                (i64::MIN, i64::MAX) => {}
                (i64::MIN, hi) => parts.push(format!("{name} < {}", (hi as i128) + 1)),
                (lo, i64::MAX) => parts.push(format!("{name} >= {lo}")),
                (lo, hi) if lo == hi => parts.push(format!("{name} == {lo}")),
                (lo, hi) => parts.push(format!("{lo} <= {name} < {}", (hi as i128) + 1)),
            }
            for e in &i.excluded {
                parts.push(format!("{name} != {e}"));
            }
            if parts.is_empty() {
                format!("{name} unconstrained")
            } else {
                parts.join(" and ")
            }
        }
        ParamConstraint::Char(c) => {
            let set: String = c.chars.iter().collect();
            match c.mode {
                CharMode::In => format!("{name} in \"{}\"", crate::lang::pretty::escape_str(&set)),
                CharMode::NotIn => {
                    format!("{name} not in \"{}\"", crate::lang::pretty::escape_str(&set))
                }
            }
        }
        ParamConstraint::Str(s) => {
            let mut parts = Vec::new();
            if let Some(lit) = &s.equals {
                parts.push(format!(
                    "{name} == \"{}\"",
                    crate::lang::pretty::escape_str(lit)
                ));
            }
            match (s.len.lo, s.len.hi) {
                (i64::MIN, i64::MAX) => {}
                (i64::MIN, hi) => parts.push(format!("length({name}) < {}", (hi as i128) + 1)),
                (lo, i64::MAX) => parts.push(format!("length({name}) >= {lo}")),
                (lo, hi) if lo == hi => parts.push(format!("length({name}) == {lo}")),
                (lo, hi) => parts.push(format!("{lo} <= length({name}) < {}", (hi as i128) + 1)),
            }
            for e in &s.len.excluded {
                parts.push(format!("length({name}) != {e}"));
            }
            if parts.is_empty() {
                format!("{name} unconstrained")
            } else {
                parts.join(" and ")
            }
        }
    }
}
