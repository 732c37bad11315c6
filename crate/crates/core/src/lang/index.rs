//! Project-wide symbol index: class table, superclass chains, member lookup,
//! and dynamic dispatch. Built once after parsing; shared by the checker,
//! the interpreter, and fact extraction.

use crate::diag::{sort_diags, DiagCode, Diagnostic};
use crate::lang::ast::*;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub decl: Arc<ClassDecl>,
    pub file: String,
}

#[derive(Debug, Clone)]
pub struct ProgramIndex {
    classes: BTreeMap<String, ClassInfo>,
    /// Class names in deterministic declaration order (file, then position).
    order: Vec<String>,
}

impl ProgramIndex {
    /// Build the index, reporting duplicate classes, unknown superclasses,
    /// and inheritance cycles. Returns the index even when diagnostics are
    /// produced; callers gate on `check` before trusting it.
    pub fn build(project: &[SourceUnit]) -> (ProgramIndex, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let mut classes = BTreeMap::new();
        let mut order = Vec::new();
        for unit in project {
            for class in &unit.classes {
                if classes.contains_key(&class.name) {
                    diags.push(Diagnostic::error(
                        &unit.path,
                        class.span,
                        DiagCode::DuplicateClass,
                        format!("class `{}` is declared more than once", class.name),
                    ));
                    continue;
                }
                order.push(class.name.clone());
                classes.insert(
                    class.name.clone(),
                    ClassInfo {
                        decl: Arc::new(class.clone()),
                        file: unit.path.clone(),
                    },
                );
            }
        }
        let index = ProgramIndex { classes, order };
        for name in &index.order {
            let info = &index.classes[name];
            if let Some(sup) = &info.decl.superclass {
                if !index.classes.contains_key(sup) {
                    diags.push(Diagnostic::error(
                        &info.file,
                        info.decl.span,
                        DiagCode::UnknownName,
                        format!("unknown superclass `{sup}`"),
                    ));
                }
            }
        }
        // Cycle detection over declared superclass edges.
        for name in &index.order {
            let mut seen = vec![name.clone()];
            let mut cur = name.clone();
            while let Some(sup) = index
                .classes
                .get(&cur)
                .and_then(|c| c.decl.superclass.clone())
            {
                if seen.contains(&sup) {
                    let info = &index.classes[name];
                    diags.push(Diagnostic::error(
                        &info.file,
                        info.decl.span,
                        DiagCode::CyclicInheritance,
                        format!("inheritance cycle through `{sup}`"),
                    ));
                    break;
                }
                seen.push(sup.clone());
                cur = sup;
            }
        }
        sort_diags(&mut diags);
        (index, diags)
    }

    /// A copy of this index extended with the classes of one more unit
    /// (typically a candidate test). Class bodies are shared, not cloned.
    pub fn with_unit(&self, unit: &SourceUnit) -> ProgramIndex {
        let mut next = self.clone();
        for class in &unit.classes {
            if next.classes.contains_key(&class.name) {
                continue;
            }
            next.order.push(class.name.clone());
            next.classes.insert(
                class.name.clone(),
                ClassInfo {
                    decl: Arc::new(class.clone()),
                    file: unit.path.clone(),
                },
            );
        }
        next
    }

    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn class_names(&self) -> &[String] {
        &self.order
    }

    /// The superclass chain starting at `name` (inclusive), stopping at the
    /// root or at the first unknown/cyclic link.
    pub fn super_chain(&self, name: &str) -> Vec<&ClassInfo> {
        let mut chain = Vec::new();
        let mut cur = name.to_string();
        loop {
            let Some(info) = self.classes.get(&cur) else {
                break;
            };
            if chain
                .iter()
                .any(|c: &&ClassInfo| c.decl.name == info.decl.name)
            {
                break;
            }
            chain.push(info);
            match &info.decl.superclass {
                Some(sup) => cur = sup.clone(),
                None => break,
            }
        }
        chain
    }

    pub fn is_subclass_of(&self, sub: &str, ancestor: &str) -> bool {
        self.super_chain(sub)
            .iter()
            .any(|c| c.decl.name == ancestor)
    }

    /// Dynamic dispatch: the method in the lowest class on the chain from
    /// `runtime_class` upward that declares a matching signature.
    pub fn resolve_dispatch(&self, runtime_class: &str, sig: &MethodSig) -> Option<&MethodDecl> {
        for info in self.super_chain(runtime_class) {
            if let Some(m) = info
                .decl
                .methods
                .iter()
                .find(|m| &m.signature() == sig)
            {
                return Some(m);
            }
        }
        None
    }

    /// The method declared exactly on `class` (reflective targeting).
    pub fn declared_method(&self, class: &str, sig: &MethodSig) -> Option<&MethodDecl> {
        self.classes
            .get(class)?
            .decl
            .methods
            .iter()
            .find(|m| &m.signature() == sig)
    }

    /// First declaration of field `name` walking up from `class`.
    pub fn find_field(&self, class: &str, name: &str) -> Option<(&ClassInfo, &FieldDecl)> {
        for info in self.super_chain(class) {
            if let Some(f) = info.decl.fields.iter().find(|f| f.name == name) {
                return Some((info, f));
            }
        }
        None
    }

    /// Field declared exactly on `class` (reflective targeting).
    pub fn declared_field(&self, class: &str, name: &str) -> Option<&FieldDecl> {
        self.classes
            .get(class)?
            .decl
            .fields
            .iter()
            .find(|f| f.name == name)
    }

    /// All methods with the given name on the chain from `class`, lowest
    /// declarations first, shadowed signatures removed.
    pub fn methods_named(&self, class: &str, name: &str) -> Vec<&MethodDecl> {
        let mut out: Vec<&MethodDecl> = Vec::new();
        for info in self.super_chain(class) {
            for m in info.decl.methods.iter().filter(|m| m.name == name) {
                if !out.iter().any(|seen| seen.signature() == m.signature()) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Concrete classes, in declaration order.
    pub fn concrete_classes(&self) -> Vec<&ClassInfo> {
        self.order
            .iter()
            .map(|n| &self.classes[n])
            .filter(|c| !self.is_abstract(&c.decl.name))
            .collect()
    }

    /// A class is abstract iff it declares at least one abstract method.
    /// Inherited-but-unimplemented signatures on a concrete class are check
    /// errors, not abstractness.
    pub fn is_abstract(&self, class: &str) -> bool {
        self.classes
            .get(class)
            .map(|c| c.decl.is_abstract())
            .unwrap_or(false)
    }

    /// Abstract signatures on the chain that `class` does not implement.
    pub fn unimplemented_abstract(&self, class: &str) -> Vec<MethodRef> {
        let chain = self.super_chain(class);
        let mut missing = Vec::new();
        for info in &chain {
            for m in info.decl.methods.iter().filter(|m| m.is_abstract) {
                let sig = m.signature();
                let implemented = chain.iter().any(|c| {
                    c.decl
                        .methods
                        .iter()
                        .any(|cand| !cand.is_abstract && cand.signature() == sig)
                });
                if !implemented && !missing.iter().any(|r: &MethodRef| r.sig == sig) {
                    missing.push(m.method_ref());
                }
            }
        }
        missing
    }
}
