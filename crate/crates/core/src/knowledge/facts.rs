//! Type facts: the queryable summary of classes, methods, and fields.

use crate::lang::ast::*;
use crate::lang::index::ProgramIndex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFact {
    pub name: String,
    pub superclass: Option<String>,
    pub is_abstract: bool,
    /// With no-argument constructors only, a class is instantiable exactly
    /// when it is not abstract.
    pub instantiable: bool,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFact {
    pub id: String,
    pub owner: String,
    pub sig: MethodSig,
    pub return_type: RetType,
    pub access: Access,
    pub is_static: bool,
    pub is_abstract: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFact {
    pub id: String,
    pub owner: String,
    pub name: String,
    pub declared_type: Type,
    pub access: Access,
    pub is_static: bool,
    pub initializer: Option<ConstValue>,
    /// Constant initializer and no store anywhere in the project: reads can
    /// be folded to the initializer during constraint derivation.
    pub effectively_final: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TypeFacts {
    pub classes: Vec<ClassFact>,
    pub methods: Vec<MethodFact>,
    pub fields: Vec<FieldFact>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DispatchError {
    #[error("NO_SUCH_METHOD: no class on the chain from `{class}` declares `{sig}`")]
    NoSuchMethod { class: String, sig: String },
}

impl TypeFacts {
    pub fn class(&self, name: &str) -> Option<&ClassFact> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn method(&self, id: &str) -> Option<&MethodFact> {
        self.methods.iter().find(|m| m.id == id)
    }

    pub fn method_ref(&self, r: &MethodRef) -> Option<&MethodFact> {
        self.method(&r.id())
    }

    pub fn field(&self, class: &str, name: &str) -> Option<&FieldFact> {
        self.fields
            .iter()
            .find(|f| f.owner == class && f.name == name)
    }

    /// First declaration of `name` walking the chain upward from `class`.
    pub fn find_field_on_chain(&self, class: &str, name: &str) -> Option<&FieldFact> {
        for link in self.super_chain(class) {
            if let Some(f) = self.field(&link, name) {
                return Some(f);
            }
        }
        None
    }

    pub fn super_chain(&self, class: &str) -> Vec<String> {
        let mut chain = Vec::new();
        let mut cur = class.to_string();
        while let Some(fact) = self.class(&cur) {
            if chain.contains(&fact.name) {
                break;
            }
            chain.push(fact.name.clone());
            match &fact.superclass {
                Some(s) => cur = s.clone(),
                None => break,
            }
        }
        chain
    }

    pub fn is_subclass_of(&self, sub: &str, ancestor: &str) -> bool {
        self.super_chain(sub).iter().any(|c| c == ancestor)
    }

    /// Dynamic dispatch over the facts: the overriding method in the lowest
    /// class on the chain from `runtime_class` upward that declares a
    /// matching signature.
    pub fn resolve_dispatch(
        &self,
        runtime_class: &str,
        sig: &MethodSig,
    ) -> Result<&MethodFact, DispatchError> {
        for link in self.super_chain(runtime_class) {
            if let Some(m) = self
                .methods
                .iter()
                .find(|m| m.owner == link && &m.sig == sig)
            {
                return Ok(m);
            }
        }
        Err(DispatchError::NoSuchMethod {
            class: runtime_class.to_string(),
            sig: sig.to_string(),
        })
    }

    /// Concrete classes whose dispatch of `sig` lands on `target`, sorted by
    /// name. Used to pick receivers that actually execute the focal body.
    pub fn concrete_receivers(&self, target: &MethodRef) -> Vec<String> {
        let mut out: Vec<String> = self
            .classes
            .iter()
            .filter(|c| c.instantiable)
            .filter(|c| self.is_subclass_of(&c.name, &target.class))
            .filter(|c| {
                self.resolve_dispatch(&c.name, &target.sig)
                    .map(|m| m.id == target.id())
                    .unwrap_or(false)
            })
            .map(|c| c.name.clone())
            .collect();
        out.sort();
        out
    }
}

/// Extract one fact per class, method, and field, ordered by (file, span).
pub fn extract_type_facts(project: &[SourceUnit], index: &ProgramIndex) -> TypeFacts {
    let mut ordered: Vec<(&SourceUnit, &ClassDecl)> = Vec::new();
    for unit in project {
        for class in &unit.classes {
            ordered.push((unit, class));
        }
    }
    ordered.sort_by(|a, b| (&a.0.path, a.1.span).cmp(&(&b.0.path, b.1.span)));

    // Names that appear as store targets anywhere in the project. A local
    // shadowing a field name conservatively disqualifies the field.
    let mut stored_names: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    for unit in project {
        for class in &unit.classes {
            for method in &class.methods {
                if let Some(body) = &method.body {
                    collect_store_targets(body, &mut stored_names);
                }
            }
        }
    }

    let mut facts = TypeFacts::default();
    for (unit, class) in ordered {
        let is_abstract = index.is_abstract(&class.name);
        facts.classes.push(ClassFact {
            name: class.name.clone(),
            superclass: class.superclass.clone(),
            is_abstract,
            instantiable: !is_abstract,
            file: unit.path.clone(),
        });
        let mut fields: Vec<&FieldDecl> = class.fields.iter().collect();
        fields.sort_by_key(|f| f.span);
        for field in fields {
            facts.fields.push(FieldFact {
                id: format!("{}#{}", class.name, field.name),
                owner: class.name.clone(),
                name: field.name.clone(),
                declared_type: field.declared_type.clone(),
                access: field.access,
                is_static: field.is_static,
                initializer: field.initializer.clone(),
                effectively_final: field.initializer.is_some()
                    && !stored_names.contains(&field.name),
            });
        }
        let mut methods: Vec<&MethodDecl> = class.methods.iter().collect();
        methods.sort_by_key(|m| m.span);
        for method in methods {
            facts.methods.push(MethodFact {
                id: method.method_ref().id(),
                owner: class.name.clone(),
                sig: method.signature(),
                return_type: method.return_type.clone(),
                access: method.access,
                is_static: method.is_static,
                is_abstract: method.is_abstract,
            });
        }
    }
    facts
}

fn collect_store_targets(block: &[Stmt], out: &mut std::collections::BTreeSet<String>) {
    for stmt in block {
        match stmt {
            Stmt::Assign { target, .. } => match target {
                Expr::Var { name, .. } => {
                    out.insert(name.clone());
                }
                Expr::FieldAccess { name, .. } => {
                    out.insert(name.clone());
                }
                _ => {}
            },
            Stmt::ReflectSet { field, .. } => {
                out.insert(field.clone());
            }
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                collect_store_targets(then_block, out);
                if let Some(els) = else_block {
                    collect_store_targets(els, out);
                }
            }
            Stmt::While { body, .. } => collect_store_targets(body, out),
            _ => {}
        }
    }
}

/// Stable map from method id to declaration for a checked project.
pub fn method_table(project: &[SourceUnit]) -> BTreeMap<String, MethodDecl> {
    let mut table = BTreeMap::new();
    for unit in project {
        for class in &unit.classes {
            for method in &class.methods {
                table.insert(method.method_ref().id(), method.clone());
            }
        }
    }
    table
}
