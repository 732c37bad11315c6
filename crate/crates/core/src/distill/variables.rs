//! Dependent variable collection: which fields a test must set, how to set
//! them, and any value the path directly demands of them.

use crate::knowledge::cfg::{Cfg, NodeKind};
use crate::knowledge::deps::{constraint_on_subject, PathDependencies, ReturnConstraint};
use crate::knowledge::paths::CfgPath;
use crate::lang::ast::{Access, Expr, FieldRef, Type};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetVia {
    #[serde(rename = "direct-assignment")]
    DirectAssignment,
    #[serde(rename = "reflect-set")]
    ReflectSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRequirement {
    pub field: FieldRef,
    pub declared_type: Type,
    pub access: Access,
    pub is_static: bool,
    pub set_via: SetVia,
    /// Filled when a guard on the path constrains the field directly
    /// (e.g. `LIMIT > 3` on the true edge).
    pub required_value_hint: Option<ReturnConstraint>,
}

/// One requirement per dependent variable of the path.
pub fn collect_variable_requirements(
    cfg: &Cfg,
    path: &CfgPath,
    deps: &PathDependencies,
) -> Vec<VariableRequirement> {
    deps.variables
        .iter()
        .map(|var| {
            let hint = direct_hint(cfg, path, &var.field);
            VariableRequirement {
                field: var.field.clone(),
                declared_type: var.declared_type.clone(),
                access: var.access,
                is_static: var.is_static,
                set_via: if var.access == Access::Private {
                    SetVia::ReflectSet
                } else {
                    SetVia::DirectAssignment
                },
                required_value_hint: hint,
            }
        })
        .collect()
}

/// A hint exists when some obligation's atom constrains the field itself
/// against a constant in the closed vocabulary.
fn direct_hint(cfg: &Cfg, path: &CfgPath, field: &FieldRef) -> Option<ReturnConstraint> {
    for (node, outcome) in &path.obligations {
        let NodeKind::Branch { info } = &cfg.node(*node).kind else {
            continue;
        };
        let required = *outcome != info.negated;
        let is_subject = |e: &Expr| match e {
            Expr::FieldAccess { base, name, .. } => {
                name == &field.name
                    && matches!(
                        base.as_ref(),
                        Expr::Var { name: b, .. }
                            if b == &field.class || b == crate::knowledge::cfg::SYNTHETIC_THIS
                    )
            }
            _ => false,
        };
        if let Some(c) = constraint_on_subject(&info.expr, &is_subject, required) {
            return Some(c);
        }
    }
    None
}
