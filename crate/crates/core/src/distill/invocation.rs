//! Focal method invocation control: how a test must call the focal method.
//!
//! Static public methods are called directly through their class; private
//! methods (static or instance) go through reflection; instance methods on
//! abstract classes need a concrete subclass receiver whose dispatch still
//! lands on the focal body.

use crate::knowledge::facts::TypeFacts;
use crate::lang::ast::{Access, MethodRef};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvocationKind {
    #[serde(rename = "static-direct")]
    StaticDirect,
    #[serde(rename = "static-reflective")]
    StaticReflective,
    #[serde(rename = "instance-direct")]
    InstanceDirect,
    #[serde(rename = "instance-reflective")]
    InstanceReflective,
    /// Receiver construction as its own plan; unused for method focals but
    /// part of the wire vocabulary.
    #[serde(rename = "constructor")]
    Constructor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceiverRecipe {
    #[serde(rename = "none")]
    None,
    /// `new Owner()` — the focal's own class is concrete.
    #[serde(rename = "new-concrete")]
    NewConcrete(String),
    /// `new Sub()` — lowest concrete subclass (by name) whose dispatch of
    /// the focal signature reaches the focal body.
    #[serde(rename = "new-concrete-subclass")]
    NewConcreteSubclass(String),
}

impl ReceiverRecipe {
    pub fn class(&self) -> Option<&str> {
        match self {
            ReceiverRecipe::None => None,
            ReceiverRecipe::NewConcrete(c) | ReceiverRecipe::NewConcreteSubclass(c) => Some(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvocationPlan {
    pub kind: InvocationKind,
    pub receiver_recipe: ReceiverRecipe,
    pub dispatch_target: MethodRef,
    pub needs_reflection: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlanError {
    #[error("NO_CONCRETE_RECEIVER: no concrete class dispatches `{0}` to its body")]
    NoConcreteReceiver(String),
    #[error("NOT_FOUND: method `{0}` unknown")]
    NotFound(String),
}

pub fn plan_invocation(focal: &MethodRef, facts: &TypeFacts) -> Result<InvocationPlan, PlanError> {
    let fact = facts
        .method_ref(focal)
        .ok_or_else(|| PlanError::NotFound(focal.id()))?;
    let private = fact.access == Access::Private;

    if fact.is_static {
        return Ok(InvocationPlan {
            kind: if private {
                InvocationKind::StaticReflective
            } else {
                InvocationKind::StaticDirect
            },
            receiver_recipe: ReceiverRecipe::None,
            dispatch_target: focal.clone(),
            needs_reflection: private,
        });
    }

    // Prefer receivers whose dispatch executes the focal body itself; an
    // abstract (or fully overridden) focal falls back to the lowest concrete
    // subclass that resolves the signature at all, and the plan records the
    // override actually dispatched to.
    let receivers = facts.concrete_receivers(focal);
    let (receiver, target) = match receivers.first() {
        Some(r) => (r.clone(), focal.clone()),
        None => {
            let mut fallback: Vec<String> = facts
                .classes
                .iter()
                .filter(|c| c.instantiable && facts.is_subclass_of(&c.name, &focal.class))
                .filter(|c| {
                    facts
                        .resolve_dispatch(&c.name, &focal.sig)
                        .map(|m| !m.is_abstract)
                        .unwrap_or(false)
                })
                .map(|c| c.name.clone())
                .collect();
            fallback.sort();
            let receiver = fallback
                .first()
                .ok_or_else(|| PlanError::NoConcreteReceiver(focal.id()))?
                .clone();
            let resolved = facts
                .resolve_dispatch(&receiver, &focal.sig)
                .expect("fallback receiver resolves");
            (
                receiver,
                MethodRef {
                    class: resolved.owner.clone(),
                    sig: resolved.sig.clone(),
                },
            )
        }
    };
    let target_private = facts
        .method_ref(&target)
        .map(|m| m.access == Access::Private)
        .unwrap_or(private);
    let recipe = if receiver == focal.class {
        ReceiverRecipe::NewConcrete(receiver)
    } else {
        ReceiverRecipe::NewConcreteSubclass(receiver)
    };
    Ok(InvocationPlan {
        kind: if target_private {
            InvocationKind::InstanceReflective
        } else {
            InvocationKind::InstanceDirect
        },
        receiver_recipe: recipe,
        dispatch_target: target,
        needs_reflection: target_private,
    })
}
