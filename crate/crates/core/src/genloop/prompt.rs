//! Structured prompt construction: @persona / @terminology / @instruction
//! with a four-step command block, zero-shot (no in-context examples).

use crate::distill::context::DistilledContext;
use crate::distill::invocation::InvocationKind;
use crate::distill::resolve::ResolutionStatus;
use crate::distill::variables::SetVia;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptPayload {
    pub focal_source: String,
    pub path_obligations: Vec<String>,
    pub context: DistilledContext,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptDocument {
    pub persona: String,
    pub terminology: Vec<(String, String)>,
    pub command: [String; 4],
    pub rules: Vec<String>,
    pub payload: PromptPayload,
}

#[derive(Debug, thiserror::Error)]
#[error("INFEASIBLE_CONTEXT: no input can drive `{0}` down this path")]
pub struct InfeasibleContext(pub String);

pub fn build_prompt(
    context: &DistilledContext,
    focal_source: &str,
) -> Result<PromptDocument, InfeasibleContext> {
    if context.infeasible {
        return Err(InfeasibleContext(context.focal.clone()));
    }

    let persona = "You are an expert SJ developer. You write minimal, correct unit tests \
                   that drive a focal method down one specific control-flow path."
        .to_string();

    let terminology = vec![
        (
            "focal method".to_string(),
            "the method under test for which the unit test is generated".to_string(),
        ),
        (
            "CFG path".to_string(),
            "one entry-to-exit walk through the focal method's control-flow graph, \
             fixed by the branch outcomes listed below"
                .to_string(),
        ),
        (
            "dependent method".to_string(),
            "a method whose return value decides a branch on the target path".to_string(),
        ),
        (
            "dependent variable".to_string(),
            "a field whose value is read by a branch condition on the target path".to_string(),
        ),
        (
            "reflection".to_string(),
            "the `reflect call` and `reflect set` constructs, which bypass access checks \
             for private members at runtime"
                .to_string(),
        ),
    ];

    let step1 = format!(
        "Analyze the focal method `{}` and the target path; every listed branch condition \
         must evaluate to the listed outcome, in order.",
        context.focal
    );
    let step2 = invocation_step(context);
    let step3 = variables_step(context);
    let step4 = constraints_step(context);

    let rules = vec![
        "Do not re-implement, copy, or modify the focal method; invoke the existing implementation.".to_string(),
        "The test entry point is a public static zero-parameter method named `test` in a class named `Test`.".to_string(),
        "Access private methods with `reflect call` and set private fields with `reflect set`; never access them directly.".to_string(),
        "Construct receivers with `new ClassName()`; constructors take no arguments.".to_string(),
        "Output only the complete SJ source of the `Test` class, with no commentary.".to_string(),
    ];

    Ok(PromptDocument {
        persona,
        terminology,
        command: [step1, step2, step3, step4],
        rules,
        payload: PromptPayload {
            focal_source: focal_source.to_string(),
            path_obligations: context.obligations_rendered.clone(),
            context: context.clone(),
        },
    })
}

fn invocation_step(context: &DistilledContext) -> String {
    let plan = &context.invocation;
    let target = &plan.dispatch_target;
    match plan.kind {
        InvocationKind::StaticDirect => format!(
            "Invoke the focal method directly: `{}.{}(...)`.",
            target.class, target.sig.name
        ),
        InvocationKind::StaticReflective => format!(
            "The focal method is private and static: invoke it reflectively with \
             `reflect call {}#{}(...)`.",
            target.class, target.sig.name
        ),
        InvocationKind::InstanceDirect => {
            let recv = plan.receiver_recipe.class().unwrap_or(&target.class);
            format!(
                "Construct a receiver with `new {recv}()` and call `receiver.{}(...)` \
                 (dynamic dispatch reaches `{}`).",
                target.sig.name,
                target.id()
            )
        }
        InvocationKind::InstanceReflective => {
            let recv = plan.receiver_recipe.class().unwrap_or(&target.class);
            format!(
                "The focal method is private: construct a receiver with `new {recv}()` and \
                 invoke it reflectively with `reflect call receiver.{}#{}(...)`.",
                target.class, target.sig.name
            )
        }
        InvocationKind::Constructor => format!(
            "Instantiate the class under test with `new {}()`.",
            target.class
        ),
    }
}

fn variables_step(context: &DistilledContext) -> String {
    if context.variables.is_empty() {
        return "No variables to set: the path reads no fields.".to_string();
    }
    let mut lines = vec!["Set these dependent variables before the call:".to_string()];
    for req in &context.variables {
        let how = match req.set_via {
            SetVia::DirectAssignment => {
                if req.is_static {
                    format!("assign `{}.{} = ...;`", req.field.class, req.field.name)
                } else {
                    format!("assign `receiver.{} = ...;`", req.field.name)
                }
            }
            SetVia::ReflectSet => {
                if req.is_static {
                    format!(
                        "use `reflect set {}#{} = ...;` (the field is private)",
                        req.field.class, req.field.name
                    )
                } else {
                    format!(
                        "use `reflect set receiver.{}#{} = ...;` (the field is private)",
                        req.field.class, req.field.name
                    )
                }
            }
        };
        let hint = match &req.required_value_hint {
            Some(rc) => format!(" — the path requires its value {}", rc.render()),
            None => String::new(),
        };
        lines.push(format!(
            "- `{}` ({} {}): {how}{hint}",
            req.field,
            req.access,
            req.declared_type
        ));
    }
    lines.join("\n")
}

fn constraints_step(context: &DistilledContext) -> String {
    if context.resolutions.is_empty() {
        return "No dependent-method constraints on this path.".to_string();
    }
    let mut lines =
        vec!["Choose arguments so dependent methods return what the path requires:".to_string()];
    for res in &context.resolutions {
        let head = format!(
            "- `{}` must return {}",
            res.callee.id(),
            res.required_return.render()
        );
        match res.status {
            ResolutionStatus::Resolved => {
                lines.push(format!(
                    "{head}; satisfied when: {}",
                    res.predicate.render().join(", ")
                ));
            }
            ResolutionStatus::UnresolvedDelegated => {
                let mut parts = Vec::new();
                let rendered = res.predicate.render();
                if !res.predicate.is_unconstrained() && !res.predicate.is_empty() {
                    parts.push(format!("partially resolved: {}", rendered.join(", ")));
                }
                if !res.unresolved_guards.is_empty() {
                    parts.push(format!(
                        "reason about these guards yourself: {}",
                        res.unresolved_guards.join("; ")
                    ));
                }
                lines.push(format!("{head}; {}", parts.join("; ")));
            }
            ResolutionStatus::Unsatisfiable => {
                lines.push(format!("{head}; no satisfying path exists"));
            }
        }
        for child in &res.children {
            lines.push(format!(
                "  - in turn, `{}` must return {} ({})",
                child.callee.id(),
                child.required_return.render(),
                match child.status {
                    ResolutionStatus::Resolved => child.predicate.render().join(", "),
                    _ => "delegated".to_string(),
                }
            ));
        }
    }
    lines.join("\n")
}

impl PromptDocument {
    /// Deterministic text rendering of the whole document.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("@persona\n");
        out.push_str(&self.persona);
        out.push_str("\n\n@terminology\n");
        for (term, def) in &self.terminology {
            out.push_str(&format!("- {term}: {def}\n"));
        }
        out.push_str("\n@instruction\n@command\n");
        for (i, step) in self.command.iter().enumerate() {
            out.push_str(&format!("{}. {step}\n", i + 1));
        }
        out.push_str("@rule\n");
        for rule in &self.rules {
            out.push_str(&format!("- {rule}\n"));
        }
        out.push_str("\n@payload\nfocal source:\n");
        out.push_str(&self.payload.focal_source);
        out.push_str("\ntarget path:\n");
        for o in &self.payload.path_obligations {
            out.push_str(&format!("- {o}\n"));
        }
        out.push_str("\ndistilled context (JSON):\n");
        out.push_str(&self.payload.context.canonical_json());
        out.push('\n');
        out
    }
}
