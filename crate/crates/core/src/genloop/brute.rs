//! The deterministic oracle backend: exhaustive input search over fixed
//! domains. It executes the focal invocation directly and emits a test for
//! the first tuple whose branch decisions inside the focal method equal the
//! target path's obligations, in order.

use crate::distill::context::DistilledContext;
use crate::genloop::backend::{BackendDescriptor, BackendFailure, BackendRequest, GeneratorBackend};
use crate::genloop::domains::{TupleIter, ValueDomains};
use crate::genloop::emit::{synthesize_test, FieldAssignment, TestSpec};
use crate::genloop::validate::test_entry;
use crate::knowledge::cfg::NodeKind;
use crate::knowledge::kb::KnowledgeBase;
use crate::lang::ast::{MethodRef, RetType, SourceUnit, Type};
use crate::lang::index::ProgramIndex;
use crate::lang::interp::{invoke, ExecutionTrace, Invocation, Limits, Value};
use crate::lang::pretty::pretty_unit;

#[derive(Debug, Clone)]
pub enum BruteResult {
    Found {
        test_unit: SourceUnit,
        source: String,
        trace: ExecutionTrace,
        spec: TestSpec,
    },
    Unsat,
}

pub struct BruteForce<'a> {
    pub project: &'a [SourceUnit],
    pub index: &'a ProgramIndex,
    pub kb: &'a KnowledgeBase,
    pub domains: &'a ValueDomains,
    pub limits: Limits,
}

impl<'a> BruteForce<'a> {
    /// The target obligations as (guard_site, atom, outcome) triples, which
    /// is what runtime branch events carry.
    fn obligations_as_events(&self, ctx: &DistilledContext) -> Option<Vec<(u32, u32, bool)>> {
        let focal = ctx.focal_ref();
        let cfg = self.kb.cfg_of(&focal).ok()?;
        ctx.path
            .obligations
            .iter()
            .map(|(node, outcome)| match &cfg.node(*node).kind {
                NodeKind::Branch { info } => Some((info.guard_site, info.atom, *outcome)),
                _ => None,
            })
            .collect()
    }

    /// Exhaustively search for an input driving the focal method down the
    /// context's path. Field values default to their initializers first;
    /// if no argument tuple matches and the path has non-final dependent
    /// variables, their values are enumerated as well.
    pub fn generate(&self, ctx: &DistilledContext) -> BruteResult {
        if ctx.infeasible {
            return BruteResult::Unsat;
        }
        let focal = ctx.focal_ref();
        let Some(target_events) = self.obligations_as_events(ctx) else {
            return BruteResult::Unsat;
        };
        let Some(params) = self.kb.param_names.get(&focal.id()) else {
            return BruteResult::Unsat;
        };
        let param_types: Vec<Type> = params.iter().map(|(_, t)| t.clone()).collect();
        if param_types.iter().any(|t| matches!(t, Type::Class(_))) {
            // Object-valued parameters are outside the enumerable domains.
            return BruteResult::Unsat;
        }
        let return_type = self
            .kb
            .facts
            .method_ref(&ctx.invocation.dispatch_target)
            .map(|m| m.return_type.clone())
            .unwrap_or(RetType::Void);

        // Phase 1: fields at their declared defaults.
        let default_fields: Vec<FieldAssignment> = ctx
            .variables
            .iter()
            .map(|req| FieldAssignment {
                requirement: req.clone(),
                value: self.default_field_value(req),
            })
            .collect();
        if let Some(found) =
            self.search_args(ctx, &focal, &param_types, &default_fields, &target_events, &return_type)
        {
            return found;
        }

        // Phase 2: enumerate values for non-final dependent variables.
        let enumerable: Vec<usize> = ctx
            .variables
            .iter()
            .enumerate()
            .filter(|(_, req)| {
                !self
                    .kb
                    .facts
                    .field(&req.field.class, &req.field.name)
                    .map(|f| f.effectively_final)
                    .unwrap_or(false)
            })
            .map(|(i, _)| i)
            .collect();
        if !enumerable.is_empty() {
            let field_types: Vec<Type> = enumerable
                .iter()
                .map(|&i| ctx.variables[i].declared_type.clone())
                .collect();
            for combo in TupleIter::new(self.domains, &field_types) {
                // Skip combos that violate a direct value hint.
                let hint_ok = enumerable.iter().zip(&combo).all(|(&i, value)| {
                    ctx.variables[i]
                        .required_value_hint
                        .as_ref()
                        .map(|h| h.accepts_value(value))
                        .unwrap_or(true)
                });
                if !hint_ok {
                    continue;
                }
                let mut fields = default_fields.clone();
                for (&i, value) in enumerable.iter().zip(&combo) {
                    fields[i].value = value.clone();
                }
                if let Some(found) = self.search_args(
                    ctx,
                    &focal,
                    &param_types,
                    &fields,
                    &target_events,
                    &return_type,
                ) {
                    return found;
                }
            }
        }
        BruteResult::Unsat
    }

    fn default_field_value(&self, req: &crate::distill::variables::VariableRequirement) -> Value {
        self.kb
            .facts
            .field(&req.field.class, &req.field.name)
            .and_then(|f| f.initializer.as_ref())
            .map(Value::from_const)
            .unwrap_or_else(|| Value::default_of(&req.declared_type))
    }

    fn search_args(
        &self,
        ctx: &DistilledContext,
        focal: &MethodRef,
        param_types: &[Type],
        fields: &[FieldAssignment],
        target_events: &[(u32, u32, bool)],
        return_type: &RetType,
    ) -> Option<BruteResult> {
        let base = invocation_for(ctx, fields, Vec::new());
        for args in TupleIter::new(self.domains, param_types) {
            let invocation = Invocation {
                args: args.clone(),
                ..base.clone()
            };
            let outcome = invoke(self.index, &invocation, self.limits);
            if !outcome.trace.focal_reached {
                continue;
            }
            if outcome.trace.branch_events_of(&focal.id()) != target_events {
                continue;
            }
            // Emit the test program and replay it through the real entry
            // point so the recorded trace is the test's own.
            let spec = TestSpec {
                plan: ctx.invocation.clone(),
                fields: fields.to_vec(),
                args,
                return_type: return_type.clone(),
            };
            let unit = synthesize_test(&spec, false);
            let source = pretty_unit(&unit);
            let index = self.index.with_unit(&unit);
            let Ok(trace) = crate::lang::interp::execute(&index, &test_entry(), focal, self.limits)
            else {
                continue;
            };
            return Some(BruteResult::Found {
                test_unit: unit,
                source,
                trace,
                spec,
            });
        }
        None
    }
}

/// Build the direct-invocation form of a context's plan.
pub fn invocation_for(
    ctx: &DistilledContext,
    fields: &[FieldAssignment],
    args: Vec<Value>,
) -> Invocation {
    Invocation {
        target: ctx.invocation.dispatch_target.clone(),
        target_private: ctx.invocation.needs_reflection,
        receiver_class: ctx
            .invocation
            .receiver_recipe
            .class()
            .map(|c| c.to_string()),
        args,
        static_sets: fields
            .iter()
            .filter(|f| f.requirement.is_static)
            .map(|f| {
                (
                    f.requirement.field.class.clone(),
                    f.requirement.field.name.clone(),
                    f.value.clone(),
                )
            })
            .collect(),
        instance_sets: fields
            .iter()
            .filter(|f| !f.requirement.is_static)
            .map(|f| {
                (
                    f.requirement.field.class.clone(),
                    f.requirement.field.name.clone(),
                    f.value.clone(),
                )
            })
            .collect(),
    }
}

/// `GeneratorBackend` wrapper: generation runs the exhaustive search; repair
/// requests re-emit the same (already pre-validated) candidate.
pub struct BruteForceBackend<'a> {
    pub inner: BruteForce<'a>,
}

impl<'a> GeneratorBackend for BruteForceBackend<'a> {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: "brute-force".to_string(),
            deterministic: true,
        }
    }

    fn produce(&mut self, request: &BackendRequest) -> Result<String, BackendFailure> {
        let ctx = &request.prompt().payload.context;
        match self.inner.generate(ctx) {
            BruteResult::Found { source, .. } => Ok(source),
            BruteResult::Unsat => Err(BackendFailure(
                "exhaustive search found no input driving the path".to_string(),
            )),
        }
    }
}
