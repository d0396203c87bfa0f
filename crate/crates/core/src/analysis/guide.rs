//! The seven-step design guide. Each step is a set of obligations; every
//! unmet obligation becomes a pending question naming the missing instance.

use serde::Serialize;

use crate::catalog::{EntityKind, RelationKind as R};
use crate::diagnostic::{Diagnostic, Subject};
use crate::model::{EntityId, ModelError, QualityModel};
use crate::rules::{self, Rule};

use super::scope::{Population, Scope};

pub const STEP_TITLES: [&str; 7] = [
    "Process context",
    "Product qualification",
    "Characteristic checks",
    "Evidence of checks",
    "Conformity determination",
    "Cause analysis",
    "Action planning",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Complete,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub step: u8,
    pub title: &'static str,
    pub status: StepStatus,
    pub pending: Vec<Diagnostic>,
}

impl StepReport {
    pub fn is_complete(&self) -> bool {
        self.status == StepStatus::Complete
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuideReport {
    pub scope: Option<EntityId>,
    pub steps: Vec<StepReport>,
}

impl GuideReport {
    /// Number of leading steps that are complete.
    pub fn completed_prefix(&self) -> usize {
        self.steps.iter().take_while(|s| s.is_complete()).count()
    }

    pub fn statuses(&self) -> [StepStatus; 7] {
        std::array::from_fn(|i| self.steps[i].status)
    }
}

struct Questions<'a> {
    model: &'a QualityModel,
    rule: &'static Rule,
    out: Vec<Diagnostic>,
}

impl<'a> Questions<'a> {
    fn ask(&mut self, id: EntityId, question: impl FnOnce(&str) -> String) {
        let name = self.model.entity(id).map(|e| e.name.as_str()).unwrap_or("?");
        self.out.push(self.rule.diag(Subject::Entity { id }, question(name)));
    }
}

/// Checks the guide for the whole model or for one process (with its
/// elementary processes). A step counts as complete only once its own
/// obligations are met and every earlier step is complete, so the guide
/// is worked through in order.
pub fn run_guide(model: &QualityModel, scope: Option<EntityId>) -> Result<GuideReport, ModelError> {
    if let Some(id) = scope {
        if model.entity(id).map(|e| e.kind) != Some(EntityKind::Process) {
            return Err(ModelError::UnknownEntity(format!(
                "{} (not a process)",
                model.describe(id)
            )));
        }
    }
    let pop = Population::new(model, scope.map_or(Scope::Model, Scope::Entity))?;
    let checks: [fn(&Population, &mut Questions); 7] = [
        context,
        qualification,
        characteristic_checks,
        evidence,
        determination,
        causes,
        actions,
    ];

    let mut steps = Vec::with_capacity(7);
    let mut blocked_by = None;
    for (i, check) in checks.into_iter().enumerate() {
        let n = i as u8 + 1;
        let mut q = Questions {
            model,
            rule: &rules::G_STEP[i],
            out: Vec::new(),
        };
        check(&pop, &mut q);
        let mut pending = q.out;
        if let Some(earlier) = blocked_by {
            let mut d = rules::G_ORDER.diag(
                Subject::Model,
                format!("step {earlier} is not complete yet; finish it before step {n}"),
            );
            d.step = Some(n);
            pending.insert(0, d);
        }
        let status = if pending.is_empty() {
            StepStatus::Complete
        } else {
            blocked_by.get_or_insert(n);
            StepStatus::Incomplete
        };
        steps.push(StepReport {
            step: n,
            title: STEP_TITLES[i],
            status,
            pending,
        });
    }
    Ok(GuideReport { scope, steps })
}

fn context(pop: &Population, q: &mut Questions) {
    let m = pop.model();
    let roots = pop.roots();
    if roots.is_empty() {
        q.out.push(
            q.rule
                .diag(Subject::Model, "Which manufacturing process is being designed?"),
        );
    }
    for root in roots {
        let sub = Population::new(m, Scope::Entity(root)).expect("root is a process");
        let processes = sub.processes();
        let inputs = sub.inputs_of(&processes);
        let outputs = sub.outputs();
        if inputs.is_empty() {
            q.ask(root, |n| format!("Which product does process `{n}` consume?"));
        }
        if outputs.is_empty() {
            q.ask(root, |n| format!("Which product results from process `{n}`?"));
        }
        if !outputs.iter().any(|p| m.incoming(*p, R::Receives).next().is_some()) {
            q.ask(root, |n| {
                format!("Which customer receives the output of process `{n}`?")
            });
        }
        if !inputs.iter().any(|p| m.incoming(*p, R::Supplies).next().is_some()) {
            q.ask(root, |n| format!("Which supplier provides the input of process `{n}`?"));
        }
    }
}

fn qualification(pop: &Population, q: &mut Questions) {
    let m = pop.model();
    for p in pop.outputs() {
        if m.outgoing(p, R::HasRequirement).next().is_none() {
            q.ask(p, |n| format!("Which requirement applies to product `{n}`?"));
        }
    }
    for r in pop.requirements() {
        if m.outgoing(r, R::Specifies).next().is_none() {
            q.ask(r, |n| {
                format!("Which quality characteristic specifies requirement `{n}`?")
            });
        }
    }
}

fn characteristic_checks(pop: &Population, q: &mut Questions) {
    for c in pop.characteristics() {
        if pop.model().outgoing(c, R::CheckedBy).next().is_none() {
            q.ask(c, |n| {
                format!("Which observation, measurement or test determines characteristic `{n}`?")
            });
        }
    }
}

fn evidence(pop: &Population, q: &mut Questions) {
    for c in pop.checkers() {
        if pop.model().outgoing(c, R::AttachedProof).next().is_none() {
            q.ask(c, |n| format!("Which tangible proof records the result of `{n}`?"));
        }
    }
}

fn determination(pop: &Population, q: &mut Questions) {
    let m = pop.model();
    for p in pop.outputs() {
        let determined = m.incoming(p, R::Concerns).next().is_some();
        if !determined {
            q.ask(p, |n| format!("Is product `{n}` conforming or nonconforming?"));
        }
    }
}

fn causes(pop: &Population, q: &mut Questions) {
    for nc in pop.nonconformities() {
        if pop.model().outgoing(nc, R::CausedBy).next().is_none() {
            q.ask(nc, |n| format!("What causes nonconformity `{n}`?"));
        }
    }
}

/// A nonconformity is handled when an action treats it directly, or when
/// it has causes and every one of them is treated.
pub(crate) fn is_handled(model: &QualityModel, nc: EntityId) -> bool {
    let treated = |id| model.incoming(id, R::Treats).next().is_some();
    if treated(nc) {
        return true;
    }
    let causes = model.targets(nc, R::CausedBy);
    !causes.is_empty() && causes.into_iter().all(treated)
}

fn actions(pop: &Population, q: &mut Questions) {
    for nc in pop.nonconformities() {
        if !is_handled(pop.model(), nc) {
            q.ask(nc, |n| {
                format!("Which action treats nonconformity `{n}` or its causes?")
            });
        }
    }
}
