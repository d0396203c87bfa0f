//! The conformity and cause indicators.

use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::catalog::RelationKind as R;
use crate::diagnostic::{Diagnostic, Subject};
use crate::model::{EntityId, ModelError, QualityModel};
use crate::rules;

use super::scope::{Population, Scope};

/// `100 × hits / total` kept as an exact fraction. An empty population
/// counts as 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percentage {
    pub hits: u64,
    pub total: u64,
}

impl Percentage {
    pub fn new(hits: u64, total: u64) -> Self {
        assert!(hits <= total, "hits exceed population");
        Percentage { hits, total }
    }

    pub fn ratio(&self) -> Ratio<u64> {
        if self.total == 0 {
            Ratio::from_integer(100)
        } else {
            Ratio::new(100 * self.hits, self.total)
        }
    }

    pub fn as_f64(&self) -> f64 {
        let r = self.ratio();
        *r.numer() as f64 / *r.denom() as f64
    }

    pub fn is_full(&self) -> bool {
        self.hits == self.total
    }
}

impl fmt::Display for Percentage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}%", self.as_f64())
    }
}

impl Serialize for Percentage {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Percentage", 3)?;
        st.serialize_field("value", &self.as_f64())?;
        st.serialize_field("hits", &self.hits)?;
        st.serialize_field("total", &self.total)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformityIndicator {
    pub conformity_pct: Percentage,
    /// Characteristic with the checkers that carry a proof.
    pub checked: Vec<(EntityId, Vec<EntityId>)>,
    pub unchecked: Vec<EntityId>,
    pub notices: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauseIndicator {
    pub cause_pct: Percentage,
    /// Nonconformity with its causes.
    pub explained: Vec<(EntityId, Vec<EntityId>)>,
    pub unexplained: Vec<EntityId>,
    pub notices: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorReport {
    pub scope: Option<EntityId>,
    pub conformity_pct: Percentage,
    pub cause_pct: Percentage,
    pub checked: Vec<(EntityId, Vec<EntityId>)>,
    pub unchecked: Vec<EntityId>,
    pub explained: Vec<(EntityId, Vec<EntityId>)>,
    pub unexplained: Vec<EntityId>,
    pub notices: Vec<Diagnostic>,
}

/// Share of in-scope characteristics determined by at least one
/// observation, measurement or test that has a tangible proof attached.
pub fn conformity_indicator(model: &QualityModel, scope: Scope) -> Result<ConformityIndicator, ModelError> {
    let pop = Population::new(model, scope)?;
    let mut checked = Vec::new();
    let mut unchecked = Vec::new();
    for c in pop.characteristics() {
        let evidence: Vec<EntityId> = model
            .targets(c, R::CheckedBy)
            .into_iter()
            .filter(|chk| model.outgoing(*chk, R::AttachedProof).next().is_some())
            .collect();
        if evidence.is_empty() {
            unchecked.push(c);
        } else {
            checked.push((c, evidence));
        }
    }
    let total = (checked.len() + unchecked.len()) as u64;
    let mut notices = Vec::new();
    if total == 0 {
        notices.push(rules::NO_CHAR.diag(
            scope_subject(scope),
            "no quality characteristic in scope; conformity indicator is 100% by default",
        ));
    }
    Ok(ConformityIndicator {
        conformity_pct: Percentage::new(checked.len() as u64, total),
        checked,
        unchecked,
        notices,
    })
}

/// Share of in-scope nonconformities linked to at least one cause.
pub fn cause_indicator(model: &QualityModel, scope: Scope) -> Result<CauseIndicator, ModelError> {
    let pop = Population::new(model, scope)?;
    let mut explained = Vec::new();
    let mut unexplained = Vec::new();
    for nc in pop.nonconformities() {
        let causes = model.targets(nc, R::CausedBy);
        if causes.is_empty() {
            unexplained.push(nc);
        } else {
            explained.push((nc, causes));
        }
    }
    let total = (explained.len() + unexplained.len()) as u64;
    let mut notices = Vec::new();
    if total == 0 {
        notices.push(rules::NO_NC.diag(
            scope_subject(scope),
            "no nonconformity in scope; cause indicator is 100% by default",
        ));
    }
    Ok(CauseIndicator {
        cause_pct: Percentage::new(explained.len() as u64, total),
        explained,
        unexplained,
        notices,
    })
}

fn scope_subject(scope: Scope) -> Subject {
    match scope {
        Scope::Model => Subject::Model,
        Scope::Entity(id) => Subject::Entity { id },
    }
}

/// Both indicators for one scope.
pub fn indicators(model: &QualityModel, scope: Scope) -> Result<IndicatorReport, ModelError> {
    let c = conformity_indicator(model, scope)?;
    let k = cause_indicator(model, scope)?;
    let mut notices = c.notices;
    notices.extend(k.notices);
    Ok(IndicatorReport {
        scope: match scope {
            Scope::Model => None,
            Scope::Entity(id) => Some(id),
        },
        conformity_pct: c.conformity_pct,
        cause_pct: k.cause_pct,
        checked: c.checked,
        unchecked: c.unchecked,
        explained: k.explained,
        unexplained: k.unexplained,
        notices,
    })
}

/// Both indicators over the whole model.
pub fn indicator_report(model: &QualityModel) -> IndicatorReport {
    indicators(model, Scope::Model).expect("whole-model scope always resolves")
}
