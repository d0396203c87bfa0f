//! The fixed meta-model: entity kinds with their subtype forest, relation
//! kinds with signatures and multiplicities, and the per-kind attribute
//! registry used by the relational export.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::ModelError;

/// A meta-class of the quality meta-model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Process,
    Product,
    Customer,
    Supplier,
    Requirement,
    ProductRequirement,
    ProcessRequirement,
    ShapeRequirement,
    SpaceRequirement,
    TimeRequirement,
    QualityCharacteristic,
    Observation,
    Measurement,
    Test,
    TangibleProof,
    Control,
    Validation,
    Checking,
    Conformity,
    Nonconformity,
    Cause,
    MachineCause,
    MethodCause,
    MaterialCause,
    ManpowerCause,
    EnvironmentCause,
    Action,
    CorrectiveAction,
    PreventiveAction,
    ScheduledPreventiveAction,
    ConditionalPreventiveAction,
    PredictivePreventiveAction,
}

impl EntityKind {
    pub const ALL: [EntityKind; 32] = [
        EntityKind::Process,
        EntityKind::Product,
        EntityKind::Customer,
        EntityKind::Supplier,
        EntityKind::Requirement,
        EntityKind::ProductRequirement,
        EntityKind::ProcessRequirement,
        EntityKind::ShapeRequirement,
        EntityKind::SpaceRequirement,
        EntityKind::TimeRequirement,
        EntityKind::QualityCharacteristic,
        EntityKind::Observation,
        EntityKind::Measurement,
        EntityKind::Test,
        EntityKind::TangibleProof,
        EntityKind::Control,
        EntityKind::Validation,
        EntityKind::Checking,
        EntityKind::Conformity,
        EntityKind::Nonconformity,
        EntityKind::Cause,
        EntityKind::MachineCause,
        EntityKind::MethodCause,
        EntityKind::MaterialCause,
        EntityKind::ManpowerCause,
        EntityKind::EnvironmentCause,
        EntityKind::Action,
        EntityKind::CorrectiveAction,
        EntityKind::PreventiveAction,
        EntityKind::ScheduledPreventiveAction,
        EntityKind::ConditionalPreventiveAction,
        EntityKind::PredictivePreventiveAction,
    ];

    pub fn name(self) -> &'static str {
        use EntityKind::*;
        match self {
            Process => "Process",
            Product => "Product",
            Customer => "Customer",
            Supplier => "Supplier",
            Requirement => "Requirement",
            ProductRequirement => "ProductRequirement",
            ProcessRequirement => "ProcessRequirement",
            ShapeRequirement => "ShapeRequirement",
            SpaceRequirement => "SpaceRequirement",
            TimeRequirement => "TimeRequirement",
            QualityCharacteristic => "QualityCharacteristic",
            Observation => "Observation",
            Measurement => "Measurement",
            Test => "Test",
            TangibleProof => "TangibleProof",
            Control => "Control",
            Validation => "Validation",
            Checking => "Checking",
            Conformity => "Conformity",
            Nonconformity => "Nonconformity",
            Cause => "Cause",
            MachineCause => "MachineCause",
            MethodCause => "MethodCause",
            MaterialCause => "MaterialCause",
            ManpowerCause => "ManpowerCause",
            EnvironmentCause => "EnvironmentCause",
            Action => "Action",
            CorrectiveAction => "CorrectiveAction",
            PreventiveAction => "PreventiveAction",
            ScheduledPreventiveAction => "ScheduledPreventiveAction",
            ConditionalPreventiveAction => "ConditionalPreventiveAction",
            PredictivePreventiveAction => "PredictivePreventiveAction",
        }
    }

    /// Direct supertype, if any.
    pub fn parent(self) -> Option<EntityKind> {
        use EntityKind::*;
        match self {
            ProductRequirement | ProcessRequirement => Some(Requirement),
            ShapeRequirement | SpaceRequirement | TimeRequirement => Some(ProductRequirement),
            MachineCause | MethodCause | MaterialCause | ManpowerCause | EnvironmentCause => Some(Cause),
            CorrectiveAction | PreventiveAction => Some(Action),
            ScheduledPreventiveAction | ConditionalPreventiveAction | PredictivePreventiveAction => {
                Some(PreventiveAction)
            }
            _ => None,
        }
    }

    /// True when `self` is `other` or one of its descendants.
    pub fn is_a(self, other: EntityKind) -> bool {
        let mut cur = Some(self);
        while let Some(k) = cur {
            if k == other {
                return true;
            }
            cur = k.parent();
        }
        false
    }

    /// Chain from the root supertype down to `self`.
    pub fn lineage(self) -> Vec<EntityKind> {
        let mut chain = vec![self];
        let mut cur = self.parent();
        while let Some(k) = cur {
            chain.push(k);
            cur = k.parent();
        }
        chain.reverse();
        chain
    }

    pub fn children(self) -> impl Iterator<Item = EntityKind> {
        Self::ALL.into_iter().filter(move |k| k.parent() == Some(self))
    }

    pub fn has_subtypes(self) -> bool {
        self.children().next().is_some()
    }

    /// Position in the catalog; used as a stable sort key.
    pub fn ordinal(self) -> usize {
        self as usize
    }

    /// Upper snake case, e.g. `SHAPE_REQUIREMENT`.
    pub fn table_name(self) -> String {
        upper_snake(self.name())
    }

    /// Attributes declared directly on this kind.
    fn own_attributes(self) -> &'static [AttributeDef] {
        use AttributeType::{Numeric, Text};
        use EntityKind::*;
        const CHARACTERISTIC: &[AttributeDef] = &[
            AttributeDef::new("value", Numeric),
            AttributeDef::new("unit", Text),
            AttributeDef::new("tolerance", Numeric),
        ];
        const MEASUREMENT: &[AttributeDef] = &[AttributeDef::new("unit", Text)];
        const PROOF: &[AttributeDef] = &[AttributeDef::new("reference", Text)];
        const NONCONFORMITY: &[AttributeDef] = &[AttributeDef::new("severity", Numeric)];
        const ACTION: &[AttributeDef] = &[AttributeDef::new("owner", Text)];
        match self {
            QualityCharacteristic => CHARACTERISTIC,
            Measurement => MEASUREMENT,
            TangibleProof => PROOF,
            Nonconformity => NONCONFORMITY,
            Action => ACTION,
            _ => &[],
        }
    }

    /// Full attribute registry for this kind: the common `description`
    /// column, then everything inherited from supertypes, then its own.
    pub fn attributes(self) -> Vec<AttributeDef> {
        let mut out = vec![AttributeDef::new("description", AttributeType::Text)];
        for k in self.lineage() {
            out.extend_from_slice(k.own_attributes());
        }
        out
    }

    pub fn attribute(self, key: &str) -> Option<AttributeDef> {
        self.attributes().into_iter().find(|a| a.key == key)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeType {
    Text,
    Numeric,
    Boolean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttributeDef {
    pub key: &'static str,
    pub ty: AttributeType,
}

impl AttributeDef {
    const fn new(key: &'static str, ty: AttributeType) -> Self {
        AttributeDef { key, ty }
    }
}

/// Inclusive multiplicity range; `max == None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Multiplicity {
    pub min: usize,
    pub max: Option<usize>,
}

impl Multiplicity {
    pub const ANY: Multiplicity = Multiplicity { min: 0, max: None };
    pub const ONE: Multiplicity = Multiplicity { min: 1, max: Some(1) };
    pub const ONE_OR_MORE: Multiplicity = Multiplicity { min: 1, max: None };
    pub const OPTIONAL: Multiplicity = Multiplicity { min: 0, max: Some(1) };

    pub fn admits(self, count: usize) -> bool {
        count >= self.min && self.max.is_none_or(|m| count <= m)
    }

    pub fn is_single_valued(self) -> bool {
        matches!(self.max, Some(m) if m <= 1)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) if max == self.min => write!(f, "{}", self.min),
            Some(max) => write!(f, "{}..{}", self.min, max),
            None => write!(f, "{}..*", self.min),
        }
    }
}

/// A named, directed association between meta-classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    ResultsFrom,
    Consumes,
    ComposedOf,
    Supplies,
    Receives,
    HasRequirement,
    Specifies,
    CheckedBy,
    AttachedProof,
    Detects,
    Concerns,
    CausedBy,
    Treats,
}

const CHECKERS: &[EntityKind] = &[EntityKind::Observation, EntityKind::Measurement, EntityKind::Test];
const EVIDENCE_BEARERS: &[EntityKind] = &[
    EntityKind::Observation,
    EntityKind::Measurement,
    EntityKind::Test,
    EntityKind::Control,
    EntityKind::Validation,
    EntityKind::Checking,
];
const OWNERS: &[EntityKind] = &[EntityKind::Product, EntityKind::Process];
const DETERMINATIONS: &[EntityKind] = &[EntityKind::Conformity, EntityKind::Nonconformity];

impl RelationKind {
    pub const ALL: [RelationKind; 13] = [
        RelationKind::ResultsFrom,
        RelationKind::Consumes,
        RelationKind::ComposedOf,
        RelationKind::Supplies,
        RelationKind::Receives,
        RelationKind::HasRequirement,
        RelationKind::Specifies,
        RelationKind::CheckedBy,
        RelationKind::AttachedProof,
        RelationKind::Detects,
        RelationKind::Concerns,
        RelationKind::CausedBy,
        RelationKind::Treats,
    ];

    pub fn name(self) -> &'static str {
        use RelationKind::*;
        match self {
            ResultsFrom => "results_from",
            Consumes => "consumes",
            ComposedOf => "composed_of",
            Supplies => "supplies",
            Receives => "receives",
            HasRequirement => "has_requirement",
            Specifies => "specifies",
            CheckedBy => "checked_by",
            AttachedProof => "attached_proof",
            Detects => "detects",
            Concerns => "concerns",
            CausedBy => "caused_by",
            Treats => "treats",
        }
    }

    /// Kinds accepted at the source end (descendants are accepted too).
    pub fn source_kinds(self) -> &'static [EntityKind] {
        use EntityKind as K;
        use RelationKind::*;
        match self {
            ResultsFrom => &[K::Product],
            Consumes | ComposedOf => &[K::Process],
            Supplies => &[K::Supplier],
            Receives => &[K::Customer],
            HasRequirement => OWNERS,
            Specifies => &[K::Requirement],
            CheckedBy => &[K::QualityCharacteristic],
            AttachedProof | Detects => EVIDENCE_BEARERS,
            Concerns => DETERMINATIONS,
            CausedBy => &[K::Nonconformity],
            Treats => &[K::Action],
        }
    }

    /// Kinds accepted at the target end (descendants are accepted too).
    pub fn target_kinds(self) -> &'static [EntityKind] {
        use EntityKind as K;
        use RelationKind::*;
        match self {
            ResultsFrom | ComposedOf => &[K::Process],
            Consumes | Supplies | Receives => &[K::Product],
            HasRequirement => &[K::Requirement],
            Specifies => &[K::QualityCharacteristic],
            CheckedBy => CHECKERS,
            AttachedProof => &[K::TangibleProof],
            Detects => DETERMINATIONS,
            Concerns => OWNERS,
            CausedBy => &[K::Cause],
            Treats => &[K::Nonconformity, K::Cause],
        }
    }

    /// How many targets each source instance may link to.
    pub fn target_mult(self) -> Multiplicity {
        use RelationKind::*;
        match self {
            ResultsFrom => Multiplicity::ONE,
            Specifies | Treats => Multiplicity::ONE_OR_MORE,
            Concerns => Multiplicity::OPTIONAL,
            _ => Multiplicity::ANY,
        }
    }

    /// How many sources may link to each target instance.
    pub fn source_mult(self) -> Multiplicity {
        use RelationKind::*;
        match self {
            ResultsFrom => Multiplicity::ONE_OR_MORE,
            _ => Multiplicity::ANY,
        }
    }

    pub fn accepts_source(self, kind: EntityKind) -> bool {
        self.source_kinds().iter().any(|k| kind.is_a(*k))
    }

    pub fn accepts_target(self, kind: EntityKind) -> bool {
        self.target_kinds().iter().any(|k| kind.is_a(*k))
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationKind::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| ModelError::UnknownRelation(s.to_string()))
    }
}

/// A selection of kinds and relations from the meta-model. The model engine
/// always runs on [`MetaCatalog::standard`]; subsets exist for schema
/// derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaCatalog {
    kinds: Vec<EntityKind>,
    relations: Vec<RelationKind>,
}

impl MetaCatalog {
    pub fn standard() -> Self {
        MetaCatalog {
            kinds: EntityKind::ALL.to_vec(),
            relations: RelationKind::ALL.to_vec(),
        }
    }

    pub fn empty() -> Self {
        MetaCatalog {
            kinds: Vec::new(),
            relations: Vec::new(),
        }
    }

    /// A sub-catalog. Relations whose signature names a kind outside `kinds`
    /// are dropped so the result stays well-formed.
    pub fn subset(kinds: &[EntityKind], relations: &[RelationKind]) -> Self {
        let mut ks: Vec<EntityKind> = kinds.to_vec();
        ks.sort();
        ks.dedup();
        let mut rs: Vec<RelationKind> = relations
            .iter()
            .copied()
            .filter(|r| {
                r.source_kinds().iter().all(|k| ks.contains(k)) && r.target_kinds().iter().all(|k| ks.contains(k))
            })
            .collect();
        rs.sort();
        rs.dedup();
        MetaCatalog {
            kinds: ks,
            relations: rs,
        }
    }

    pub fn kinds(&self) -> &[EntityKind] {
        &self.kinds
    }

    pub fn relations(&self) -> &[RelationKind] {
        &self.relations
    }

    pub fn contains_kind(&self, kind: EntityKind) -> bool {
        self.kinds.contains(&kind)
    }

    /// Supertype of `kind` within this catalog.
    pub fn parent_of(&self, kind: EntityKind) -> Option<EntityKind> {
        kind.parent().filter(|p| self.contains_kind(*p))
    }

    pub fn has_subtypes(&self, kind: EntityKind) -> bool {
        self.kinds.iter().any(|k| self.parent_of(*k) == Some(kind))
    }
}

impl Default for MetaCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

/// `ShapeRequirement` -> `SHAPE_REQUIREMENT`, `caused_by` -> `CAUSED_BY`.
pub fn upper_snake(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    for (i, c) in s.chars().enumerate() {
        if c.is_ascii_uppercase() && i > 0 && !out.ends_with('_') {
            out.push('_');
        }
        out.push(c.to_ascii_uppercase());
    }
    out
}
