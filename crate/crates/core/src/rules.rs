//! The published rule catalog. Every diagnostic the engine emits carries a
//! code from this table; severities and guide steps are fixed here.

use serde::Serialize;

use crate::diagnostic::{Diagnostic, Severity, Subject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub code: &'static str,
    pub severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<u8>,
    pub description: &'static str,
}

impl Rule {
    pub fn diag(&'static self, subject: Subject, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: self.severity,
            code: self.code,
            message: message.into(),
            subject,
            step: self.step,
        }
    }
}

const fn rule(code: &'static str, severity: Severity, description: &'static str) -> Rule {
    Rule {
        code,
        severity,
        step: None,
        description,
    }
}

const fn step(code: &'static str, n: u8, description: &'static str) -> Rule {
    Rule {
        code,
        severity: Severity::Warning,
        step: Some(n),
        description,
    }
}

use Severity::{Error, Info, Warning};

// QML front end
pub static Q_SYNTAX: Rule = rule("Q-SYN-001", Error, "syntax error in QML source");
pub static Q_UNRESOLVED: Rule = rule("Q-REF-001", Error, "unresolved reference");
pub static Q_AMBIGUOUS: Rule = rule("Q-REF-002", Error, "reference matches entities of several kinds");
pub static Q_DUPLICATE: Rule = rule("Q-DUP-001", Error, "entity declared twice");
pub static Q_ATTRIBUTE: Rule = rule("Q-ATTR-001", Error, "conflicting or invalid attribute value");
pub static Q_UNKNOWN_KIND: Rule = rule("Q-KIND-001", Error, "unknown entity kind or relation name");
pub static Q_LINK: Rule = rule("Q-LINK-001", Error, "link rejected by the relation signature");
pub static Q_CYCLE: Rule = rule("Q-CYC-001", Error, "process decomposition would form a cycle");

// meta-model constraints
pub static R_MULT_UPPER: Rule = rule("R-MULT-001", Error, "more links than the relation multiplicity allows");
pub static R_MULT_LOWER: Rule = rule(
    "R-MULT-002",
    Error,
    "fewer links than the relation multiplicity requires",
);
pub static R_SYS: Rule = rule(
    "R-SYS-001",
    Error,
    "elementary process output requirements cover fewer than two of shape, space, time",
);
pub static R_ORPH_REQUIREMENT: Rule = rule("R-ORPH-001", Error, "requirement specifies no quality characteristic");
pub static R_ORPH_NONCONFORMITY: Rule = rule(
    "R-ORPH-002",
    Error,
    "nonconformity is not attached to a product or process",
);
pub static R_ORPH_UNOWNED: Rule = rule(
    "R-ORPH-003",
    Warning,
    "requirement is not attached to a product or process",
);
pub static R_CYCLE: Rule = rule("R-CYC-001", Error, "process decomposition contains a cycle");
pub static R_ATTR_UNKNOWN: Rule = rule("R-ATTR-001", Warning, "attribute not in the registry for this kind");
pub static R_ATTR_TYPE: Rule = rule("R-ATTR-002", Error, "attribute value has the wrong type");

// indicators
pub static NO_CHAR: Rule = rule(
    "NO-CHAR",
    Warning,
    "no quality characteristic in scope; conformity indicator is vacuous",
);
pub static NO_NC: Rule = rule("NO-NC", Info, "no nonconformity in scope; cause indicator is vacuous");

// design guide
pub static G_ORDER: Rule = Rule {
    code: "G-ORDER",
    severity: Info,
    step: None,
    description: "an earlier guide step is still incomplete",
};
pub static G_STEP: [Rule; 7] = [
    step(
        "G-STEP-1",
        1,
        "context: process needs input, output, customer and supplier",
    ),
    step(
        "G-STEP-2",
        2,
        "product qualification: output products need requirements with characteristics",
    ),
    step(
        "G-STEP-3",
        3,
        "characteristic needs an observation, measurement or test",
    ),
    step("G-STEP-4", 4, "observation, measurement or test needs a tangible proof"),
    step(
        "G-STEP-5",
        5,
        "output product needs a conformity or nonconformity determination",
    ),
    step("G-STEP-6", 6, "nonconformity needs at least one cause"),
    step("G-STEP-7", 7, "nonconformity or its causes need a treating action"),
];

// FMEA
pub static F_UNRESOLVED: Rule = rule("F-REF-001", Warning, "FMEA reference does not resolve in the model");
pub static F_NO_REFS: Rule = rule("F-REF-002", Info, "FMEA entry references no model object");
pub static F_LINKED: Rule = rule("F-LINK-001", Info, "FMEA entry added a link to the model");

// SPC
pub static S_WE1: Rule = rule("WE-1", Warning, "point beyond the control limits");
pub static S_WE2: Rule = rule(
    "WE-2",
    Warning,
    "nine consecutive points on one side of the center line",
);
pub static S_WE3: Rule = rule(
    "WE-3",
    Warning,
    "six consecutive points steadily increasing or decreasing",
);
pub static S_DATA: Rule = rule("S-DATA-001", Error, "measurement series cannot be charted");
pub static S_CAPABILITY: Rule = rule("S-CAP-001", Error, "capability indices cannot be computed");

// export
pub static D_FK_CYCLE: Rule = rule("D-CYC-001", Warning, "foreign keys form a cycle; constraints deferred");
pub static X_INPUT: Rule = rule("X-IO-001", Error, "input file is malformed");

/// Every rule, in catalog order.
pub fn catalog() -> Vec<&'static Rule> {
    let mut all: Vec<&'static Rule> = vec![
        &Q_SYNTAX,
        &Q_UNRESOLVED,
        &Q_AMBIGUOUS,
        &Q_DUPLICATE,
        &Q_ATTRIBUTE,
        &Q_UNKNOWN_KIND,
        &Q_LINK,
        &Q_CYCLE,
        &R_MULT_UPPER,
        &R_MULT_LOWER,
        &R_SYS,
        &R_ORPH_REQUIREMENT,
        &R_ORPH_NONCONFORMITY,
        &R_ORPH_UNOWNED,
        &R_CYCLE,
        &R_ATTR_UNKNOWN,
        &R_ATTR_TYPE,
        &NO_CHAR,
        &NO_NC,
        &G_ORDER,
    ];
    all.extend(G_STEP.iter());
    all.extend([
        &F_UNRESOLVED,
        &F_NO_REFS,
        &F_LINKED,
        &S_WE1,
        &S_WE2,
        &S_WE3,
        &S_DATA,
        &S_CAPABILITY,
        &D_FK_CYCLE,
        &X_INPUT,
    ]);
    all
}

pub fn lookup(code: &str) -> Option<&'static Rule> {
    catalog().into_iter().find(|r| r.code == code)
}
