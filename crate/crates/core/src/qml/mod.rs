//! QML, the textual authoring format for quality models.
//!
//! ```text
//! model Lathe
//! process Turning { input product Bar  output product Shaft }
//! customer Assembly receives Shaft
//! supplier SteelMill supplies Bar
//! requirement shape Profile on Shaft { characteristic Diameter = 25.0 }
//! measurement Gauge checks Diameter proof GaugeRecord
//! nonconformity Oversize on Shaft detected by Gauge
//! cause machine ToolWear of Oversize
//! action corrective ReplaceInsert treats ToolWear
//! ```
//!
//! Besides the declaration forms above the parser accepts `conformity`
//! (mirroring `nonconformity`), `[key = value, ...]` attribute lists after
//! any declared name, comma-separated reference lists, and two generic
//! forms the serializer falls back on for kinds and links the dedicated
//! forms cannot express:
//!
//! ```text
//! entity Control WeeklyAudit [description = "visual"]
//! link attached_proof Control:WeeklyAudit -> TangibleProof:AuditSheet
//! ```

mod build;
mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeMap;
use std::path::Path;

use crate::diagnostic::{has_errors, Diagnostic, SourceSpan};
use crate::model::{EntityId, QualityModel};

pub use parser::is_reserved;
pub use serialize::{format_name, format_value, serialize};

#[derive(Debug, Clone)]
pub struct ParseResult {
    pub model: QualityModel,
    pub diagnostics: Vec<Diagnostic>,
    /// Where each entity was declared (first mention for implicit ones).
    pub spans: BTreeMap<EntityId, SourceSpan>,
}

impl ParseResult {
    pub fn failed(&self) -> bool {
        has_errors(&self.diagnostics)
    }

    pub fn span_of(&self, id: EntityId) -> Option<SourceSpan> {
        self.spans.get(&id).cloned()
    }
}

fn default_model_name(file_name: &Path) -> String {
    file_name
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.trim_end_matches(".qml").to_string())
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| "model".to_string())
}

/// Parses QML text. Never aborts: every problem becomes a diagnostic and
/// the returned model holds everything that could be built.
pub fn parse(text: &str, file_name: impl AsRef<Path>) -> ParseResult {
    let file_name = file_name.as_ref();
    let file = file_name.display().to_string();
    let tokens = lexer::tokenize(text);
    let (decls, mut diagnostics) = parser::Parser::new(&tokens, &file).parse_file();

    let mut name = None;
    for d in &decls {
        if let parser::Decl::Model(ident) = d {
            if name.is_some() {
                diagnostics.push(crate::rules::Q_DUPLICATE.diag(
                    crate::diagnostic::Subject::Span(ident.span.clone()),
                    "model header given more than once",
                ));
            } else {
                name = Some(ident.text.clone());
            }
        }
    }
    let name = name.unwrap_or_else(|| default_model_name(file_name));
    let model = QualityModel::new(&name).expect("model name is non-empty");

    let built = build::Builder::new(model).build(&decls);
    diagnostics.extend(built.diagnostics);
    ParseResult {
        model: built.model,
        diagnostics,
        spans: built.spans,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{EntityKind as K, RelationKind as R};
    use crate::diagnostic::Subject;
    use crate::model::Scalar;

    fn ok(src: &str) -> QualityModel {
        let r = parse(src, "t.qml");
        assert!(r.diagnostics.is_empty(), "{:#?}", r.diagnostics);
        r.model
    }

    fn codes(r: &ParseResult) -> Vec<&'static str> {
        r.diagnostics.iter().map(|d| d.code).collect()
    }

    #[test]
    fn process_with_output() {
        let m = ok("process Turning { output product Shaft }");
        assert_eq!(m.entity_count(), 2);
        assert_eq!(m.link_count(), 1);
        let shaft = m.find(K::Product, "Shaft").unwrap();
        let turning = m.find(K::Process, "Turning").unwrap();
        assert!(m.has_link(R::ResultsFrom, shaft, turning));
    }

    #[test]
    fn empty_input() {
        let r = parse("", "empty.qml");
        assert_eq!(r.model.entity_count(), 0);
        assert!(r.diagnostics.is_empty());
        assert_eq!(r.model.name(), "empty");
    }

    #[test]
    fn unresolved_reference_keeps_entity() {
        let r = parse("nonconformity NC1 on Ghost", "t.qml");
        assert_eq!(codes(&r), ["Q-REF-001"]);
        assert!(r.diagnostics[0].message.contains("unresolved reference"));
        assert!(r.failed());
        assert!(r.model.find(K::Nonconformity, "NC1").is_some());
        assert_eq!(r.model.link_count(), 0);
        let Subject::Span(span) = &r.diagnostics[0].subject else {
            panic!("expected a span");
        };
        assert_eq!((span.line, span.column, span.length), (1, 22, 5));
    }

    #[test]
    fn forward_references() {
        let m = ok("cause machine Wear of NC\nnonconformity NC on Shaft\nprocess P { output product Shaft }");
        assert_eq!(m.link_count(), 3);
    }

    #[test]
    fn full_grammar() {
        let m = ok(r#"
            model Lathe
            process Turning { input product Bar output product Shaft part Roughing }
            process Roughing
            customer Assembly receives Shaft
            supplier Mill supplies Bar
            requirement shape Profile on Shaft { characteristic D = 25.0 characteristic R }
            requirement process Setup on Turning { characteristic Speed = 1200 }
            measurement Gauge checks D, R proof Record
            observation Look checks Speed
            test Probe checks R proof Record
            conformity LengthOk on Shaft detected by Look
            nonconformity Oversize on Shaft detected by Gauge, Probe
            cause machine Wear of Oversize
            cause environment Heat of Oversize
            action corrective Replace treats Wear
            action predictive Monitor treats Oversize
            entity Control Audit [description = "weekly"]
            link attached_proof Control:Audit -> TangibleProof:Record
        "#);
        assert_eq!(m.name(), "Lathe");
        let d = m.find(K::QualityCharacteristic, "D").unwrap();
        assert_eq!(m.entity(d).unwrap().attributes["value"], Scalar::Number(25.0));
        assert_eq!(m.entities_of(K::TangibleProof).count(), 1);
        let oversize = m.find(K::Nonconformity, "Oversize").unwrap();
        assert_eq!(m.sources(oversize, R::Detects).len(), 2);
        assert_eq!(m.targets(oversize, R::CausedBy).len(), 2);
        let audit = m.find(K::Control, "Audit").unwrap();
        assert_eq!(m.targets(audit, R::AttachedProof).len(), 1);
    }

    #[test]
    fn recovery_continues_past_errors() {
        let r = parse(
            "process A { output product }\nprocess B { frob }\ncustomer C receives X\nprocess D",
            "t.qml",
        );
        assert_eq!(codes(&r), ["Q-SYN-001", "Q-SYN-001", "Q-REF-001"]);
        assert!(r.model.find(K::Process, "D").is_some());
        assert!(r.model.find(K::Customer, "C").is_some());
    }

    #[test]
    fn missing_brace_recovers_at_next_line() {
        let r = parse("process A {\n  output product B\ncustomer C receives B\n", "t.qml");
        // the broken process is dropped, so B never comes into existence
        assert_eq!(codes(&r), ["Q-SYN-001", "Q-REF-001"]);
        assert!(r.model.find(K::Customer, "C").is_some());
    }

    #[test]
    fn duplicates_and_ambiguity() {
        let r = parse(
            "process A\nprocess A\nprocess X { output product X }\nrequirement shape S on X",
            "t.qml",
        );
        assert_eq!(codes(&r), ["Q-DUP-001", "Q-REF-002"]);
    }

    #[test]
    fn reserved_words_need_quotes() {
        let r = parse("process output", "t.qml");
        assert_eq!(codes(&r), ["Q-SYN-001"]);
        let m = ok(r#"process "output" { output product "two words" }"#);
        assert!(m.find(K::Product, "two words").is_some());
    }

    #[test]
    fn decomposition_cycle_is_reported() {
        let r = parse("process A { part B }\nprocess B { part A }", "t.qml");
        assert_eq!(codes(&r), ["Q-CYC-001"]);
        assert_eq!(r.model.link_count(), 1);
    }

    #[test]
    fn conflicting_characteristic_values() {
        let r = parse(
            "requirement shape S { characteristic D = 1 }\nrequirement space T { characteristic D = 2 }",
            "t.qml",
        );
        assert_eq!(codes(&r), ["Q-ATTR-001"]);
    }

    #[test]
    fn unknown_generic_kind() {
        let r = parse("entity Widget W\nlink frobs Process:A -> Process:B\nprocess Z", "t.qml");
        assert_eq!(codes(&r), ["Q-KIND-001", "Q-KIND-001"]);
        assert!(r.model.find(K::Process, "Z").is_some());
    }

    #[test]
    fn generic_link_signature_checked() {
        let r = parse(
            "process P\nentity Product S\nlink results_from Process:P -> Product:S",
            "t.qml",
        );
        assert_eq!(codes(&r), ["Q-LINK-001"]);
    }

    #[test]
    fn serialize_empty_model() {
        let m = QualityModel::new("X").unwrap();
        assert_eq!(serialize(&m), "model X\n");
        assert!(parse(&serialize(&m), "x.qml").model.is_isomorphic(&m));
    }

    #[test]
    fn serialize_is_a_fixed_point() {
        let src = r#"
            process Turning { input product Bar output product Shaft }
            requirement shape Profile on Shaft { characteristic D [unit = "mm"] = 25.5 }
            requirement time Cycle on Shaft { characteristic D }
            entity Cause Unknown
            link caused_by Nonconformity:N -> Cause:Unknown
            nonconformity N on Shaft
            process Shaft
            requirement space Where on Shaft
        "#;
        let r = parse(src, "t.qml");
        assert_eq!(codes(&r), ["Q-REF-002"; 4]);
        let once = serialize(&r.model);
        let again = parse(&once, "t.qml");
        assert!(again.diagnostics.is_empty(), "{once}\n{:#?}", again.diagnostics);
        assert!(again.model.is_isomorphic(&r.model), "{once}");
        assert_eq!(serialize(&again.model), once);
    }

    #[test]
    fn ambiguous_owner_falls_back_to_link_line() {
        let mut m = QualityModel::new("M").unwrap();
        let proc_ = m.add_entity(K::Process, "X", Default::default()).unwrap();
        let prod = m.add_entity(K::Product, "X", Default::default()).unwrap();
        let nc = m.add_entity(K::Nonconformity, "N", Default::default()).unwrap();
        m.add_link(R::Concerns, nc, prod).unwrap();
        m.add_link(R::ResultsFrom, prod, proc_).unwrap();
        let text = serialize(&m);
        assert!(text.contains("link concerns Nonconformity:N -> Product:X"), "{text}");
        assert!(parse(&text, "m.qml").model.is_isomorphic(&m));
    }
}
