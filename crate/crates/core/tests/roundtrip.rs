mod support;

use proptest::prelude::*;
use qproc_core::export::{from_json, load, save, to_json, PersistenceError};
use qproc_core::{parse, serialize, Attributes, EntityKind as K, QualityModel, Scalar};
use rand::prelude::*;
use support::random_model;

fn assert_qml_round_trip(m: &QualityModel) {
    let text = serialize(m);
    let back = parse(&text, "rt.qml");
    assert!(
        back.diagnostics.iter().all(|d| !d.is_error()),
        "{text}\n{:#?}",
        back.diagnostics
    );
    assert_eq!(back.model.name(), m.name());
    assert_eq!(back.model.canonical_form(), m.canonical_form(), "{text}");
    assert_eq!(serialize(&back.model), text, "serialization is not a fixed point");
}

fn assert_json_round_trip(m: &QualityModel) {
    let text = to_json(m);
    let back = from_json(&text).unwrap();
    assert!(back.is_isomorphic(m));
    assert_eq!(to_json(&back), text);
    let ids: Vec<_> = back.entities().map(|e| e.id).collect();
    assert_eq!(ids, m.entities().map(|e| e.id).collect::<Vec<_>>());
}

#[test]
fn five_hundred_random_models_survive_both_formats() {
    let mut rng = StdRng::seed_from_u64(0x9e37);
    for _ in 0..500 {
        let m = random_model(&mut rng, 30);
        assert_qml_round_trip(&m);
        assert_json_round_trip(&m);
    }
}

#[test]
fn fixture_round_trips() {
    let m = support::lathe();
    assert_qml_round_trip(&m);
    assert_json_round_trip(&m);
}

#[test]
fn file_persistence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lathe.json");
    let m = support::lathe();
    save(&m, &path).unwrap();
    assert!(load(&path).unwrap().is_isomorphic(&m));
    std::fs::write(
        &path,
        "{\"format_version\": \"qproc/1\", \"name\": \"x\", \"entities\": [], \"links\": [], \"extra\": 1}",
    )
    .unwrap();
    assert!(matches!(load(&path), Err(PersistenceError::Syntax { .. })));
}

proptest! {
    #[test]
    fn qml_round_trip(seed in any::<u64>()) {
        assert_qml_round_trip(&random_model(&mut StdRng::seed_from_u64(seed), 40));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        assert_json_round_trip(&random_model(&mut StdRng::seed_from_u64(seed), 40));
    }

    #[test]
    fn arbitrary_names_and_text_survive(
        name in "\\PC{1,12}",
        text in "\\PC{0,20}",
        num in -1.0e9f64..1.0e9,
    ) {
        prop_assume!(!name.trim().is_empty());
        let mut m = QualityModel::new(&name).unwrap();
        let mut attrs = Attributes::new();
        attrs.insert("description".into(), Scalar::Text(text));
        attrs.insert("severity".into(), Scalar::Number(num));
        m.add_entity(K::Nonconformity, &name, attrs).unwrap();
        assert_qml_round_trip(&m);
        assert_json_round_trip(&m);
    }

    #[test]
    fn parser_never_panics_on_mangled_input(cut in 0usize..2000, insert in "\\PC{0,5}") {
        let text = support::fixture_text("lathe.qml");
        let mut at = cut.min(text.len());
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let mangled = format!("{}{}{}", &text[..at], insert, &text[at..]);
        let r = parse(&mangled, "mangled.qml");
        for d in &r.diagnostics {
            if let qproc_core::Subject::Span(span) = &d.subject {
                prop_assert!(span.line >= 1);
            }
        }
        // Whatever was built is still a consistent model.
        prop_assert!(from_json(&to_json(&r.model)).unwrap().is_isomorphic(&r.model));
    }
}
