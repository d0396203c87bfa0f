//! Synthetic workloads for the benchmarks.

use qproc_core::{Attributes, EntityKind as K, QualityModel, RelationKind as R, Scalar};

/// A plant of `cells` elementary processes under one root. Each cell turns
/// a supplied part into a delivered one that carries a shape and a time
/// requirement, two checked characteristics, one nonconformity with a
/// cause and a treating action. The result validates clean.
pub fn synthetic_plant(cells: usize) -> QualityModel {
    let mut m = QualityModel::new("Plant").unwrap();
    let add = |m: &mut QualityModel, kind, name: String| m.add_entity(kind, &name, Attributes::new()).unwrap();
    let root = add(&mut m, K::Process, "Plant".into());
    let customer = add(&mut m, K::Customer, "Customer".into());
    let supplier = add(&mut m, K::Supplier, "Supplier".into());
    for i in 0..cells {
        let cell = add(&mut m, K::Process, format!("Cell{i}"));
        m.decompose(root, cell).unwrap();
        let input = add(&mut m, K::Product, format!("Blank{i}"));
        let output = add(&mut m, K::Product, format!("Part{i}"));
        m.add_link(R::Consumes, cell, input).unwrap();
        m.add_link(R::ResultsFrom, output, cell).unwrap();
        m.add_link(R::Supplies, supplier, input).unwrap();
        m.add_link(R::Receives, customer, output).unwrap();
        for (req_kind, tag) in [(K::ShapeRequirement, "Shape"), (K::TimeRequirement, "Time")] {
            let req = add(&mut m, req_kind, format!("{tag}{i}"));
            m.add_link(R::HasRequirement, output, req).unwrap();
            let mut attrs = Attributes::new();
            attrs.insert("value".into(), Scalar::Number(i as f64));
            let ch = m
                .add_entity(K::QualityCharacteristic, &format!("{tag}Char{i}"), attrs)
                .unwrap();
            m.add_link(R::Specifies, req, ch).unwrap();
            let check = add(&mut m, K::Measurement, format!("{tag}Gauge{i}"));
            let proof = add(&mut m, K::TangibleProof, format!("{tag}Record{i}"));
            m.add_link(R::CheckedBy, ch, check).unwrap();
            m.add_link(R::AttachedProof, check, proof).unwrap();
        }
        let nc = add(&mut m, K::Nonconformity, format!("Defect{i}"));
        m.add_link(R::Concerns, nc, output).unwrap();
        let cause = add(&mut m, K::MachineCause, format!("Wear{i}"));
        m.add_link(R::CausedBy, nc, cause).unwrap();
        let action = add(&mut m, K::CorrectiveAction, format!("Fix{i}"));
        m.add_link(R::Treats, action, cause).unwrap();
    }
    m
}

/// `k` subgroups of `n` deterministic pseudo-normal values.
pub fn synthetic_series(k: usize, n: usize) -> Vec<Vec<f64>> {
    // Sum of uniforms from a small LCG; close enough to normal for timing.
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut uniform = move || {
        state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..k)
        .map(|_| (0..n).map(|_| (0..12).map(|_| uniform()).sum::<f64>() - 6.0).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant_is_clean_and_complete() {
        let m = synthetic_plant(4);
        assert_eq!(qproc_core::validate(&m), vec![]);
        let g = qproc_core::run_guide(&m, None).unwrap();
        assert_eq!(g.completed_prefix(), 7, "{g:#?}");
        let r = qproc_core::indicator_report(&m);
        assert!(r.conformity_pct.is_full() && r.cause_pct.is_full());
    }

    #[test]
    fn series_shape() {
        let s = synthetic_series(10, 5);
        assert_eq!(s.len(), 10);
        assert!(s.iter().all(|g| g.len() == 5 && g.iter().all(|v| v.abs() < 6.0)));
    }
}
