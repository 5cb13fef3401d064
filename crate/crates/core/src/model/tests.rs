use super::*;
use crate::ontology::serialize::tests::concept;
use crate::ontology::{erase_enhancement, parse_ontology, semantic_enhance, Axiom, ConceptExpr, Ontology};
use proptest::prelude::*;

fn a(name: &str) -> ConceptExpr {
    ConceptExpr::atomic(name)
}

fn one_dim(concepts: &[(&str, f64, f64)], roles: &[(&str, f64, f64)]) -> EmbeddingModel {
    let mut s = Signature::default();
    for (c, ..) in concepts {
        s.insert(c, NameKind::Concept).unwrap();
    }
    for (r, ..) in roles {
        s.insert(r, NameKind::Role).unwrap();
    }
    let mut m = EmbeddingModel::zeros(&s, 1).unwrap();
    for &(c, lo, hi) in concepts {
        m.set_concept(c, &[(lo + hi) / 2.0], &[(hi - lo) / 2.0]).unwrap();
    }
    for &(r, c, o) in roles {
        m.set_role(r, &[c], &[o]).unwrap();
    }
    m
}

#[test]
fn parameter_counts() {
    assert_eq!(parameter_count(50, 24_353, 951, 0), 2_530_400);
    let mut s = Signature::default();
    s.insert("A", NameKind::Concept).unwrap();
    assert_eq!(init_model(&s, 1, 0).unwrap().parameter_count(), 2);

    let big = Signature {
        concepts: (0..24_353).map(|i| format!("C{i}")).collect(),
        roles: (0..951).map(|i| format!("r{i}")).collect(),
        individuals: Default::default(),
    };
    assert_eq!(init_model(&big, 50, 1).unwrap().parameter_count(), 2_530_400);
}

#[test]
fn init_is_seeded_and_in_range() {
    let o = parse_ontology("A SubClassOf r some B\nr(x, y)").unwrap();
    let m1 = init_model(o.signature(), 7, 42).unwrap();
    let m2 = init_model(o.signature(), 7, 42).unwrap();
    assert_eq!(m1.params(), m2.params());
    assert_ne!(m1.params(), init_model(o.signature(), 7, 43).unwrap().params());
    for name in ["A", "B"] {
        let c = m1.concept_center_start(name).unwrap();
        let off = m1.concept_offset_start(name).unwrap();
        assert!(m1.params()[c..c + 7].iter().all(|x| (-1.0..=1.0).contains(x)));
        assert!(m1.params()[off..off + 7].iter().all(|x| *x > 0.0 && *x <= 0.5));
    }
    let r = m1.role_offset_start("r").unwrap();
    assert!(m1.params()[r..r + 7].iter().all(|x| *x > 0.0 && *x <= 0.5));
    assert!(m1.individual_point("x").unwrap().iter().all(|x| (-1.0..=1.0).contains(x)));
}

#[test]
fn init_errors() {
    assert_eq!(init_model(&Signature::default(), 3, 0).unwrap_err(), ModelError::EmptySignature);
    let o = parse_ontology("A SubClassOf B").unwrap();
    assert_eq!(init_model(o.signature(), 0, 0).unwrap_err(), ModelError::ZeroDimension);
}

#[test]
fn eval_leaves() {
    let o = parse_ontology("A SubClassOf B\nA(x)").unwrap();
    let mut m = EmbeddingModel::zeros(o.signature(), 2).unwrap();
    m.set_concept("A", &[0.5, -0.5], &[-0.25, 0.1]).unwrap();
    m.set_individual("x", &[3.0, 4.0]).unwrap();
    let b = m.eval_concept_box(&a("A")).unwrap();
    assert_eq!(b.center(), &[0.5, -0.5]);
    assert_eq!(b.offset(), &[0.25, 0.1]);
    assert!(b.is_plain());
    let x = m.eval_concept_box(&ConceptExpr::nominal("x")).unwrap();
    assert_eq!(x.center(), &[3.0, 4.0]);
    assert_eq!(x.offset(), &[0.0, 0.0]);
    assert!(m.eval_concept_box(&ConceptExpr::Top).unwrap().is_universal());
    assert!(m.eval_concept_box(&ConceptExpr::Bottom).unwrap().is_empty());
    assert_eq!(
        m.eval_concept_box(&a("Z")).unwrap_err(),
        ModelError::UnknownName { name: "Z".into(), kind: NameKind::Concept }
    );
}

#[test]
fn existential_over_disjoint_conjunction_is_bottom_filler() {
    let m = one_dim(&[("A", 0.0, 1.0), ("B", 2.0, 3.0)], &[("r", 0.0, 1.0)]);
    let e = ConceptExpr::exists("r", ConceptExpr::and([a("A"), a("B")]));
    assert_eq!(m.eval_concept_box(&e).unwrap_err(), ModelError::BottomFiller { role: "r".into() });
    assert!(!check_axiom(&Axiom::gci(a("A"), e.clone()), &m, 0.0));
    assert!(check_axiom(&Axiom::gci(e, a("B")), &m, 0.0));
    let top = ConceptExpr::exists("r", ConceptExpr::Top);
    assert!(m.eval_concept_box(&top).unwrap().is_universal());
}

#[test]
fn check_examples() {
    let m = one_dim(&[("A", 0.0, 1.0), ("B", -1.0, 2.0), ("C", 2.0, 3.0)], &[("r", 1.0, 0.0)]);
    assert!(check_axiom(&Axiom::gci(a("A"), a("B")), &m, 0.0));
    assert!(!check_axiom(&Axiom::gci(a("A"), a("C")), &m, 0.0));
    assert!(!check_axiom(&Axiom::role_chain("r", "r", "r"), &m, 0.0));
    assert_eq!(m.chain_box_with(&["r".into(), "r".into()], &|i| m.params()[i]).unwrap().center(), &[2.0]);
    assert!(check_axiom(&Axiom::role_inclusion("r", "r"), &m, 0.0));
}

#[test]
fn assertions_are_checked_as_nominals() {
    let o = parse_ontology("A(x)\nr(x, y)").unwrap();
    let mut m = EmbeddingModel::zeros(o.signature(), 1).unwrap();
    m.set_concept("A", &[0.0], &[1.0]).unwrap();
    m.set_individual("x", &[0.5]).unwrap();
    m.set_individual("y", &[-0.5]).unwrap();
    m.set_role("r", &[1.0], &[0.0]).unwrap();
    let report = soundness_report(o.axioms(), &m, 0.0);
    assert!(report.sound, "{report}");
    m.set_individual("x", &[1.5]).unwrap();
    m.set_individual("y", &[0.5]).unwrap();
    let report = soundness_report(o.axioms(), &m, 0.0);
    assert!(!report.sound);
    assert_eq!(report.violations().count(), 1);
    assert!(report.violations().next().unwrap().residual.unwrap() > 0.0);
}

#[test]
fn soundness_of_empty_ontology_is_vacuous() {
    let m = one_dim(&[("A", 0.0, 1.0)], &[]);
    assert!(soundness_report(&[], &m, 0.0).sound);
}

#[test]
fn bottom_and_top_axioms() {
    let m = one_dim(&[("A", 0.0, 1.0), ("B", 2.0, 3.0), ("C", 0.5, 2.5)], &[]);
    let disj = |x: &str, y: &str| Axiom::gci(ConceptExpr::and([a(x), a(y)]), ConceptExpr::Bottom);
    assert!(check_axiom(&disj("A", "B"), &m, 0.0));
    assert!(!check_axiom(&disj("A", "C"), &m, 0.0));
    assert!(check_axiom(&Axiom::gci(a("A"), ConceptExpr::Top), &m, 0.0));
    let report = soundness_report(&[Axiom::gci(ConceptExpr::Top, a("A"))], &m, 0.0);
    assert!(!report.sound);
    assert!(report.verdicts[0].error.is_some());
}

#[test]
fn text_export_lists_every_entity() {
    let o = parse_ontology("A SubClassOf r some B\nA(x)").unwrap();
    let m = init_model(o.signature(), 2, 3).unwrap();
    let text = m.export_text();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("A concept "));
    assert_eq!(lines[0].split_whitespace().count(), 6);
    assert_eq!(lines[3].split_whitespace().count(), 4);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let o = parse_ontology("A SubClassOf r some B\nr(x, y)\nr o s SubPropertyOf r").unwrap();
    let mut m = init_model(o.signature(), 3, 9).unwrap();
    m.params_mut()[0] = -0.0;
    m.params_mut()[1] = f64::MIN_POSITIVE / 3.0;
    let ckpt = Checkpoint {
        model: m,
        metadata: TrainingMetadata { epoch: 12, loss: 0.125, seed: 9, config_digest: "abc".into() },
    };
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, &ckpt).unwrap();
    let back = read_checkpoint(&mut buf.as_slice()).unwrap();
    assert_eq!(back.metadata, ckpt.metadata);
    let bits = |m: &EmbeddingModel| m.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&back.model), bits(&ckpt.model));
    assert_eq!(back.model.signature(), ckpt.model.signature());

    for cut in [2, 9, buf.len() / 2] {
        assert!(read_checkpoint(&mut &buf[..buf.len() - cut]).is_err());
    }
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(read_checkpoint(&mut bad.as_slice()), Err(CheckpointError::BadMagic)));
}

fn model_for(exprs: &[&ConceptExpr], dim: usize, seed: u64) -> EmbeddingModel {
    let mut s = Signature::default();
    s.insert("Cfill", NameKind::Concept).unwrap();
    for e in exprs {
        s.extend_from_concept(e).unwrap();
    }
    init_model(&s, dim, seed).unwrap()
}

fn same(x: &ExtendedBox, y: &ExtendedBox) -> bool {
    x == y
}

proptest! {
    #[test]
    fn conjunction_is_intersection((c, d) in (concept(), concept()), seed in any::<u64>()) {
        let m = model_for(&[&c, &d], 3, seed);
        let both = ConceptExpr::Conjunction(vec![c.clone(), d.clone()]);
        if let (Ok(bc), Ok(bd)) = (m.eval_concept_box(&c), m.eval_concept_box(&d)) {
            let direct = crate::geometry::intersect(&intersect(&ExtendedBox::universal(3), &bc).unwrap(), &bd).unwrap();
            prop_assert!(same(&m.eval_concept_box(&both).unwrap(), &direct));
        }
    }

    #[test]
    fn enhanced_boxes_are_contained(d in concept(), seed in any::<u64>()) {
        prop_assume!(d.depth() <= 4);
        let Axiom::Gci { rhs: d, .. } = erase_enhancement(&Axiom::gci(a("Cfill"), d)) else { unreachable!() };
        let m = model_for(&[&d], 2, seed);
        let enhanced = semantic_enhance(&Ontology::new([Axiom::gci(a("Cfill"), d.clone())]).unwrap());
        let Axiom::Gci { rhs: strong, .. } = &enhanced.axioms()[0] else { unreachable!() };
        if let (Ok(bs), Ok(bd)) = (m.eval_concept_box(strong), m.eval_concept_box(&d)) {
            prop_assert!(bs.is_subset_of(&bd, 1e-9).unwrap(), "{strong} vs {d}");
        }
    }

    #[test]
    fn checkpoint_round_trips(seed in any::<u64>(), dim in 1usize..5, nc in 1usize..5, nr in 0usize..3, ni in 0usize..3) {
        let s = Signature {
            concepts: (0..nc).map(|i| format!("C{i}")).collect(),
            roles: (0..nr).map(|i| format!("r{i}")).collect(),
            individuals: (0..ni).map(|i| format!("i{i}")).collect(),
        };
        let ckpt = Checkpoint { model: init_model(&s, dim, seed).unwrap(), metadata: TrainingMetadata::default() };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ckpt).unwrap();
        prop_assert_eq!(read_checkpoint(&mut buf.as_slice()).unwrap(), ckpt);
    }
}
