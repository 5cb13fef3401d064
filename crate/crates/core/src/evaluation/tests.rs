use super::*;
use crate::model::init_model;
use crate::ontology::{parse_ontology, NameKind, Signature};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn a(name: &str) -> ConceptExpr {
    ConceptExpr::atomic(name)
}

fn model_1d(concepts: &[(&str, f64, f64)]) -> EmbeddingModel {
    let mut s = Signature::default();
    for (c, ..) in concepts {
        s.insert(c, NameKind::Concept).unwrap();
    }
    let mut m = EmbeddingModel::zeros(&s, 1).unwrap();
    for &(c, center, offset) in concepts {
        m.set_concept(c, &[center], &[offset]).unwrap();
    }
    m
}

#[test]
fn score_examples() {
    let cfg = ScoreConfig::default();
    let m = model_1d(&[("A", 0.0, 1.0), ("B", 5.0, 1.0), ("C", 0.0, 0.3), ("D", -2.0, 0.1)]);
    assert_eq!(score(&a("A"), &a("C"), &m, &cfg).unwrap(), 0.0);
    let disjoint = ConceptExpr::and([a("A"), a("B")]);
    for rhs in ["A", "B", "C", "D"] {
        assert_eq!(score(&disjoint, &a(rhs), &m, &cfg).unwrap(), 0.0);
    }
    assert_abs_diff_eq!(score(&a("A"), &a("D"), &m, &cfg).unwrap(), -2.0);

    let c = ExtendedBox::with_mask(vec![0.5, 1.0], vec![1.0, 1.0], vec![true, true]).unwrap();
    let d = ExtendedBox::with_mask(vec![0.5, 7.0], vec![1.0, 0.0], vec![true, false]).unwrap();
    assert_abs_diff_eq!(score_boxes(&c, &d, &cfg), -1e4);
}

#[test]
fn strict_empty_variant() {
    let partial = ExtendedBox::with_mask(vec![0.0, 0.0], vec![1.0, 0.0], vec![true, false]).unwrap();
    let d = ExtendedBox::new(vec![3.0, 0.0], vec![1.0, 1.0]).unwrap();
    assert!(score_boxes(&partial, &d, &ScoreConfig::default()) < 0.0);
    assert_eq!(score_boxes(&partial, &d, &ScoreConfig { strict_empty: true, ..ScoreConfig::default() }), 0.0);
}

#[test]
fn existential_over_empty_filler_scores_as_empty() {
    let o = parse_ontology("A SubClassOf r some B\nC SubClassOf B").unwrap();
    let mut m = EmbeddingModel::zeros(o.signature(), 1).unwrap();
    m.set_concept("A", &[0.0], &[1.0]).unwrap();
    m.set_concept("B", &[5.0], &[1.0]).unwrap();
    m.set_concept("C", &[0.0], &[1.0]).unwrap();
    let lhs = ConceptExpr::exists("r", ConceptExpr::and([a("A"), a("B")]));
    assert_eq!(score(&lhs, &a("C"), &m, &ScoreConfig::default()).unwrap(), 0.0);
    assert_abs_diff_eq!(score(&a("C"), &lhs, &m, &ScoreConfig::default()).unwrap(), -1e4);
}

#[test]
fn rank_examples() {
    assert_eq!(tie_mean_rank(&[0.1, 0.9, 0.3], 1), 1.0);
    assert_eq!(tie_mean_rank(&[0.0; 11], 4), 6.0);
    assert_eq!(tie_mean_rank(&[5.0, 4.0, 3.0, -1.0], 3), 4.0);
    assert_eq!(tie_mean_rank(&[1.0, 2.0, 2.0, 2.0, 0.0], 2), 2.0);
    assert_eq!(tie_mean_rank(&[3.0, 2.0, 2.0, 2.0, 0.0], 2), 3.0);
}

#[test]
fn all_tied_task_ranks_at_pool_midpoint() {
    // Every query has a left-hand side whose conjuncts are disjoint, so all
    // eleven candidates score 0.
    let names: Vec<String> = (0..11).map(|i| format!("C{i}")).collect();
    let spec: Vec<(&str, f64, f64)> = names.iter().enumerate().map(|(i, n)| (n.as_str(), 10.0 * i as f64, 1.0)).collect();
    let m = model_1d(&spec);
    let queries: Vec<Axiom> = (0..5)
        .map(|i| Axiom::gci(ConceptExpr::and([a(&names[i]), a(&names[i + 1])]), a(&names[(i + 3) % 11])))
        .collect();
    let task = RankingTask::build(TaskKind::NfConjunction, &queries, &m);
    assert_eq!(task.pool.len(), 11);
    let ranks = rank_queries(&task, &m, &ScoreConfig::default()).unwrap();
    assert_eq!(ranks, vec![6.0; 5]);
}

#[test]
fn metric_examples() {
    let r = aggregate_metrics(&[1.0, 2.0, 4.0], 10).unwrap();
    assert_abs_diff_eq!(r.mrr, (1.0 + 0.5 + 0.25) / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.hits_at_1, 1.0 / 3.0);
    assert_abs_diff_eq!(r.mean_rank, 7.0 / 3.0);
    assert_eq!(r.median_rank, 2.0);
    let r = aggregate_metrics(&[1.0], 11).unwrap();
    assert_eq!((r.auc, r.hits_at_1, r.hits_at_10, r.hits_at_100), (1.0, 1.0, 1.0, 1.0));
    let r = aggregate_metrics(&[7.0, 7.0], 7).unwrap();
    assert_eq!(r.auc, 0.0);
    assert_eq!(aggregate_metrics(&[1.0, 2.0, 3.0, 10.0], 10).unwrap().median_rank, 2.5);
    assert!(matches!(aggregate_metrics(&[], 10), Err(EvalError::NoRanks)));
    assert!(matches!(aggregate_metrics(&[1.0], 1), Err(EvalError::PoolTooSmall(1))));
    assert!(matches!(aggregate_metrics(&[12.0], 11), Err(EvalError::RankOutOfRange { .. })));
}

#[test]
fn classification_examples() {
    let s = TestSplit::from_text(
        "A SubClassOf r some (B and B2)\n\
         A and B SubClassOf B2\n\
         A SubClassOf B\n\
         A SubClassOf r some B\n\
         r some B SubClassOf A\n\
         r some (A and B) SubClassOf A\n\
         r some (A and B) SubClassOf r some B2\n\
         A and B and B2 SubClassOf A\n",
        "t.el",
    )
    .unwrap();
    use AxiomClass::*;
    assert_eq!(
        s.classes,
        vec![
            Complex(ComplexCategory::AtomicSubComplex),
            Normal(NormalForm::Conjunction),
            Normal(NormalForm::Subsumption),
            Normal(NormalForm::ExistsRhs),
            Normal(NormalForm::ExistsLhs),
            Complex(ComplexCategory::ComplexSubAtomic),
            Complex(ComplexCategory::ComplexSubComplex),
            Complex(ComplexCategory::ComplexSubAtomic),
        ]
    );
    assert_eq!(s.complex_counts(), [1, 2, 1]);
    assert_eq!(s.normal_counts(), [1, 1, 1, 1]);
}

#[test]
fn split_rejects_bad_lines() {
    let e = TestSplit::from_text("A SubClassOf B\nr SubPropertyOf s\n", "x.el").unwrap_err();
    assert!(matches!(e, EvalError::Input { line: 2, .. }), "{e}");
    let e = TestSplit::from_text("A SubClassOf r every B\n", "x.el").unwrap_err();
    assert!(matches!(e, EvalError::Input { line: 1, .. }));
    let e = TestSplit::from_text("A SubClassOf (B\n", "x.el").unwrap_err();
    assert!(e.to_string().starts_with("x.el:1:"));
}

#[test]
fn unknown_names_are_listed() {
    let o = parse_ontology("A SubClassOf r some B").unwrap();
    let m = init_model(o.signature(), 2, 0).unwrap();
    let test = parse_ontology("A SubClassOf Z\nY SubClassOf s some B").unwrap();
    assert_eq!(unknown_names(test.axioms(), &m), vec!["Y", "Z", "s"]);
    assert!(check_signature(o.axioms(), &m).is_ok());
}

#[test]
fn task_building() {
    let o = parse_ontology(
        "A SubClassOf B\nA SubClassOf r some (B and C)\nr some (A and B) SubClassOf C\nr some A and B SubClassOf r some C",
    )
    .unwrap();
    let m = init_model(o.signature(), 3, 1).unwrap();
    let t = RankingTask::build(TaskKind::RhsComplex, o.axioms(), &m);
    assert_eq!(t.queries.len(), 2);
    assert_eq!(t.pool.len(), 4);
    let t = RankingTask::build(TaskKind::LhsAtomic, o.axioms(), &m);
    assert_eq!(t.queries, vec![o.axioms()[1].clone()]);
    assert_eq!(t.pool.len(), 3);
    for kind in TaskKind::ALL {
        let t = RankingTask::build(kind, o.axioms(), &m);
        if !t.queries.is_empty() {
            let ranks = rank_queries(&t, &m, &ScoreConfig::default()).unwrap();
            assert!(ranks.iter().all(|&r| r >= 1.0 && r <= t.pool.len() as f64));
        }
    }
    let bad = RankingTask { kind: TaskKind::RhsAtomic, pool: vec![a("A")], queries: vec![o.axioms()[0].clone()] };
    assert!(matches!(rank_queries(&bad, &m, &ScoreConfig::default()), Err(EvalError::AnswerNotInPool(_))));
}

#[test]
fn task_list_parsing() {
    assert_eq!(parse_task_list("lhs-atomic,rhs-atomic").unwrap(), vec![TaskKind::LhsAtomic, TaskKind::RhsAtomic]);
    assert_eq!(parse_task_list("all").unwrap(), TaskKind::COMPLEX.to_vec());
    assert!(parse_task_list("bogus").is_err());
    assert!(parse_task_list("").is_err());
}

#[test]
fn report_output() {
    let mut r = aggregate_metrics(&[1.0, 3.0], 5).unwrap();
    r.task = "rhs-atomic".into();
    let kv = r.to_key_value();
    assert!(kv.contains("H@1=0.5\n"));
    assert!(kv.contains("MR=2\n"));
    let table = format_table(&[r.clone(), r]);
    let lines: Vec<_> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("task"));
    assert_eq!(lines[1].len(), lines[2].len());
}

fn brute_rank(scores: &[f64], t: usize) -> f64 {
    // Sort positions by descending score; average the 1-based positions of
    // every entry that ties with the truth.
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let positions: Vec<f64> = idx
        .iter()
        .enumerate()
        .filter(|(_, &i)| scores[i] == scores[t])
        .map(|(p, _)| p as f64 + 1.0)
        .collect();
    positions.iter().sum::<f64>() / positions.len() as f64
}

proptest! {
    #[test]
    fn ranks_match_brute_force(
        scores in prop::collection::vec(prop_oneof![Just(0.0), Just(-1.0), -5.0..0.0f64], 1..20),
        pick in any::<prop::sample::Index>(),
        perm_seed in any::<u64>(),
    ) {
        let t = pick.index(scores.len());
        let r = tie_mean_rank(&scores, t);
        prop_assert_eq!(r, brute_rank(&scores, t));
        // Reordering the pool keeps the rank.
        use rand::{seq::SliceRandom, SeedableRng};
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let shuffled: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
        let nt = order.iter().position(|&i| i == t).unwrap();
        prop_assert_eq!(tie_mean_rank(&shuffled, nt), r);
    }

    #[test]
    fn self_score_is_zero(seed in any::<u64>(), dim in 1usize..6) {
        let o = parse_ontology("A SubClassOf r some B\nB and A SubClassOf C").unwrap();
        let m = init_model(o.signature(), dim, seed).unwrap();
        for c in [a("A"), ConceptExpr::exists("r", a("B"))] {
            prop_assert_eq!(score(&c, &c, &m, &ScoreConfig::default()).unwrap(), 0.0);
        }
    }

    #[test]
    fn moving_rhs_away_never_raises_score(seed in any::<u64>(), step in 0.0..3.0f64, j in 0usize..3) {
        let o = parse_ontology("A SubClassOf B").unwrap();
        let mut m = init_model(o.signature(), 3, seed).unwrap();
        let before = score(&a("A"), &a("B"), &m, &ScoreConfig::default()).unwrap();
        let ca = m.concept_box("A").unwrap().center()[j];
        let s = m.concept_center_start("B").unwrap() + j;
        let dir = if m.params()[s] >= ca { 1.0 } else { -1.0 };
        m.params_mut()[s] += dir * step;
        let after = score(&a("A"), &a("B"), &m, &ScoreConfig::default()).unwrap();
        prop_assert!(after <= before + 1e-12);
    }
}
