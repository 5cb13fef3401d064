//! Whole-ontology rewrites and checks.

use std::fmt;

use super::{Axiom, ConceptExpr, Ontology};

/// A reason an axiom falls outside the supported EL++ fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom_index: usize,
    pub axiom: Axiom,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axiom {} `{}`: {}", self.axiom_index + 1, self.axiom, self.reason)
    }
}

fn conjunction_problem(expr: &ConceptExpr) -> Option<String> {
    let mut problem = None;
    expr.visit(&mut |e| {
        if problem.is_some() {
            return;
        }
        if let ConceptExpr::Conjunction(parts) = e {
            if parts.len() < 2 {
                problem = Some("conjunction with fewer than two members".to_string());
            } else if parts.iter().any(|p| matches!(p, ConceptExpr::Conjunction(_))) {
                problem = Some("nested conjunction is not flattened".to_string());
            } else if parts.iter().enumerate().any(|(i, p)| parts[..i].contains(p)) {
                problem = Some("conjunction repeats a member".to_string());
            }
        }
    });
    problem
}

/// Checks that user-supplied axioms stay inside surface EL++.
///
/// The internal `every` restriction is reported, as are role chains whose
/// length is not two and malformed conjunctions.
pub fn validate_el(ontology: &Ontology) -> Vec<Violation> {
    let mut out = Vec::new();
    for (axiom_index, axiom) in ontology.axioms().iter().enumerate() {
        let mut report = |reason: String| {
            out.push(Violation { axiom_index, axiom: axiom.clone(), reason });
        };
        match axiom {
            Axiom::Gci { lhs, rhs } => {
                if lhs.contains_exists_all() || rhs.contains_exists_all() {
                    report("`every` restriction is not part of the input language".into());
                }
                if let Some(p) = conjunction_problem(lhs).or_else(|| conjunction_problem(rhs)) {
                    report(p);
                }
            }
            Axiom::RoleChain { chain, .. } if chain.len() != 2 => {
                report(format!("role chain has {} links, only 2 are supported", chain.len()));
            }
            _ => {}
        }
    }
    out
}

fn strengthen(expr: &ConceptExpr) -> ConceptExpr {
    match expr {
        ConceptExpr::Exists(r, filler) | ConceptExpr::ExistsAll(r, filler) => {
            ConceptExpr::exists_all(r.clone(), strengthen(filler))
        }
        ConceptExpr::Conjunction(parts) => {
            ConceptExpr::Conjunction(parts.iter().map(strengthen).collect())
        }
        other => other.clone(),
    }
}

fn weaken(expr: &ConceptExpr) -> ConceptExpr {
    match expr {
        ConceptExpr::Exists(r, filler) | ConceptExpr::ExistsAll(r, filler) => {
            ConceptExpr::exists(r.clone(), weaken(filler))
        }
        ConceptExpr::Conjunction(parts) => ConceptExpr::Conjunction(parts.iter().map(weaken).collect()),
        other => other.clone(),
    }
}

/// Rewrites every existential on a GCI right-hand side, at any depth, into
/// the stronger `every` restriction. Left-hand sides and role/ABox axioms are
/// untouched. The result entails the input.
pub fn semantic_enhance(ontology: &Ontology) -> Ontology {
    ontology.map_axioms(|axiom| match axiom {
        Axiom::Gci { lhs, rhs } => Axiom::gci(lhs.clone(), strengthen(rhs)),
        other => other.clone(),
    })
}

/// Inverse of [`semantic_enhance`] on a single axiom: turns every `every`
/// restriction on the right-hand side back into `some`.
pub fn erase_enhancement(axiom: &Axiom) -> Axiom {
    match axiom {
        Axiom::Gci { lhs, rhs } => Axiom::gci(lhs.clone(), weaken(rhs)),
        other => other.clone(),
    }
}

/// Replaces assertions by nominal inclusions: `A(a)` becomes `{a} ⊑ A` and
/// `r(a, b)` becomes `{a} ⊑ ∃r.{b}`.
pub fn desugar_abox(ontology: &Ontology) -> Ontology {
    ontology.map_axioms(|axiom| match axiom {
        Axiom::ConceptAssertion { concept, individual } => Axiom::gci(
            ConceptExpr::nominal(individual.clone()),
            ConceptExpr::atomic(concept.clone()),
        ),
        Axiom::RoleAssertion { role, subject, object } => Axiom::gci(
            ConceptExpr::nominal(subject.clone()),
            ConceptExpr::exists(role.clone(), ConceptExpr::nominal(object.clone())),
        ),
        other => other.clone(),
    })
}

/// Number of concept, individual and role symbols in `expr`.
pub fn concept_length(expr: &ConceptExpr) -> usize {
    let mut n = 0;
    expr.visit(&mut |e| {
        if matches!(
            e,
            ConceptExpr::Atomic(_)
                | ConceptExpr::Nominal(_)
                | ConceptExpr::Exists(..)
                | ConceptExpr::ExistsAll(..)
        ) {
            n += 1;
        }
    });
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::parse_ontology;

    fn a(n: &str) -> ConceptExpr {
        ConceptExpr::atomic(n)
    }

    pub(crate) const FAMILY: &str = "\
Father SubClassOf Male and Parent
Mother SubClassOf Female and Parent
Male and Parent SubClassOf Father
Female and Parent SubClassOf Mother
Male and Female SubClassOf Nothing
Parent and Child SubClassOf Nothing
Child SubClassOf hasParent some Mother
Child SubClassOf hasParent some Father
Parent SubClassOf hasChild some Child
";

    #[test]
    fn family_is_valid() {
        let o = parse_ontology(FAMILY).unwrap();
        assert_eq!(o.len(), 9);
        assert!(validate_el(&o).is_empty());
    }

    #[test]
    fn every_in_input_is_flagged() {
        let o = parse_ontology("A SubClassOf B\nA SubClassOf r every B\n").unwrap();
        let v = validate_el(&o);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].axiom_index, 1);
        assert!(v[0].to_string().contains("A SubClassOf r every B"));
    }

    #[test]
    fn three_link_chain_is_flagged() {
        let o = parse_ontology("r o s o t SubPropertyOf u\nr o s SubPropertyOf u").unwrap();
        let v = validate_el(&o);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].axiom_index, 0);
    }

    #[test]
    fn enhance_rewrites_rhs_only() {
        let o = parse_ontology(
            "Child SubClassOf hasParent some Father\n\
             r some B SubClassOf A\n\
             A SubClassOf B and r some (B1 and t some B2)\n\
             r SubPropertyOf s\n",
        )
        .unwrap();
        let e = semantic_enhance(&o);
        assert_eq!(e.len(), o.len());
        assert_eq!(
            e.axioms()[0],
            Axiom::gci(a("Child"), ConceptExpr::exists_all("hasParent", a("Father")))
        );
        assert_eq!(e.axioms()[1], o.axioms()[1]);
        assert_eq!(
            e.axioms()[2],
            Axiom::gci(
                a("A"),
                ConceptExpr::and([
                    a("B"),
                    ConceptExpr::exists_all(
                        "r",
                        ConceptExpr::and([a("B1"), ConceptExpr::exists_all("t", a("B2"))])
                    )
                ])
            )
        );
        assert_eq!(e.axioms()[3], o.axioms()[3]);
        for (orig, enhanced) in o.axioms().iter().zip(e.axioms()) {
            assert_eq!(&erase_enhancement(enhanced), orig);
        }
    }

    #[test]
    fn desugar_assertions() {
        let o = parse_ontology("Father(Tom)\nhasParent(Jerry, Tom)\nA SubClassOf B").unwrap();
        let d = desugar_abox(&o);
        assert_eq!(d.len(), 3);
        assert_eq!(d.axioms()[0], Axiom::gci(ConceptExpr::nominal("Tom"), a("Father")));
        assert_eq!(
            d.axioms()[1],
            Axiom::gci(
                ConceptExpr::nominal("Jerry"),
                ConceptExpr::exists("hasParent", ConceptExpr::nominal("Tom"))
            )
        );
        assert_eq!(d.axioms()[2], o.axioms()[2]);
        assert!(d.axioms().iter().all(|ax| !ax.is_abox()));
    }

    #[test]
    fn desugar_is_identity_on_tbox() {
        let o = parse_ontology(FAMILY).unwrap();
        assert_eq!(desugar_abox(&o), o);
    }

    #[test]
    fn lengths() {
        assert_eq!(concept_length(&a("A")), 1);
        assert_eq!(concept_length(&ConceptExpr::exists("r", ConceptExpr::and([a("A"), a("B")]))), 3);
        let e = ConceptExpr::and([
            a("A"),
            a("B"),
            ConceptExpr::exists("r", ConceptExpr::exists("t", a("C"))),
        ]);
        assert_eq!(concept_length(&e), 5);
        assert_eq!(concept_length(&ConceptExpr::Top), 0);
    }

    mod props {
        use super::*;
        use crate::ontology::serialize::tests::concept;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn enhancement_is_invertible(lhs in concept(), rhs in concept()) {
                let rhs = weaken(&rhs);
                let axiom = Axiom::gci(lhs, rhs);
                let o = Ontology::new(vec![axiom.clone()]).unwrap();
                let e = semantic_enhance(&o);
                prop_assert_eq!(erase_enhancement(&e.axioms()[0]), axiom);
            }

            #[test]
            fn desugar_yields_nominal_gcis(c in "[A-Z]{1,3}", i in "[a-z]{1,3}", j in "[a-z]{1,3}") {
                let o = Ontology::new(vec![
                    Axiom::concept_assertion(c, i.clone()),
                    Axiom::role_assertion("rr", i, j),
                ]).unwrap();
                let d = desugar_abox(&o);
                prop_assert_eq!(d.len(), o.len());
                for ax in d.axioms() {
                    let nominal_rooted = matches!(ax, Axiom::Gci { lhs: ConceptExpr::Nominal(_), .. });
                    prop_assert!(nominal_rooted);
                }
            }
        }
    }
}
