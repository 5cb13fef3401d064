use std::fmt;

use super::{Axiom, ConceptExpr, Ontology};

impl ConceptExpr {
    fn fmt_unary(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::Conjunction(_) => write!(f, "({self})"),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::Top => f.write_str("Thing"),
            ConceptExpr::Bottom => f.write_str("Nothing"),
            ConceptExpr::Atomic(name) => f.write_str(name),
            ConceptExpr::Nominal(name) => write!(f, "{{{name}}}"),
            ConceptExpr::Conjunction(parts) => {
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    // Nested conjunctions are flattened away, so only
                    // restrictions and atoms appear here.
                    part.fmt_unary(f)?;
                }
                Ok(())
            }
            ConceptExpr::Exists(role, filler) => {
                write!(f, "{role} some ")?;
                filler.fmt_unary(f)
            }
            ConceptExpr::ExistsAll(role, filler) => {
                write!(f, "{role} every ")?;
                filler.fmt_unary(f)
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Gci { lhs, rhs } => write!(f, "{lhs} SubClassOf {rhs}"),
            Axiom::RoleInclusion { sub, sup } => write!(f, "{sub} SubPropertyOf {sup}"),
            Axiom::RoleChain { chain, sup } => write!(f, "{} SubPropertyOf {sup}", chain.join(" o ")),
            Axiom::ConceptAssertion { concept, individual } => write!(f, "{concept}({individual})"),
            Axiom::RoleAssertion { role, subject, object } => {
                write!(f, "{role}({subject}, {object})")
            }
        }
    }
}

impl fmt::Display for Ontology {
    /// One axiom per line, in order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for axiom in self.axioms() {
            writeln!(f, "{axiom}")?;
        }
        Ok(())
    }
}
