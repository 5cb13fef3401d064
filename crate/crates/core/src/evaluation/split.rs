use std::fs;
use std::path::Path;

use crate::ontology::{parse_axioms, Axiom, ConceptExpr};

use super::EvalError;

/// Shape of a complex test axiom by which sides are atomic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComplexCategory {
    /// Atomic left, complex right: `A ⊑ D`.
    AtomicSubComplex,
    /// Complex left, atomic right: `C ⊑ A`.
    ComplexSubAtomic,
    /// Both complex: `C ⊑ D`.
    ComplexSubComplex,
}

impl ComplexCategory {
    pub const ALL: [ComplexCategory; 3] = [
        ComplexCategory::AtomicSubComplex,
        ComplexCategory::ComplexSubAtomic,
        ComplexCategory::ComplexSubComplex,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ComplexCategory::AtomicSubComplex => "A ⊑ D",
            ComplexCategory::ComplexSubAtomic => "C ⊑ A",
            ComplexCategory::ComplexSubComplex => "C ⊑ D",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalForm {
    /// `A ⊑ B`
    Subsumption,
    /// `A ⊓ B ⊑ B′`
    Conjunction,
    /// `A ⊑ ∃r.B`
    ExistsRhs,
    /// `∃r.B ⊑ A`
    ExistsLhs,
}

impl NormalForm {
    pub const ALL: [NormalForm; 4] =
        [NormalForm::Subsumption, NormalForm::Conjunction, NormalForm::ExistsRhs, NormalForm::ExistsLhs];

    pub fn label(self) -> &'static str {
        match self {
            NormalForm::Subsumption => "A ⊑ B",
            NormalForm::Conjunction => "A ⊓ B ⊑ B′",
            NormalForm::ExistsRhs => "A ⊑ ∃r.B",
            NormalForm::ExistsLhs => "∃r.B ⊑ A",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AxiomClass {
    Normal(NormalForm),
    Complex(ComplexCategory),
}

fn atomic_exists(e: &ConceptExpr) -> bool {
    matches!(e, ConceptExpr::Exists(_, b) if b.is_atomic())
}

/// Normal forms first, then the complex category. `None` for axioms other
/// than concept inclusions.
pub fn classify_axiom(axiom: &Axiom) -> Option<AxiomClass> {
    let Axiom::Gci { lhs, rhs } = axiom else {
        return None;
    };
    let nf = match (lhs, rhs) {
        (l, r) if l.is_atomic() && r.is_atomic() => Some(NormalForm::Subsumption),
        (ConceptExpr::Conjunction(parts), r)
            if r.is_atomic() && parts.len() == 2 && parts.iter().all(ConceptExpr::is_atomic) =>
        {
            Some(NormalForm::Conjunction)
        }
        (l, r) if l.is_atomic() && atomic_exists(r) => Some(NormalForm::ExistsRhs),
        (l, r) if atomic_exists(l) && r.is_atomic() => Some(NormalForm::ExistsLhs),
        _ => None,
    };
    Some(match nf {
        Some(nf) => AxiomClass::Normal(nf),
        None if lhs.is_atomic() => AxiomClass::Complex(ComplexCategory::AtomicSubComplex),
        None if rhs.is_atomic() => AxiomClass::Complex(ComplexCategory::ComplexSubAtomic),
        None => AxiomClass::Complex(ComplexCategory::ComplexSubComplex),
    })
}

/// Test axioms with their classes, in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TestSplit {
    pub axioms: Vec<Axiom>,
    pub classes: Vec<AxiomClass>,
}

impl TestSplit {
    /// Parses one document. Lines that are not concept inclusions, or that
    /// use the internal `every` restriction, are rejected.
    pub fn from_text(text: &str, path: &str) -> Result<Self, EvalError> {
        let mut split = TestSplit::default();
        split.extend_from_text(text, path)?;
        Ok(split)
    }

    fn extend_from_text(&mut self, text: &str, path: &str) -> Result<(), EvalError> {
        let parsed = parse_axioms(text).map_err(|e| EvalError::Input {
            path: path.to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        for (line, axiom) in parsed {
            let reject = |message: &str| EvalError::Input { path: path.to_string(), line, message: message.to_string() };
            let Some(class) = classify_axiom(&axiom) else {
                return Err(reject("test axioms must be concept inclusions"));
            };
            if let Axiom::Gci { lhs, rhs } = &axiom {
                if lhs.contains_exists_all() || rhs.contains_exists_all() {
                    return Err(reject("`every` is not EL++ surface syntax"));
                }
            }
            self.axioms.push(axiom);
            self.classes.push(class);
        }
        Ok(())
    }

    pub fn count(&self, class: AxiomClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn of_class(&self, class: AxiomClass) -> impl Iterator<Item = &Axiom> {
        self.axioms.iter().zip(&self.classes).filter(move |(_, &c)| c == class).map(|(a, _)| a)
    }

    /// Counts per complex category in `A ⊑ D`, `C ⊑ A`, `C ⊑ D` order.
    pub fn complex_counts(&self) -> [usize; 3] {
        ComplexCategory::ALL.map(|c| self.count(AxiomClass::Complex(c)))
    }

    pub fn normal_counts(&self) -> [usize; 4] {
        NormalForm::ALL.map(|f| self.count(AxiomClass::Normal(f)))
    }
}

/// Reads and classifies every file in `paths`.
pub fn load_test_split<P: AsRef<Path>>(paths: &[P]) -> Result<TestSplit, EvalError> {
    let mut split = TestSplit::default();
    for p in paths {
        let path = p.as_ref().display().to_string();
        let text = fs::read_to_string(p).map_err(|e| EvalError::Input { path: path.clone(), line: 0, message: e.to_string() })?;
        split.extend_from_text(&text, &path)?;
    }
    Ok(split)
}
