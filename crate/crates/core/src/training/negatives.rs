use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ontology::{erase_enhancement, Axiom, ConceptExpr, Ontology};

/// Attempts per negative before giving up on finding one that is not a
/// training axiom.
const MAX_ATTEMPTS: usize = 100;

/// Corrupts axioms `A ⊑ ∃r.B` into `A′ ⊑ ∃r.B′` with `A′`, `B′` drawn
/// uniformly from the concept names.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    concepts: Vec<String>,
    known: HashSet<Axiom>,
}

impl NegativeSampler {
    /// Negatives are never equal to an axiom of `ontology` (read without
    /// enhancement).
    pub fn new(ontology: &Ontology) -> Self {
        NegativeSampler {
            concepts: ontology.signature().concepts.iter().cloned().collect(),
            known: ontology.axioms().iter().map(erase_enhancement).collect(),
        }
    }

    /// Role of an axiom of the shape `A ⊑ ∃r.B` (or its enhanced form) with
    /// atomic `A`, `B`.
    pub fn eligible(axiom: &Axiom) -> Option<&str> {
        match axiom {
            Axiom::Gci { lhs: ConceptExpr::Atomic(_), rhs } => match rhs {
                ConceptExpr::Exists(r, b) | ConceptExpr::ExistsAll(r, b) if b.is_atomic() => Some(r),
                _ => None,
            },
            _ => None,
        }
    }

    /// Up to `count` negatives for `axiom`; empty if it is not eligible.
    pub fn sample(&self, axiom: &Axiom, count: usize, rng: &mut impl Rng) -> Vec<Axiom> {
        let Some(role) = Self::eligible(axiom) else {
            return Vec::new();
        };
        if self.concepts.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            for _ in 0..MAX_ATTEMPTS {
                let a = &self.concepts[rng.gen_range(0..self.concepts.len())];
                let b = &self.concepts[rng.gen_range(0..self.concepts.len())];
                let neg = Axiom::gci(
                    ConceptExpr::atomic(a.clone()),
                    ConceptExpr::exists(role, ConceptExpr::atomic(b.clone())),
                );
                if !self.known.contains(&neg) {
                    out.push(neg);
                    break;
                }
            }
        }
        out
    }
}

/// `count_per_axiom` negatives for every eligible axiom of `ontology`, in
/// axiom order. Deterministic in `seed`.
pub fn sample_negatives(ontology: &Ontology, count_per_axiom: usize, seed: u64) -> Vec<Axiom> {
    let sampler = NegativeSampler::new(ontology);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ontology
        .axioms()
        .iter()
        .flat_map(|a| sampler.sample(a, count_per_axiom, &mut rng))
        .collect()
}
