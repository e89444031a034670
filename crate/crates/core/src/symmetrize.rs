//! From symmetric identities to shuffle relations.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::Result;
use crate::linalg::{Coeff, Echelon};
use crate::poly::Polynomial;
use crate::presentation::{GeneratorSpec, MultilinearIdentity, Presentation};
use crate::shuffle_tree::{permutations, ShuffleGenerator, Signature, Tree};

/// Shuffle variants of a single generator.
pub fn to_shuffle_generators(g: &GeneratorSpec) -> Vec<ShuffleGenerator> {
    Signature::new(std::slice::from_ref(g)).generators().to_vec()
}

/// The shuffle operad data of a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShufflePresentation {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    pub signature: Signature,
    /// Relations sorted by arity; within an arity, by pivot monomial.
    pub relations: Vec<Polynomial>,
}

impl ShufflePresentation {
    pub fn max_relation_arity(&self) -> usize {
        self.relations.iter().map(Polynomial::arity).max().unwrap_or(0)
    }

    pub fn relations_of_arity(&self, n: usize) -> impl Iterator<Item = &Polynomial> {
        self.relations.iter().filter(move |r| r.arity() == n)
    }
}

/// Image of a multilinear identity in the free shuffle operad.
pub fn shuffle_image(sig: &Signature, id: &MultilinearIdentity) -> Polynomial {
    image_of_terms(sig, id.arity, id.terms.iter())
}

fn image_of_terms<'a>(
    sig: &Signature,
    arity: usize,
    terms: impl Iterator<Item = (&'a Tree, &'a Coeff)>,
) -> Polynomial {
    let mut p = Polynomial::zero(arity);
    for (t, c) in terms {
        let raw = t.map_gens(&|fam| sig.identity_variant(fam as usize));
        if let Ok((m, s)) = sig.canonical_keep_labels(&raw) {
            p.add_term(m, if s > 0 { c.clone() } else { -c.clone() });
        }
    }
    p
}

fn orbit_rows(sig: &Signature, id: &MultilinearIdentity, echelon: &mut Echelon<Tree>) {
    for perm in permutations(id.arity) {
        let moved: BTreeMap<Tree, Coeff> = id
            .terms
            .iter()
            .map(|(t, c)| (t.relabel(&|l| perm[l as usize - 1] + 1), c.clone()))
            .collect();
        let p = image_of_terms(sig, id.arity, moved.iter());
        if !p.is_zero() {
            echelon.insert(p.terms().clone());
        }
    }
}

fn to_polys(arity: usize, echelon: Echelon<Tree>) -> Vec<Polynomial> {
    echelon
        .into_rows()
        .into_iter()
        .map(|row| {
            let mut p = Polynomial::zero(arity);
            for (t, c) in row {
                if !c.is_zero() {
                    p.add_term(t, c);
                }
            }
            p.primitive()
        })
        .collect()
}

/// Rewrites every relabelling of `id` into the shuffle basis and returns a
/// canonical basis of their span (reduced row echelon form in the canonical
/// monomial order, scaled to primitive integers).
pub fn orbit_expand(sig: &Signature, id: &MultilinearIdentity) -> Vec<Polynomial> {
    let mut e = Echelon::new();
    orbit_rows(sig, id, &mut e);
    to_polys(id.arity, e)
}

/// Multilinearizes all identities and expands their orbits, reducing the
/// relations of each arity jointly.
pub fn present_shuffle(p: &Presentation) -> Result<ShufflePresentation> {
    let ids = p.multilinear_identities()?;
    let sig = Signature::new(&p.generators);
    let mut by_arity: BTreeMap<usize, Echelon<Tree>> = BTreeMap::new();
    for id in &ids {
        orbit_rows(&sig, id, by_arity.entry(id.arity).or_default());
    }
    let mut relations = Vec::new();
    for (n, e) in by_arity {
        relations.extend(to_polys(n, e));
    }
    Ok(ShufflePresentation {
        name: p.name.clone(),
        generators: p.generators.clone(),
        signature: sig,
        relations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{multilinearize, RawIdentity, Symmetry, Term};
    use crate::linalg::int;

    #[test]
    fn variant_counts() {
        assert_eq!(to_shuffle_generators(&GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)).len(), 1);
        assert_eq!(to_shuffle_generators(&GeneratorSpec::new("*", 2, Symmetry::Plain)).len(), 2);
        assert_eq!(to_shuffle_generators(&GeneratorSpec::new("t", 3, Symmetry::Plain)).len(), 6);
    }

    #[test]
    fn jacobi_orbit_is_one_element() {
        let gens = vec![GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)];
        let b = |x: Term, y: Term| Term::app("b", vec![x, y]);
        let v = Term::var;
        let jac = RawIdentity::new(
            [
                (b(b(v("x"), v("y")), v("z")), int(1)),
                (b(b(v("y"), v("z")), v("x")), int(1)),
                (b(b(v("z"), v("x")), v("y")), int(1)),
            ]
            .into_iter()
            .collect(),
        );
        let sig = Signature::new(&gens);
        let ml = multilinearize(&gens, &jac).unwrap();
        let orbit = orbit_expand(&sig, &ml[0]);
        assert_eq!(orbit.len(), 1);
        let expected = Polynomial::parse("b(b(1,2),3) - b(1,b(2,3)) - b(b(1,3),2)", &sig).unwrap();
        assert!(orbit[0] == expected || orbit[0] == expected.scaled(&int(-1)));
    }

    #[test]
    fn antisymmetry_relation_vanishes() {
        let gens = vec![GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)];
        let b = |x: Term, y: Term| Term::app("b", vec![x, y]);
        let v = Term::var;
        let id = RawIdentity::new([(b(v("x"), v("y")), int(1)), (b(v("y"), v("x")), int(1))].into_iter().collect());
        assert!(multilinearize(&gens, &id).unwrap().is_empty());
    }
}
