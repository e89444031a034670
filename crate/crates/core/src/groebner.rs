//! Arity-stratified completion, normal monomials and dimension counts.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ordering::OrderingSpec;
use crate::poly::{interreduce, sort_basis, Polynomial, Reducer};
use crate::shuffle_tree::{divides_at_root, format_tree, overlaps, MonomialEnumerator, OverlapSite, Signature, Tree};
use crate::symmetrize::ShufflePresentation;

/// Resource limits; exceeding one stops completion with a truncated status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_elements: usize,
    pub max_spolynomials: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_elements: 5_000,
            max_spolynomials: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CompletionOptions {
    pub limits: Limits,
    pub parallel: bool,
    pub record_trace: bool,
}

impl CompletionOptions {
    pub fn parallel() -> Self {
        CompletionOptions {
            parallel: true,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ReducedToZero,
    Adjoined,
}

/// One processed S-polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub arity: usize,
    pub pair: (usize, usize),
    pub ambient: String,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub struct TruncatedGB {
    pub ordering: OrderingSpec,
    pub signature: Signature,
    /// Interreduced and monic, sorted by arity then leading monomial.
    pub elements: Vec<Polynomial>,
    pub arity_bound: usize,
    /// Arities whose S-polynomials were all processed and reduced to zero.
    pub complete_through: BTreeMap<usize, bool>,
    pub log: Vec<TraceRecord>,
    /// Reason completion stopped early, if it did.
    pub truncated: Option<String>,
}

impl TruncatedGB {
    pub fn leading_terms(&self) -> Vec<Tree> {
        self.elements
            .iter()
            .filter_map(|g| g.leading_monomial(&self.ordering).cloned())
            .collect()
    }

    /// Largest `n` such that every arity up to `n` is complete.
    pub fn complete_up_to(&self) -> usize {
        let mut n = 1;
        while self.complete_through.get(&(n + 1)).copied().unwrap_or(false) {
            n += 1;
        }
        n
    }

    pub fn is_complete(&self, n: usize) -> bool {
        n <= 1 || self.complete_through.get(&n).copied().unwrap_or(false)
    }

    pub fn elements_of_arity(&self, n: usize) -> impl Iterator<Item = &Polynomial> {
        self.elements.iter().filter(move |g| g.arity() == n)
    }

    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        Reducer::new(&self.ordering, &self.elements).reduce(p)
    }

    pub fn summary(&self) -> GbSummary {
        let sig = &self.signature;
        GbSummary {
            ordering: self.ordering.summary(sig),
            arity_bound: self.arity_bound,
            elements: self.elements.iter().map(|g| g.format(sig, Some(&self.ordering))).collect(),
            leading_terms: self.leading_terms().iter().map(|t| format_tree(sig, t)).collect(),
            complete_through: self.complete_through.clone(),
            truncated: self.truncated.clone(),
        }
    }
}

/// Printable form of a basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GbSummary {
    pub ordering: crate::ordering::OrderingSummary,
    pub arity_bound: usize,
    pub elements: Vec<String>,
    pub leading_terms: Vec<String>,
    pub complete_through: BTreeMap<usize, bool>,
    pub truncated: Option<String>,
}

/// The S-polynomial of `g1`, `g2` on a common multiple of their leading
/// monomials; leading contributions cancel.
pub fn spolynomial(site: &OverlapSite, g1: &Polynomial, g2: &Polynomial, ord: &OrderingSpec) -> Result<Polynomial> {
    let basis = [g1.clone(), g2.clone()];
    let r = Reducer::new(ord, &basis);
    let (lt1, c1) = g1.leading_term(ord)?;
    let (lt2, c2) = g2.leading_term(ord)?;
    let at = |root: usize, lt: &Tree| {
        crate::shuffle_tree::divides_at(&site.ambient, root, lt)
    };
    if !at(site.occ1.root, lt1) || !at(site.occ2.root, lt2) {
        return Err(Error::PatternMismatch);
    }
    let a = r.insertion(&site.ambient, 0, site.occ1.root).ok_or(Error::PatternMismatch)?;
    let b = r.insertion(&site.ambient, 1, site.occ2.root).ok_or(Error::PatternMismatch)?;
    let mut s = a.scaled(&c1.recip());
    s.add_scaled(&b, &-c2.recip());
    Ok(s)
}

fn overlap_sites_cached<'c>(
    cache: &'c mut HashMap<(Tree, Tree), Vec<OverlapSite>>,
    a: &Tree,
    b: &Tree,
    bound: usize,
) -> &'c [OverlapSite] {
    cache
        .entry((a.clone(), b.clone()))
        .or_insert_with(|| overlaps(a, b, bound))
}

/// Completion through arity `n` with default options (parallel reduction).
pub fn buchberger(sp: &ShufflePresentation, ord: &OrderingSpec, n: usize) -> TruncatedGB {
    buchberger_with(sp, ord, n, &CompletionOptions::parallel())
}

pub fn buchberger_with(sp: &ShufflePresentation, ord: &OrderingSpec, bound: usize, opts: &CompletionOptions) -> TruncatedGB {
    let mut g: Vec<Polynomial> = Vec::new();
    let mut complete = BTreeMap::new();
    let mut log = Vec::new();
    let mut truncated = None;
    let mut spolys = 0usize;
    let mut cache: HashMap<(Tree, Tree), Vec<OverlapSite>> = HashMap::new();
    for k in 2..=bound {
        if truncated.is_some() {
            complete.insert(k, false);
            continue;
        }
        let mut added = false;
        for rel in sp.relations_of_arity(k) {
            let r = Reducer::new(ord, &g).reduce(rel);
            if !r.is_zero() {
                g.push(r.monic(ord));
                added = true;
            }
        }
        if added {
            g = interreduce(&g, ord);
        }
        loop {
            let leads: Vec<Tree> = g.iter().filter_map(|p| p.leading_monomial(ord).cloned()).collect();
            let mut jobs: Vec<(usize, usize, OverlapSite)> = Vec::new();
            for i in 0..leads.len() {
                for j in i..leads.len() {
                    for site in overlap_sites_cached(&mut cache, &leads[i], &leads[j], bound) {
                        if site.ambient.arity() == k {
                            jobs.push((i, j, site.clone()));
                        }
                    }
                }
            }
            spolys += jobs.len();
            if spolys > opts.limits.max_spolynomials {
                truncated = Some(format!("more than {} S-polynomials", opts.limits.max_spolynomials));
                break;
            }
            let snapshot = &g;
            let reduce_one = |(i, j, site): &(usize, usize, OverlapSite)| -> Polynomial {
                match spolynomial(site, &snapshot[*i], &snapshot[*j], ord) {
                    Ok(s) => Reducer::new(ord, snapshot).reduce(&s),
                    Err(_) => Polynomial::zero(k),
                }
            };
            let results: Vec<Polynomial> = if opts.parallel {
                jobs.par_iter().map(reduce_one).collect()
            } else {
                jobs.iter().map(reduce_one).collect()
            };
            let mut fresh: Vec<Polynomial> = Vec::new();
            for ((i, j, site), r) in jobs.iter().zip(results) {
                let outcome = if r.is_zero() {
                    Outcome::ReducedToZero
                } else {
                    let r2 = Reducer::new(ord, &fresh).reduce(&r);
                    if !r2.is_zero() {
                        fresh.push(r2.monic(ord));
                    }
                    Outcome::Adjoined
                };
                if opts.record_trace {
                    log.push(TraceRecord {
                        arity: k,
                        pair: (*i, *j),
                        ambient: format_tree(&sp.signature, &site.ambient),
                        outcome,
                    });
                }
            }
            if fresh.is_empty() {
                break;
            }
            g.extend(fresh);
            g = interreduce(&g, ord);
            if g.len() > opts.limits.max_elements {
                truncated = Some(format!("more than {} basis elements", opts.limits.max_elements));
                break;
            }
        }
        complete.insert(k, truncated.is_none());
    }
    sort_basis(&mut g, ord);
    TruncatedGB {
        ordering: ord.clone(),
        signature: sp.signature.clone(),
        elements: g,
        arity_bound: bound,
        complete_through: complete,
        log,
        truncated,
    }
}

/// Normal monomials of arity `n`, largest first.
pub fn normal_monomials(gb: &TruncatedGB, n: usize) -> Result<Vec<Tree>> {
    if n > gb.arity_bound {
        return Err(Error::OutOfBound {
            requested: n,
            bound: gb.arity_bound,
        });
    }
    let leads = gb.leading_terms();
    let mut e = MonomialEnumerator::new(&gb.signature, |t: &Tree| {
        !leads.iter().any(|lt| lt.arity() <= t.arity() && divides_at_root(t, lt))
    });
    let mut out = e.arity(n).to_vec();
    out.sort_by(|a, b| gb.ordering.cmp_monomials(b, a));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HilbertEntry {
    pub arity: usize,
    pub dim: usize,
    /// False when the arity is not complete, in which case `dim` is an upper
    /// bound.
    pub exact: bool,
}

/// Normal monomial counts for arities 1..=n.
pub fn hilbert_series(gb: &TruncatedGB, n: usize) -> Result<Vec<HilbertEntry>> {
    if n > gb.arity_bound {
        return Err(Error::OutOfBound {
            requested: n,
            bound: gb.arity_bound,
        });
    }
    let leads = gb.leading_terms();
    let mut e = MonomialEnumerator::new(&gb.signature, |t: &Tree| {
        !leads.iter().any(|lt| lt.arity() <= t.arity() && divides_at_root(t, lt))
    });
    let mut out = Vec::new();
    for k in 1..=n {
        out.push(HilbertEntry {
            arity: k,
            dim: e.arity(k).len(),
            exact: (2..=k).all(|j| gb.is_complete(j)),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateRow {
    pub arity: usize,
    pub count: usize,
    pub expected: u64,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticCertificate {
    pub passed: bool,
    pub rows: Vec<CertificateRow>,
    /// The supplied dimensions, printed verbatim.
    pub supplied: Vec<u64>,
}

/// The arity-3 divisor formed by the root of `t` and its child `c`.
fn quadratic_divisor(t: &Tree, c: usize) -> Option<Tree> {
    let Tree::Node(g, ch) = t else { return None };
    let Tree::Node(h, gch) = &ch[c] else { return None };
    let leafify = |x: &Tree| Tree::Leaf(x.min_leaf());
    let mut kids: Vec<Tree> = ch.iter().map(leafify).collect();
    kids[c] = Tree::Node(*h, gch.iter().map(leafify).collect());
    Some(Tree::Node(*g, kids).standardize())
}

/// Counts monomials all of whose quadratic divisors are leading terms and
/// compares with the supplied Koszul dual dimensions (`dims[i]` is arity
/// `i + 1`).
pub fn quadratic_certificate(gb: &TruncatedGB, dims: &[u64], n: usize) -> Result<QuadraticCertificate> {
    if let Some(g) = gb.elements.iter().find(|g| g.arity() != 3) {
        return Err(Error::NotQuadratic(format!("element of arity {}", g.arity())));
    }
    if let Some(g) = gb.signature.generators().iter().find(|g| g.arity != 2) {
        return Err(Error::NotQuadratic(format!("generator `{}` is not binary", g.name)));
    }
    let leads = gb.leading_terms();
    if leads.iter().any(|t| t.degree() != 2) {
        return Err(Error::NotQuadratic("leading term of degree other than 2".into()));
    }
    let lead_set: std::collections::HashSet<Tree> = leads.into_iter().collect();
    let mut e = MonomialEnumerator::new(&gb.signature, |t: &Tree| {
        let Tree::Node(_, ch) = t else { return true };
        (0..ch.len()).all(|c| match quadratic_divisor(t, c) {
            Some(q) => lead_set.contains(&q),
            None => true,
        })
    });
    let mut rows = Vec::new();
    for k in 1..=n.min(dims.len()) {
        let count = e.arity(k).len();
        rows.push(CertificateRow {
            arity: k,
            count,
            expected: dims[k - 1],
            equal: count as u64 == dims[k - 1],
        });
    }
    Ok(QuadraticCertificate {
        passed: !rows.is_empty() && rows.iter().all(|r| r.equal),
        rows,
        supplied: dims.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;
    use crate::presentation::{GeneratorSpec, Symmetry};
    use crate::shuffle_tree::parse_tree;

    fn lie_sp() -> ShufflePresentation {
        let gens = vec![GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)];
        let sig = Signature::new(&gens);
        let j = Polynomial::parse("b(b(1,2),3) - b(1,b(2,3)) - b(b(1,3),2)", &sig).unwrap();
        ShufflePresentation {
            name: "lie".into(),
            generators: gens,
            signature: sig,
            relations: vec![j],
        }
    }

    #[test]
    fn lie_basis_is_jacobi() {
        let sp = lie_sp();
        for preset in ["rgpl", "gpl"] {
            let ord = OrderingSpec::preset_default(preset, &sp.signature).unwrap();
            let gb = buchberger(&sp, &ord, 5);
            assert_eq!(gb.elements.len(), 1);
            assert!(gb.is_complete(5));
            let dims: Vec<usize> = hilbert_series(&gb, 5).unwrap().iter().map(|h| h.dim).collect();
            assert_eq!(dims, vec![1, 1, 2, 6, 24]);
        }
    }

    #[test]
    fn free_plain_counts() {
        let gens = vec![GeneratorSpec::new("*", 2, Symmetry::Plain)];
        let sig = Signature::new(&gens);
        let sp = ShufflePresentation {
            name: "free".into(),
            generators: gens,
            signature: sig.clone(),
            relations: vec![],
        };
        let ord = OrderingSpec::preset_default("rgpl", &sig).unwrap();
        let gb = buchberger(&sp, &ord, 4);
        assert!(gb.elements.is_empty());
        assert_eq!(normal_monomials(&gb, 3).unwrap().len(), 12);
        assert!(matches!(normal_monomials(&gb, 5), Err(Error::OutOfBound { .. })));
    }

    #[test]
    fn monomial_relation_spolynomial_vanishes() {
        let sp = lie_sp();
        let ord = OrderingSpec::preset_default("rgpl", &sp.signature).unwrap();
        let m = Polynomial::monomial(parse_tree(&sp.signature, "b(1,b(2,3))").unwrap(), int(1));
        let lt = m.leading_monomial(&ord).unwrap().clone();
        for site in overlaps(&lt, &lt, 5) {
            assert!(spolynomial(&site, &m, &m, &ord).unwrap().is_zero());
        }
    }

    #[test]
    fn lie_certificate_with_commutative_dims() {
        let sp = lie_sp();
        let ord = OrderingSpec::preset_default("rgpl", &sp.signature).unwrap();
        let gb = buchberger(&sp, &ord, 6);
        let cert = quadratic_certificate(&gb, &[1; 6], 6).unwrap();
        assert!(cert.passed, "{cert:?}");
    }
}
