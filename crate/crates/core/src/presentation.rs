//! Presentations of varieties: generators, identities, multilinearization and
//! linear changes of the binary generator basis.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{content, invert, Coeff};
use crate::shuffle_tree::{perm_sign, permutations, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Plain,
    Symmetric,
    Antisymmetric,
}

impl Symmetry {
    pub fn keyword(self) -> &'static str {
        match self {
            Symmetry::Plain => "plain",
            Symmetry::Symmetric => "sym",
            Symmetry::Antisymmetric => "antisym",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub arity: usize,
    pub symmetry: Symmetry,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, arity: usize, symmetry: Symmetry) -> Self {
        GeneratorSpec {
            name: name.into(),
            arity,
            symmetry,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.arity < 2 {
            return Err(Error::BadArity {
                name: self.name.clone(),
                arity: self.arity,
            });
        }
        if self.symmetry != Symmetry::Plain && self.arity != 2 {
            return Err(Error::SymmetryOnNonBinary {
                name: self.name.clone(),
                arity: self.arity,
                symmetry: self.symmetry.keyword().to_string(),
            });
        }
        Ok(())
    }

    /// Dimension of the generator's arity component.
    pub fn dimension(&self) -> u64 {
        match self.symmetry {
            Symmetry::Plain => (1..=self.arity as u64).product(),
            _ => 1,
        }
    }
}

/// A nonassociative monomial over named variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    fn variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::App(_, args) => args.iter().for_each(|a| a.variables(out)),
        }
    }
}

/// A linear combination of terms, set equal to zero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RawIdentity {
    pub terms: BTreeMap<Term, Coeff>,
}

impl RawIdentity {
    pub fn new(terms: BTreeMap<Term, Coeff>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        RawIdentity { terms }
    }

    fn multidegree(t: &Term) -> BTreeMap<String, usize> {
        let mut vars = Vec::new();
        t.variables(&mut vars);
        let mut deg = BTreeMap::new();
        for v in vars {
            *deg.entry(v).or_insert(0) += 1;
        }
        deg
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    pub identities: Vec<RawIdentity>,
}

/// A multilinear identity: leaves are labelled 1..n, internal vertices carry
/// generator indices, and children of symmetric or antisymmetric vertices are
/// ordered by minimal leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearIdentity {
    pub arity: usize,
    pub terms: BTreeMap<Tree, Coeff>,
}

fn identity_label(i: usize) -> String {
    format!("#{}", i + 1)
}

impl Presentation {
    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for g in &self.generators {
            g.check()?;
            if seen.insert(g.name.as_str(), ()).is_some() {
                return Err(Error::DuplicateGenerator(g.name.clone()));
            }
        }
        for (i, id) in self.identities.iter().enumerate() {
            check_identity(&self.generators, id, &identity_label(i))?;
        }
        Ok(())
    }

    /// Multilinearizations of all identities, in order.
    pub fn multilinear_identities(&self) -> Result<Vec<MultilinearIdentity>> {
        self.validate()?;
        let mut out = Vec::new();
        for (i, id) in self.identities.iter().enumerate() {
            out.extend(multilinearize_labelled(&self.generators, id, &identity_label(i))?);
        }
        Ok(out)
    }
}

/// Checks `p` and returns it unchanged.
pub fn validate(p: Presentation) -> Result<Presentation> {
    p.validate()?;
    Ok(p)
}

fn check_term(gens: &[GeneratorSpec], t: &Term, label: &str) -> Result<()> {
    if let Term::App(f, args) = t {
        let g = gens.iter().find(|g| &g.name == f).ok_or_else(|| Error::UndeclaredGenerator {
            name: f.clone(),
            identity: label.to_string(),
        })?;
        if g.arity != args.len() {
            return Err(Error::ArgumentCount {
                name: f.clone(),
                identity: label.to_string(),
                expected: g.arity,
                got: args.len(),
            });
        }
        for a in args {
            check_term(gens, a, label)?;
        }
    }
    Ok(())
}

fn check_identity(gens: &[GeneratorSpec], id: &RawIdentity, label: &str) -> Result<()> {
    if id.terms.is_empty() {
        return Err(Error::ZeroIdentity(label.to_string()));
    }
    for t in id.terms.keys() {
        check_term(gens, t, label)?;
    }
    let mut iter = id.terms.keys().map(RawIdentity::multidegree);
    let first = iter.next().unwrap_or_default();
    for deg in iter {
        if deg != first {
            let variable = first
                .keys()
                .chain(deg.keys())
                .find(|v| first.get(*v) != deg.get(*v))
                .cloned()
                .unwrap_or_default();
            return Err(Error::InhomogeneousIdentity {
                identity: label.to_string(),
                variable,
            });
        }
    }
    Ok(())
}

/// Orders children of symmetric and antisymmetric vertices by minimal leaf,
/// returning the sign picked up by antisymmetric swaps.
pub fn sym_canonical(gens: &[GeneratorSpec], t: &Tree) -> (Tree, i32) {
    fn rec(gens: &[GeneratorSpec], t: &Tree) -> (Tree, i32, u8) {
        match t {
            Tree::Leaf(l) => (Tree::Leaf(*l), 1, *l),
            Tree::Node(g, ch) => {
                let mut sign = 1;
                let mut kids: Vec<(Tree, u8)> = ch
                    .iter()
                    .map(|c| {
                        let (ct, s, m) = rec(gens, c);
                        sign *= s;
                        (ct, m)
                    })
                    .collect();
                let sym = gens[*g as usize].symmetry;
                if sym != Symmetry::Plain && kids.len() == 2 && kids[0].1 > kids[1].1 {
                    kids.swap(0, 1);
                    if sym == Symmetry::Antisymmetric {
                        sign = -sign;
                    }
                }
                let min = kids.iter().map(|k| k.1).min().unwrap_or(u8::MAX);
                (Tree::Node(*g, kids.into_iter().map(|k| k.0).collect()), sign, min)
            }
        }
    }
    let (tree, sign, _) = rec(gens, t);
    (tree, sign)
}

/// Full polarization of one identity.
pub fn multilinearize(gens: &[GeneratorSpec], id: &RawIdentity) -> Result<Vec<MultilinearIdentity>> {
    multilinearize_labelled(gens, id, "identity")
}

enum Template {
    Slot(usize, usize),
    Node(u16, Vec<Template>),
}

fn template(
    gens: &[GeneratorSpec],
    t: &Term,
    var_index: &BTreeMap<String, usize>,
    seen: &mut [usize],
) -> Template {
    match t {
        Term::Var(v) => {
            let vi = var_index[v];
            let occ = seen[vi];
            seen[vi] += 1;
            Template::Slot(vi, occ)
        }
        Term::App(f, args) => {
            let g = gens.iter().position(|g| &g.name == f).unwrap_or(0) as u16;
            Template::Node(g, args.iter().map(|a| template(gens, a, var_index, seen)).collect())
        }
    }
}

fn instantiate(t: &Template, labels: &[Vec<u8>]) -> Tree {
    match t {
        Template::Slot(v, occ) => Tree::Leaf(labels[*v][*occ]),
        Template::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| instantiate(c, labels)).collect()),
    }
}

fn multilinearize_labelled(
    gens: &[GeneratorSpec],
    id: &RawIdentity,
    label: &str,
) -> Result<Vec<MultilinearIdentity>> {
    check_identity(gens, id, label)?;
    let degrees = id.terms.keys().next().map(RawIdentity::multidegree).unwrap_or_default();
    let arity: usize = degrees.values().sum();
    if arity > 255 {
        return Err(Error::InvalidTree("identity has more than 255 variables".into()));
    }
    let var_index: BTreeMap<String, usize> = degrees.keys().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let mut blocks: Vec<Vec<u8>> = Vec::new();
    let mut next = 1u8;
    for d in degrees.values() {
        blocks.push((next..next + *d as u8).collect());
        next += *d as u8;
    }
    let block_perms: Vec<Vec<Vec<u8>>> = degrees.values().map(|d| permutations(*d)).collect();
    let mut acc: BTreeMap<Tree, Coeff> = BTreeMap::new();
    for (term, coef) in &id.terms {
        let mut seen = vec![0usize; degrees.len()];
        let tpl = template(gens, term, &var_index, &mut seen);
        let mut idx = vec![0usize; blocks.len()];
        loop {
            let labels: Vec<Vec<u8>> = blocks
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(v, (b, &i))| block_perms[v][i].iter().map(|&p| b[p as usize]).collect())
                .collect();
            let (tree, sign) = sym_canonical(gens, &instantiate(&tpl, &labels));
            let entry = acc.entry(tree).or_insert_with(Coeff::zero);
            if sign > 0 {
                *entry += coef;
            } else {
                *entry -= coef;
            }
            let mut j = 0;
            while j < idx.len() {
                idx[j] += 1;
                if idx[j] < block_perms[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                break;
            }
        }
    }
    acc.retain(|_, c| !c.is_zero());
    if acc.is_empty() {
        return Ok(Vec::new());
    }
    let c = content(acc.values());
    for v in acc.values_mut() {
        *v /= &c;
    }
    Ok(vec![MultilinearIdentity { arity, terms: acc }])
}

/// A rule expressing an old binary operation through the new ones, as a
/// linear combination of new operations applied to `args` in either order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisRule {
    pub old: String,
    pub args: [String; 2],
    pub rhs: BTreeMap<Term, Coeff>,
}

/// An invertible linear change of the binary generators.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BasisChange {
    pub new_generators: Vec<GeneratorSpec>,
    pub rules: Vec<BasisRule>,
}

struct Coordinates {
    offsets: HashMap<String, (usize, Symmetry)>,
    dim: usize,
}

impl Coordinates {
    fn new(gens: &[GeneratorSpec]) -> Self {
        let mut offsets = HashMap::new();
        let mut dim = 0;
        for g in gens.iter().filter(|g| g.arity == 2) {
            offsets.insert(g.name.clone(), (dim, g.symmetry));
            dim += if g.symmetry == Symmetry::Plain { 2 } else { 1 };
        }
        Coordinates { offsets, dim }
    }

    fn vector(&self, rule: &BasisRule, swapped: bool) -> Result<Vec<Coeff>> {
        let mut v = vec![Coeff::zero(); self.dim];
        let [x, y] = &rule.args;
        for (term, c) in &rule.rhs {
            let bad = || Error::SingularMap(format!("rule for `{}` must combine new binary operations applied to ({x},{y})", rule.old));
            let Term::App(h, args) = term else {
                return Err(bad());
            };
            let (off, sym) = *self.offsets.get(h).ok_or_else(bad)?;
            let forward = match (args.as_slice(), swapped) {
                ([Term::Var(a), Term::Var(b)], false) if a == x && b == y => true,
                ([Term::Var(a), Term::Var(b)], false) if a == y && b == x => false,
                ([Term::Var(a), Term::Var(b)], true) if a == x && b == y => false,
                ([Term::Var(a), Term::Var(b)], true) if a == y && b == x => true,
                _ => return Err(bad()),
            };
            match (sym, forward) {
                (Symmetry::Plain, true) => v[off] += c,
                (Symmetry::Plain, false) => v[off + 1] += c,
                (Symmetry::Symmetric, _) | (Symmetry::Antisymmetric, true) => v[off] += c,
                (Symmetry::Antisymmetric, false) => v[off] -= c,
            }
        }
        Ok(v)
    }
}

impl BasisChange {
    /// The identity change of basis for the binary generators of `gens`.
    pub fn identity(gens: &[GeneratorSpec]) -> BasisChange {
        let binary: Vec<GeneratorSpec> = gens.iter().filter(|g| g.arity == 2).cloned().collect();
        let rules = binary
            .iter()
            .map(|g| BasisRule {
                old: g.name.clone(),
                args: ["x".into(), "y".into()],
                rhs: [(Term::app(&g.name, vec![Term::var("x"), Term::var("y")]), Coeff::one())]
                    .into_iter()
                    .collect(),
            })
            .collect();
        BasisChange {
            new_generators: binary,
            rules,
        }
    }

    fn rule(&self, old: &str) -> Option<&BasisRule> {
        self.rules.iter().find(|r| r.old == old)
    }

    /// Old basis vectors in new coordinates, as matrix columns, plus the
    /// matching old terms.
    fn matrix(&self, old: &[GeneratorSpec]) -> Result<(Vec<Vec<Coeff>>, Vec<Term>)> {
        for g in &self.new_generators {
            g.check()?;
            if g.arity != 2 {
                return Err(Error::SingularMap(format!("new generator `{}` is not binary", g.name)));
            }
        }
        for r in &self.rules {
            match old.iter().find(|g| g.name == r.old) {
                Some(g) if g.arity == 2 => {}
                Some(_) => return Err(Error::SingularMap(format!("`{}` is not binary", r.old))),
                None => {
                    return Err(Error::UndeclaredGenerator {
                        name: r.old.clone(),
                        identity: "basis change".into(),
                    })
                }
            }
            if r.args[0] == r.args[1] {
                return Err(Error::SingularMap(format!("rule for `{}` repeats its argument", r.old)));
            }
        }
        let coords = Coordinates::new(&self.new_generators);
        let xy = || vec![Term::var("x"), Term::var("y")];
        let yx = || vec![Term::var("y"), Term::var("x")];
        let mut columns = Vec::new();
        let mut terms = Vec::new();
        for g in old.iter().filter(|g| g.arity == 2) {
            let rule = self
                .rule(&g.name)
                .ok_or_else(|| Error::SingularMap(format!("no rule for binary generator `{}`", g.name)))?;
            let v = coords.vector(rule, false)?;
            let w = coords.vector(rule, true)?;
            match g.symmetry {
                Symmetry::Plain => {
                    columns.push(v);
                    columns.push(w);
                    terms.push(Term::app(&g.name, xy()));
                    terms.push(Term::app(&g.name, yx()));
                }
                Symmetry::Symmetric => {
                    if v != w {
                        return Err(Error::SingularMap(format!("image of symmetric `{}` is not symmetric", g.name)));
                    }
                    columns.push(v);
                    terms.push(Term::app(&g.name, xy()));
                }
                Symmetry::Antisymmetric => {
                    if v.iter().zip(&w).any(|(a, b)| *a != -b.clone()) {
                        return Err(Error::SingularMap(format!(
                            "image of antisymmetric `{}` is not antisymmetric",
                            g.name
                        )));
                    }
                    columns.push(v);
                    terms.push(Term::app(&g.name, xy()));
                }
            }
        }
        if columns.len() != coords.dim {
            return Err(Error::SingularMap(format!(
                "old binary space has dimension {}, new one {}",
                columns.len(),
                coords.dim
            )));
        }
        let n = coords.dim;
        let matrix: Vec<Vec<Coeff>> = (0..n).map(|r| (0..n).map(|c| columns[c][r].clone()).collect()).collect();
        Ok((matrix, terms))
    }

    /// The inverse change of basis, mapping the new generators back to the
    /// binary generators of `old`.
    pub fn inverse(&self, old: &[GeneratorSpec]) -> Result<BasisChange> {
        let (matrix, old_terms) = self.matrix(old)?;
        let inv = invert(&matrix).ok_or_else(|| Error::SingularMap("matrix is not invertible".into()))?;
        let coords = Coordinates::new(&self.new_generators);
        let mut rules = Vec::new();
        for h in &self.new_generators {
            let (off, _) = coords.offsets[&h.name];
            let rhs: BTreeMap<Term, Coeff> = old_terms
                .iter()
                .enumerate()
                .filter(|(j, _)| !inv[*j][off].is_zero())
                .map(|(j, t)| (t.clone(), inv[j][off].clone()))
                .collect();
            rules.push(BasisRule {
                old: h.name.clone(),
                args: ["x".into(), "y".into()],
                rhs,
            });
        }
        Ok(BasisChange {
            new_generators: old.iter().filter(|g| g.arity == 2).cloned().collect(),
            rules,
        })
    }

    fn expand(&self, t: &Term) -> BTreeMap<Term, Coeff> {
        match t {
            Term::Var(_) => [(t.clone(), Coeff::one())].into_iter().collect(),
            Term::App(f, args) => {
                let parts: Vec<BTreeMap<Term, Coeff>> = args.iter().map(|a| self.expand(a)).collect();
                let mut out = BTreeMap::new();
                match self.rule(f) {
                    Some(rule) => {
                        for (rt, rc) in &rule.rhs {
                            let Term::App(h, rargs) = rt else { continue };
                            let pick: Vec<&BTreeMap<Term, Coeff>> = rargs
                                .iter()
                                .map(|a| match a {
                                    Term::Var(v) if *v == rule.args[0] => &parts[0],
                                    _ => &parts[1],
                                })
                                .collect();
                            for (t0, c0) in pick[0] {
                                for (t1, c1) in pick[1] {
                                    let c = rc * c0 * c1;
                                    *out.entry(Term::App(h.clone(), vec![t0.clone(), t1.clone()]))
                                        .or_insert_with(Coeff::zero) += c;
                                }
                            }
                        }
                    }
                    None => {
                        let mut acc: Vec<(Vec<Term>, Coeff)> = vec![(Vec::new(), Coeff::one())];
                        for part in &parts {
                            let mut next = Vec::new();
                            for (prefix, c) in &acc {
                                for (t, tc) in part {
                                    let mut p = prefix.clone();
                                    p.push(t.clone());
                                    next.push((p, c * tc));
                                }
                            }
                            acc = next;
                        }
                        for (a, c) in acc {
                            *out.entry(Term::App(f.clone(), a)).or_insert_with(Coeff::zero) += c;
                        }
                    }
                }
                out.retain(|_, c| !c.is_zero());
                out
            }
        }
    }
}

/// Rewrites `p` in the new binary generators. Generators of higher arity are
/// kept.
pub fn change_generator_basis(p: &Presentation, map: &BasisChange) -> Result<Presentation> {
    p.validate()?;
    let (matrix, _) = map.matrix(&p.generators)?;
    if invert(&matrix).is_none() {
        return Err(Error::SingularMap("matrix is not invertible".into()));
    }
    let mut generators = map.new_generators.clone();
    for g in p.generators.iter().filter(|g| g.arity != 2) {
        if generators.iter().any(|h| h.name == g.name) {
            return Err(Error::DuplicateGenerator(g.name.clone()));
        }
        generators.push(g.clone());
    }
    let mut identities = Vec::new();
    for id in &p.identities {
        let mut acc: BTreeMap<Term, Coeff> = BTreeMap::new();
        for (t, c) in &id.terms {
            for (nt, nc) in map.expand(t) {
                *acc.entry(nt).or_insert_with(Coeff::zero) += c * nc;
            }
        }
        let rid = RawIdentity::new(acc);
        if !rid.terms.is_empty() {
            identities.push(rid);
        }
    }
    let out = Presentation {
        name: p.name.clone(),
        generators,
        identities,
    };
    out.validate()?;
    Ok(out)
}

/// Sign of the permutation sorting `values`; used by callers that need the
/// parity of a relabelling.
pub fn sort_sign(values: &[u8]) -> i32 {
    let mut idx: Vec<u8> = (0..values.len() as u8).collect();
    idx.sort_by_key(|&i| values[i as usize]);
    perm_sign(&idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    fn mul(a: Term, b: Term) -> Term {
        Term::app("*", vec![a, b])
    }

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    fn plain_star() -> Vec<GeneratorSpec> {
        vec![GeneratorSpec::new("*", 2, Symmetry::Plain)]
    }

    #[test]
    fn rejects_bad_generators() {
        let p = Presentation {
            name: "x".into(),
            generators: vec![GeneratorSpec::new("u", 1, Symmetry::Plain)],
            identities: vec![],
        };
        assert!(matches!(p.validate(), Err(Error::BadArity { .. })));
        let p = Presentation {
            name: "x".into(),
            generators: vec![GeneratorSpec::new("t", 3, Symmetry::Symmetric)],
            identities: vec![],
        };
        assert!(matches!(p.validate(), Err(Error::SymmetryOnNonBinary { .. })));
    }

    #[test]
    fn accepts_associativity_and_rejects_undeclared() {
        let assoc = RawIdentity::new(
            [
                (mul(mul(v("x"), v("y")), v("z")), int(1)),
                (mul(v("x"), mul(v("y"), v("z"))), int(-1)),
            ]
            .into_iter()
            .collect(),
        );
        let p = Presentation {
            name: "assoc".into(),
            generators: plain_star(),
            identities: vec![assoc.clone()],
        };
        assert!(p.validate().is_ok());
        let bad = Presentation {
            generators: vec![GeneratorSpec::new("o", 2, Symmetry::Plain)],
            ..p
        };
        assert!(matches!(bad.validate(), Err(Error::UndeclaredGenerator { .. })));
    }

    #[test]
    fn inhomogeneous_rejected() {
        let id = RawIdentity::new(
            [(mul(v("x"), v("x")), int(1)), (mul(v("x"), v("y")), int(1))].into_iter().collect(),
        );
        assert!(matches!(
            multilinearize(&plain_star(), &id),
            Err(Error::InhomogeneousIdentity { .. })
        ));
    }

    #[test]
    fn right_nil_polarizes_to_full_sum() {
        let id = RawIdentity::new([(mul(v("x"), mul(v("x"), v("x"))), int(1))].into_iter().collect());
        let ml = multilinearize(&plain_star(), &id).unwrap();
        assert_eq!(ml.len(), 1);
        assert_eq!(ml[0].arity, 3);
        assert_eq!(ml[0].terms.len(), 6);
        assert!(ml[0].terms.values().all(|c| *c == int(1)));
    }

    #[test]
    fn symmetric_nil_divides_multiplicity() {
        let gens = vec![GeneratorSpec::new("o", 2, Symmetry::Symmetric)];
        let o = |a, b| Term::app("o", vec![a, b]);
        let id = RawIdentity::new([(o(o(v("x"), v("x")), v("x")), int(1))].into_iter().collect());
        let ml = multilinearize(&gens, &id).unwrap();
        assert_eq!(ml[0].terms.len(), 3);
        assert!(ml[0].terms.values().all(|c| *c == int(1)));
    }

    #[test]
    fn multilinearize_is_idempotent_on_multilinear_input() {
        let id = RawIdentity::new(
            [
                (mul(mul(v("x"), v("y")), v("z")), int(1)),
                (mul(v("x"), mul(v("y"), v("z"))), int(-1)),
            ]
            .into_iter()
            .collect(),
        );
        let ml = multilinearize(&plain_star(), &id).unwrap();
        assert_eq!(ml[0].terms.len(), 2);
    }

    #[test]
    fn identity_basis_change_is_identity() {
        let id = RawIdentity::new([(mul(v("x"), mul(v("y"), v("z"))), int(1))].into_iter().collect());
        let p = Presentation {
            name: "p".into(),
            generators: plain_star(),
            identities: vec![id],
        };
        let q = change_generator_basis(&p, &BasisChange::identity(&p.generators)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn singular_basis_change_rejected() {
        let p = Presentation {
            name: "p".into(),
            generators: plain_star(),
            identities: vec![],
        };
        let map = BasisChange {
            new_generators: vec![GeneratorSpec::new("o", 2, Symmetry::Symmetric)],
            rules: vec![BasisRule {
                old: "*".into(),
                args: ["x".into(), "y".into()],
                rhs: [(Term::app("o", vec![v("x"), v("y")]), int(1))].into_iter().collect(),
            }],
        };
        assert!(matches!(change_generator_basis(&p, &map), Err(Error::SingularMap(_))));
    }
}
