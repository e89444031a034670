//! Brute-force dimensions in the free symmetric operad.
//!
//! The arity-n part of the operadic ideal generated by identities is built
//! inductively from graftings of one generator above or below lower-arity
//! ideal elements. See `docs/oracle.md` for why these suffice.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Coeff, Echelon, Row};
use crate::presentation::{sym_canonical, GeneratorSpec, MultilinearIdentity, Presentation, Symmetry};
use crate::shuffle_tree::{permutations, Tree};

pub const DEFAULT_GUARD: usize = 5;
pub const FREE_GUARD: usize = 6;

fn combinations(n: usize, k: usize) -> Vec<Vec<u8>> {
    fn rec(start: u8, n: u8, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n as u8, k, &mut Vec::new(), &mut out);
    out
}

/// Canonical symmetric monomials of arity `n` (children of symmetric and
/// antisymmetric vertices ordered by minimal leaf).
pub fn free_basis(gens: &[GeneratorSpec], n: usize) -> Vec<Tree> {
    let mut memo: Vec<Vec<Tree>> = vec![Vec::new(), vec![Tree::Leaf(1)]];
    for m in 2..=n {
        let mut level = Vec::new();
        for (gi, g) in gens.iter().enumerate() {
            let k = g.arity;
            if k > m {
                continue;
            }
            for blocks in set_partitions(m, k) {
                let orders: Vec<Vec<u8>> = match g.symmetry {
                    Symmetry::Plain => permutations(k),
                    _ => vec![(0..k as u8).collect()],
                };
                for order in orders {
                    let ordered: Vec<&Vec<u8>> = order.iter().map(|&i| &blocks[i as usize]).collect();
                    let mut idx = vec![0usize; k];
                    loop {
                        let children: Vec<Tree> = ordered
                            .iter()
                            .zip(&idx)
                            .map(|(b, &i)| memo[b.len()][i].relabel(&|l| b[l as usize - 1]))
                            .collect();
                        level.push(Tree::Node(gi as u16, children));
                        let mut j = 0;
                        while j < k {
                            idx[j] += 1;
                            if idx[j] < memo[ordered[j].len()].len() {
                                break;
                            }
                            idx[j] = 0;
                            j += 1;
                        }
                        if j == k {
                            break;
                        }
                    }
                }
            }
        }
        level.sort();
        memo.push(level);
    }
    memo.truncate(n + 1);
    memo.pop().unwrap_or_default()
}

/// Set partitions of 1..n into `k` blocks, blocks ordered by minimum.
fn set_partitions(n: usize, k: usize) -> Vec<Vec<Vec<u8>>> {
    fn rec(next: usize, n: usize, k: usize, blocks: &mut Vec<Vec<u8>>, out: &mut Vec<Vec<Vec<u8>>>) {
        if next > n {
            if blocks.len() == k {
                out.push(blocks.clone());
            }
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(next as u8);
            rec(next + 1, n, k, blocks, out);
            blocks[b].pop();
        }
        if blocks.len() < k {
            blocks.push(vec![next as u8]);
            rec(next + 1, n, k, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn free_dim(gens: &[GeneratorSpec], n: usize) -> Result<usize> {
    free_dim_guarded(gens, n, FREE_GUARD)
}

pub fn free_dim_guarded(gens: &[GeneratorSpec], n: usize, guard: usize) -> Result<usize> {
    if n > guard {
        return Err(Error::BoundExceeded { requested: n, guard });
    }
    Ok(free_basis(gens, n).len())
}

struct Space {
    basis: Vec<Tree>,
    index: HashMap<Tree, usize>,
    echelon: Echelon<usize>,
    descriptors: Vec<String>,
}

/// Membership answer with the expressing combination of generating elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub witness: Vec<(String, String)>,
}

/// Consequence spaces of a presentation's identities.
pub struct Oracle {
    gens: Vec<GeneratorSpec>,
    identities: Vec<MultilinearIdentity>,
    guard: usize,
    spaces: BTreeMap<usize, Space>,
}

impl Oracle {
    pub fn new(p: &Presentation) -> Result<Self> {
        Ok(Oracle {
            gens: p.generators.clone(),
            identities: p.multilinear_identities()?,
            guard: DEFAULT_GUARD,
            spaces: BTreeMap::new(),
        })
    }

    pub fn with_guard(mut self, guard: usize) -> Self {
        self.guard = guard;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.guard {
            return Err(Error::BoundExceeded {
                requested: n,
                guard: self.guard,
            });
        }
        Ok(())
    }

    pub fn free_dim(&self, n: usize) -> Result<usize> {
        free_dim_guarded(&self.gens, n, self.guard.max(FREE_GUARD))
    }

    pub fn consequence_dim(&mut self, n: usize) -> Result<usize> {
        self.check(n)?;
        self.build(n);
        Ok(self.spaces[&n].echelon.rank())
    }

    pub fn operad_dim(&mut self, n: usize) -> Result<usize> {
        self.check(n)?;
        self.build(n);
        let s = &self.spaces[&n];
        Ok(s.basis.len() - s.echelon.rank())
    }

    /// Whether `element` lies in the ideal generated by the identities.
    pub fn is_consequence(&mut self, element: &MultilinearIdentity) -> Result<Membership> {
        let n = element.arity;
        self.check(n)?;
        self.build(n);
        let s = &self.spaces[&n];
        let row = to_row(&self.gens, &s.index, element.terms.iter().map(|(t, c)| (t.clone(), c.clone())));
        Ok(match s.echelon.witness(&row) {
            Some(w) => Membership {
                member: true,
                witness: w
                    .into_iter()
                    .map(|(tag, c)| (c.to_string(), s.descriptors[tag].clone()))
                    .collect(),
            },
            None => Membership {
                member: false,
                witness: Vec::new(),
            },
        })
    }

    fn build(&mut self, n: usize) {
        if self.spaces.contains_key(&n) {
            return;
        }
        for m in 1..n {
            self.build(m);
        }
        let basis = free_basis(&self.gens, n);
        let index: HashMap<Tree, usize> = basis.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut echelon = Echelon::new();
        let mut descriptors = Vec::new();
        let full = basis.len();
        let mut add = |row: Row<usize>, desc: String, echelon: &mut Echelon<usize>| {
            if echelon.rank() < full && !row.is_empty() {
                descriptors.push(desc);
                echelon.insert_tagged(row, descriptors.len() - 1);
            }
        };
        for (ii, id) in self.identities.iter().enumerate().filter(|(_, id)| id.arity == n) {
            for perm in permutations(n) {
                let terms = id
                    .terms
                    .iter()
                    .map(|(t, c)| (t.relabel(&|l| perm[l as usize - 1] + 1), c.clone()));
                let row = to_row(&self.gens, &index, terms);
                let shown: Vec<String> = perm.iter().map(|p| (p + 1).to_string()).collect();
                add(row, format!("identity #{} relabelled by [{}]", ii + 1, shown.join(",")), &mut echelon);
            }
        }
        for m in 2..n {
            let lower = &self.spaces[&m];
            let rows: Vec<Vec<(Tree, Coeff)>> = lower
                .echelon
                .rows()
                .map(|r| r.iter().map(|(i, c)| (lower.basis[*i].clone(), c.clone())).collect())
                .collect();
            for (gi, g) in self.gens.iter().enumerate() {
                let k = g.arity;
                if m + k - 1 != n {
                    continue;
                }
                for (ri, v) in rows.iter().enumerate() {
                    for slot in 0..k {
                        for s in combinations(n, m) {
                            let rest: Vec<u8> = (1..=n as u8).filter(|l| !s.contains(l)).collect();
                            for order in permutations(k - 1) {
                                let terms = v.iter().map(|(t, c)| {
                                    let inner = t.relabel(&|l| s[l as usize - 1]);
                                    let mut others = order.iter().map(|&o| Tree::Leaf(rest[o as usize]));
                                    let children: Vec<Tree> = (0..k)
                                        .map(|j| if j == slot { inner.clone() } else { others.next().unwrap_or(Tree::Leaf(0)) })
                                        .collect();
                                    (Tree::Node(gi as u16, children), c.clone())
                                });
                                let row = to_row(&self.gens, &index, terms);
                                add(
                                    row,
                                    format!("{} with arity-{m} consequence #{} in slot {}", g.name, ri + 1, slot + 1),
                                    &mut echelon,
                                );
                            }
                        }
                    }
                    for l in combinations(n, k) {
                        let rest: Vec<u8> = (1..=n as u8).filter(|x| !l.contains(x)).collect();
                        for order in permutations(k) {
                            let grafted = Tree::Node(gi as u16, order.iter().map(|&o| Tree::Leaf(l[o as usize])).collect());
                            let terms = v.iter().map(|(t, c)| (graft_last(t, m as u8, &grafted, &rest), c.clone()));
                            let row = to_row(&self.gens, &index, terms);
                            add(
                                row,
                                format!("arity-{m} consequence #{} with {} at its last input", ri + 1, g.name),
                                &mut echelon,
                            );
                        }
                    }
                }
            }
        }
        self.spaces.insert(
            n,
            Space {
                basis,
                index,
                echelon,
                descriptors,
            },
        );
    }
}

fn graft_last(t: &Tree, last: u8, inner: &Tree, rest: &[u8]) -> Tree {
    match t {
        Tree::Leaf(l) if *l == last => inner.clone(),
        Tree::Leaf(l) => Tree::Leaf(rest[*l as usize - 1]),
        Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| graft_last(c, last, inner, rest)).collect()),
    }
}

fn to_row(
    gens: &[GeneratorSpec],
    index: &HashMap<Tree, usize>,
    terms: impl Iterator<Item = (Tree, Coeff)>,
) -> Row<usize> {
    let mut row: Row<usize> = Row::new();
    for (t, c) in terms {
        let (canon, sign) = sym_canonical(gens, &t);
        let Some(&i) = index.get(&canon) else { continue };
        let e = row.entry(i).or_insert_with(Coeff::zero);
        if sign > 0 {
            *e += c;
        } else {
            *e -= c;
        }
    }
    row.retain(|_, c| !c.is_zero());
    row
}

/// A multilinear element given by its terms, for membership queries.
pub fn element(arity: usize, terms: impl IntoIterator<Item = (Tree, Coeff)>) -> MultilinearIdentity {
    let mut acc: BTreeMap<Tree, Coeff> = BTreeMap::new();
    for (t, c) in terms {
        *acc.entry(t).or_insert_with(Coeff::zero) += c;
    }
    acc.retain(|_, c| !c.is_zero());
    MultilinearIdentity { arity, terms: acc }
}

/// The unit coefficient, exposed for callers building elements.
pub fn one() -> Coeff {
    Coeff::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_dims() {
        let plain = [GeneratorSpec::new("*", 2, Symmetry::Plain)];
        let anti = [GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)];
        assert_eq!(free_dim(&plain, 3).unwrap(), 12);
        assert_eq!(free_dim(&anti, 3).unwrap(), 3);
        assert_eq!(free_dim(&plain, 4).unwrap(), 120);
        assert_eq!(free_dim(&anti, 4).unwrap(), 15);
        assert!(matches!(free_dim(&plain, 7), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn free_presentation_has_no_consequences() {
        let p = Presentation {
            name: "free".into(),
            generators: vec![GeneratorSpec::new("*", 2, Symmetry::Plain)],
            identities: vec![],
        };
        let mut o = Oracle::new(&p).unwrap();
        assert_eq!(o.consequence_dim(4).unwrap(), 0);
        assert_eq!(o.operad_dim(3).unwrap(), 12);
        assert!(matches!(o.operad_dim(6), Err(Error::BoundExceeded { .. })));
    }
}
