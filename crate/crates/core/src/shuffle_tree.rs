//! Tree monomials of free shuffle operads.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentation::{GeneratorSpec, Symmetry};

/// Index of a shuffle generator variant inside a [`Signature`].
pub type GenId = u16;

/// A planar rooted tree with labelled leaves and decorated internal vertices.
///
/// The derived `Ord` is the fixed canonical order used wherever an order
/// independent of any user ordering is needed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tree {
    Leaf(u8),
    Node(GenId, Vec<Tree>),
}

impl Tree {
    pub fn leaf(label: u8) -> Tree {
        Tree::Leaf(label)
    }

    pub fn node(gen: GenId, children: Vec<Tree>) -> Tree {
        Tree::Node(gen, children)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    /// Number of leaves.
    pub fn arity(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node(_, ch) => ch.iter().map(Tree::arity).sum(),
        }
    }

    /// Number of internal vertices.
    pub fn degree(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node(_, ch) => 1 + ch.iter().map(Tree::degree).sum::<usize>(),
        }
    }

    pub fn min_leaf(&self) -> u8 {
        match self {
            Tree::Leaf(l) => *l,
            Tree::Node(_, ch) => ch.iter().map(Tree::min_leaf).min().unwrap_or(u8::MAX),
        }
    }

    /// Leaf labels in planar order.
    pub fn leaves(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<u8>) {
        match self {
            Tree::Leaf(l) => out.push(*l),
            Tree::Node(_, ch) => ch.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn relabel(&self, f: &impl Fn(u8) -> u8) -> Tree {
        match self {
            Tree::Leaf(l) => Tree::Leaf(f(*l)),
            Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| c.relabel(f)).collect()),
        }
    }

    pub fn map_gens(&self, f: &impl Fn(GenId) -> GenId) -> Tree {
        match self {
            Tree::Leaf(l) => Tree::Leaf(*l),
            Tree::Node(g, ch) => Tree::Node(f(*g), ch.iter().map(|c| c.map_gens(f)).collect()),
        }
    }

    /// Replaces leaf labels by 1..n, preserving their relative order.
    pub fn standardize(&self) -> Tree {
        let mut labels = self.leaves();
        labels.sort_unstable();
        let mut pos = [0u8; 256];
        for (i, l) in labels.iter().enumerate() {
            pos[*l as usize] = i as u8 + 1;
        }
        self.relabel(&|l| pos[l as usize])
    }

    /// Internal vertices in preorder.
    pub fn vertices(&self) -> Vec<&Tree> {
        let mut out = Vec::new();
        self.collect_vertices(&mut out);
        out
    }

    fn collect_vertices<'a>(&'a self, out: &mut Vec<&'a Tree>) {
        if let Tree::Node(_, ch) = self {
            out.push(self);
            ch.iter().for_each(|c| c.collect_vertices(out));
        }
    }

    /// Generators of all internal vertices in preorder.
    pub fn generators(&self) -> Vec<GenId> {
        self.vertices()
            .into_iter()
            .map(|v| match v {
                Tree::Node(g, _) => *g,
                Tree::Leaf(_) => unreachable!(),
            })
            .collect()
    }
}

/// One basis element of a generator's arity component as an ordered species.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShuffleGenerator {
    /// Display name, e.g. `*` or `*~21`.
    pub name: String,
    /// Name of the underlying generator.
    pub base: String,
    /// Index of the underlying generator in the presentation.
    pub family: usize,
    pub arity: usize,
    /// `variant[j]` is the (0-based) child feeding argument slot `j` of the
    /// underlying generator.
    pub variant: Vec<u8>,
    pub antisymmetric: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Family {
    arity: usize,
    symmetry: Symmetry,
    variants: Vec<GenId>,
    perm_index: HashMap<Vec<u8>, usize>,
}

/// The variants of all generators of a presentation, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    gens: Vec<ShuffleGenerator>,
    families: Vec<Family>,
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i as u8);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

pub(crate) fn perm_sign(p: &[u8]) -> i32 {
    let mut sign = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

impl Signature {
    /// Builds the shuffle variants of the given generators: a plain generator
    /// of arity k contributes k! variants, a symmetric or antisymmetric binary
    /// generator contributes one.
    pub fn new(generators: &[GeneratorSpec]) -> Signature {
        let mut gens = Vec::new();
        let mut families = Vec::new();
        for (fi, g) in generators.iter().enumerate() {
            let perms = match g.symmetry {
                Symmetry::Plain => permutations(g.arity),
                _ => vec![(0..g.arity as u8).collect()],
            };
            let mut variants = Vec::new();
            let mut perm_index = HashMap::new();
            for (pi, p) in perms.into_iter().enumerate() {
                let identity = p.iter().enumerate().all(|(i, &x)| i as u8 == x);
                let name = if identity {
                    g.name.clone()
                } else {
                    let digits: String = p
                        .iter()
                        .map(|&x| char::from_digit(x as u32 + 1, 36).unwrap_or('?'))
                        .collect();
                    format!("{}~{}", g.name, digits)
                };
                variants.push(gens.len() as GenId);
                perm_index.insert(p.clone(), pi);
                gens.push(ShuffleGenerator {
                    name,
                    base: g.name.clone(),
                    family: fi,
                    arity: g.arity,
                    variant: p,
                    antisymmetric: g.symmetry == Symmetry::Antisymmetric,
                });
            }
            families.push(Family {
                arity: g.arity,
                symmetry: g.symmetry,
                variants,
                perm_index,
            });
        }
        Signature { gens, families }
    }

    pub fn generators(&self) -> &[ShuffleGenerator] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gen(&self, id: GenId) -> &ShuffleGenerator {
        &self.gens[id as usize]
    }

    pub fn arity(&self, id: GenId) -> usize {
        self.gens[id as usize].arity
    }

    pub fn name(&self, id: GenId) -> &str {
        &self.gens[id as usize].name
    }

    pub fn find(&self, name: &str) -> Option<GenId> {
        self.gens.iter().position(|g| g.name == name).map(|i| i as GenId)
    }

    /// The variant reading its arguments in the given order.
    pub fn variant_of(&self, family: usize, perm: &[u8]) -> GenId {
        let f = &self.families[family];
        match f.symmetry {
            Symmetry::Plain => f.variants[f.perm_index[perm]],
            _ => f.variants[0],
        }
    }

    /// The untwisted variant of the generator declared at `family`.
    pub fn identity_variant(&self, family: usize) -> GenId {
        self.families[family].variants[0]
    }

    /// Checks that a tree is a shuffle tree monomial over this signature with
    /// leaves exactly 1..n.
    pub fn validate(&self, t: &Tree) -> Result<()> {
        let mut leaves = t.leaves();
        leaves.sort_unstable();
        for (i, l) in leaves.iter().enumerate() {
            if *l as usize != i + 1 {
                if i > 0 && leaves[i - 1] == *l {
                    return Err(Error::DuplicateLeafLabel(*l as u32));
                }
                return Err(Error::InvalidTree(format!(
                    "leaf labels must be exactly 1..{}",
                    leaves.len()
                )));
            }
        }
        self.check_local(t)
    }

    fn check_local(&self, t: &Tree) -> Result<()> {
        if let Tree::Node(g, ch) = t {
            if *g as usize >= self.gens.len() {
                return Err(Error::InvalidTree(format!("unknown generator index {g}")));
            }
            if ch.len() != self.arity(*g) {
                return Err(Error::InvalidTree(format!(
                    "generator {} expects {} children, got {}",
                    self.name(*g),
                    self.arity(*g),
                    ch.len()
                )));
            }
            if !is_locally_increasing(ch) {
                return Err(Error::InvalidTree(
                    "children violate the local increasing condition".into(),
                ));
            }
            for c in ch {
                self.check_local(c)?;
            }
        }
        Ok(())
    }

    /// Rewrites a tree with distinct leaf labels into the shuffle basis. Leaf
    /// labels are kept; see [`Signature::canonical`] for the standardized form.
    pub fn canonical_keep_labels(&self, t: &Tree) -> Result<(Tree, i32)> {
        let mut leaves = t.leaves();
        leaves.sort_unstable();
        if let Some(w) = leaves.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLeafLabel(w[0] as u32));
        }
        self.check_arities(t)?;
        let (tree, sign, _) = self.canon_rec(t);
        Ok((tree, sign))
    }

    /// Canonical shuffle monomial of a raw term, with leaves standardized to
    /// 1..n, and the accumulated sign.
    pub fn canonical(&self, t: &Tree) -> Result<(Tree, i32)> {
        let (tree, sign) = self.canonical_keep_labels(t)?;
        Ok((tree.standardize(), sign))
    }

    fn check_arities(&self, t: &Tree) -> Result<()> {
        if let Tree::Node(g, ch) = t {
            if *g as usize >= self.gens.len() {
                return Err(Error::InvalidTree(format!("unknown generator index {g}")));
            }
            if ch.len() != self.arity(*g) {
                return Err(Error::InvalidTree(format!(
                    "generator {} expects {} children, got {}",
                    self.name(*g),
                    self.arity(*g),
                    ch.len()
                )));
            }
            for c in ch {
                self.check_arities(c)?;
            }
        }
        Ok(())
    }

    fn canon_rec(&self, t: &Tree) -> (Tree, i32, u8) {
        match t {
            Tree::Leaf(l) => (Tree::Leaf(*l), 1, *l),
            Tree::Node(g, ch) => {
                let mut sign = 1;
                let mut kids: Vec<(Tree, u8)> = Vec::with_capacity(ch.len());
                for c in ch {
                    let (ct, cs, cm) = self.canon_rec(c);
                    sign *= cs;
                    kids.push((ct, cm));
                }
                let mut order: Vec<u8> = (0..kids.len() as u8).collect();
                order.sort_by_key(|&i| kids[i as usize].1);
                let gen = &self.gens[*g as usize];
                let fam = &self.families[gen.family];
                let new_gen = match fam.symmetry {
                    Symmetry::Plain => {
                        let mut inv = vec![0u8; order.len()];
                        for (j, &s) in order.iter().enumerate() {
                            inv[s as usize] = j as u8;
                        }
                        let tau: Vec<u8> = gen.variant.iter().map(|&r| inv[r as usize]).collect();
                        fam.variants[fam.perm_index[&tau]]
                    }
                    Symmetry::Symmetric => *g,
                    Symmetry::Antisymmetric => {
                        sign *= perm_sign(&order);
                        *g
                    }
                };
                let mut slots: Vec<Option<Tree>> = kids.into_iter().map(|(t, _)| Some(t)).collect();
                let children: Vec<Tree> = order
                    .iter()
                    .map(|&i| slots[i as usize].take().unwrap_or(Tree::Leaf(0)))
                    .collect();
                let min = children.first().map(Tree::min_leaf).unwrap_or(u8::MAX);
                (Tree::Node(new_gen, children), sign, min)
            }
        }
    }

    /// Composition `outer ∘_i inner`, where `inner_labels` lists the labels
    /// (in 1..n) received by the leaves of `inner`; the remaining labels go to
    /// the other leaves of `outer` in increasing order.
    pub fn graft(&self, outer: &Tree, i: usize, inner: &Tree, inner_labels: &[u8]) -> Result<Tree> {
        let a = outer.arity();
        let b = inner.arity();
        if i == 0 || i > a {
            return Err(Error::InvalidShuffle(format!("leaf index {i} outside 1..{a}")));
        }
        if inner_labels.len() != b {
            return Err(Error::InvalidShuffle(format!(
                "{} labels given for an inner tree of arity {b}",
                inner_labels.len()
            )));
        }
        let n = a + b - 1;
        let mut sorted = inner_labels.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1])
            || sorted.iter().any(|&l| l == 0 || l as usize > n)
        {
            return Err(Error::InvalidShuffle(format!(
                "inner labels must be distinct elements of 1..{n}"
            )));
        }
        let rest: Vec<u8> = (1..=n as u8).filter(|l| !sorted.contains(l)).collect();
        let below = rest.iter().filter(|&&l| l < sorted[0]).count();
        if below != i - 1 {
            return Err(Error::InvalidShuffle(format!(
                "the minimum of the inner block must exceed exactly {} outer labels",
                i - 1
            )));
        }
        let inner_rel = inner.relabel(&|l| inner_labels[l as usize - 1]);
        let result = graft_raw(outer, i as u8, &inner_rel, &rest);
        self.validate(&result)?;
        Ok(result)
    }
}

fn is_locally_increasing(ch: &[Tree]) -> bool {
    ch.windows(2).all(|w| w[0].min_leaf() < w[1].min_leaf())
}

fn graft_raw(outer: &Tree, i: u8, inner: &Tree, rest: &[u8]) -> Tree {
    match outer {
        Tree::Leaf(l) if *l == i => inner.clone(),
        Tree::Leaf(l) if *l < i => Tree::Leaf(rest[*l as usize - 1]),
        Tree::Leaf(l) => Tree::Leaf(rest[*l as usize - 2]),
        Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| graft_raw(c, i, inner, rest)).collect()),
    }
}

/// An occurrence of a pattern inside a host, identified by the preorder
/// index of the host vertex carrying the pattern's root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Occurrence {
    pub root: usize,
    /// Host vertex (preorder index) of each pattern vertex (preorder).
    pub vertex_map: Vec<usize>,
}

impl Occurrence {
    pub fn image(&self) -> Vec<usize> {
        let mut v = self.vertex_map.clone();
        v.sort_unstable();
        v
    }
}

fn match_here<'a>(
    host: &'a Tree,
    hidx: usize,
    pattern: &Tree,
    map: &mut Vec<usize>,
    hang: &mut Vec<(u8, &'a Tree)>,
) -> bool {
    match pattern {
        Tree::Leaf(l) => {
            hang.push((*l, host));
            true
        }
        Tree::Node(pg, pch) => match host {
            Tree::Node(hg, hch) if hg == pg && hch.len() == pch.len() => {
                map.push(hidx);
                let mut cidx = hidx + 1;
                for (pc, hc) in pch.iter().zip(hch) {
                    if !match_here(hc, cidx, pc, map, hang) {
                        return false;
                    }
                    cidx += hc.degree();
                }
                true
            }
            _ => false,
        },
    }
}

/// Matches `pattern` at host subtree `sub` (whose preorder index is `idx`).
/// On success returns the vertex map and the host subtrees hanging from the
/// pattern's leaves, indexed by pattern leaf label.
fn match_at<'a>(sub: &'a Tree, idx: usize, pattern: &Tree) -> Option<(Vec<usize>, Vec<&'a Tree>)> {
    let mut map = Vec::new();
    let mut hang = Vec::new();
    if !match_here(sub, idx, pattern, &mut map, &mut hang) {
        return None;
    }
    hang.sort_by_key(|(l, _)| *l);
    let mut prev = 0u8;
    for (_, t) in &hang {
        let m = t.min_leaf();
        if m <= prev {
            return None;
        }
        prev = m;
    }
    Some((map, hang.into_iter().map(|(_, t)| t).collect()))
}

fn subtree_at(t: &Tree, idx: usize) -> Option<&Tree> {
    t.vertices().get(idx).copied()
}

/// Whether `pattern` occurs with its root at host vertex `idx`.
pub fn divides_at(host: &Tree, idx: usize, pattern: &Tree) -> bool {
    match subtree_at(host, idx) {
        Some(sub) => match_at(sub, idx, pattern).is_some(),
        None => false,
    }
}

/// Whether `pattern` occurs with its root at the host root.
pub fn divides_at_root(host: &Tree, pattern: &Tree) -> bool {
    !host.is_leaf() && match_at(host, 0, pattern).is_some()
}

/// All occurrences of `pattern` in `host`, ordered by root vertex.
pub fn divisors(host: &Tree, pattern: &Tree) -> Result<Vec<Occurrence>> {
    if pattern.is_leaf() {
        return Err(Error::UnitPattern);
    }
    let mut out = Vec::new();
    for (idx, sub) in host.vertices().into_iter().enumerate() {
        if let Some((map, _)) = match_at(sub, idx, pattern) {
            out.push(Occurrence { root: idx, vertex_map: map });
        }
    }
    Ok(out)
}

/// First occurrence of `pattern` in `host`, if any.
pub fn first_divisor(host: &Tree, pattern: &Tree) -> Option<usize> {
    host.vertices()
        .into_iter()
        .enumerate()
        .find(|(idx, sub)| match_at(sub, *idx, pattern).is_some())
        .map(|(idx, _)| idx)
}

pub fn is_divisible(host: &Tree, pattern: &Tree) -> bool {
    first_divisor(host, pattern).is_some()
}

fn replace_rec(t: &Tree, counter: &mut usize, root: usize, pattern: &Tree, substitute: &Tree) -> Option<Tree> {
    match t {
        Tree::Leaf(l) => Some(Tree::Leaf(*l)),
        Tree::Node(g, ch) => {
            let idx = *counter;
            if idx == root {
                let (_, hang) = match_at(t, idx, pattern)?;
                *counter += t.degree();
                return Some(plug(substitute, &hang));
            }
            *counter += 1;
            let mut kids = Vec::with_capacity(ch.len());
            for c in ch {
                kids.push(replace_rec(c, counter, root, pattern, substitute)?);
            }
            Some(Tree::Node(*g, kids))
        }
    }
}

fn plug(t: &Tree, hang: &[&Tree]) -> Tree {
    match t {
        Tree::Leaf(l) => hang[*l as usize - 1].clone(),
        Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| plug(c, hang)).collect()),
    }
}

/// Replaces the occurrence of `pattern` rooted at host vertex `root` by
/// `substitute`. Returns `None` if the pattern does not occur there.
pub(crate) fn replace_at(host: &Tree, root: usize, pattern: &Tree, substitute: &Tree) -> Option<Tree> {
    let mut counter = 0;
    replace_rec(host, &mut counter, root, pattern, substitute)
}

/// Replaces an occurrence of `pattern` in `host` by `substitute` and
/// re-canonicalizes. The sign is always +1 for shuffle monomials but is
/// reported for uniformity with [`Signature::canonical`].
pub fn replace(
    sig: &Signature,
    host: &Tree,
    occ: &Occurrence,
    pattern: &Tree,
    substitute: &Tree,
) -> Result<(Tree, i32)> {
    if substitute.arity() != pattern.arity() {
        return Err(Error::ArityMismatch {
            expected: pattern.arity(),
            got: substitute.arity(),
        });
    }
    let raw = replace_at(host, occ.root, pattern, substitute).ok_or(Error::PatternMismatch)?;
    sig.canonical_keep_labels(&raw)
}

/// A small common multiple of two patterns.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct OverlapSite {
    pub ambient: Tree,
    pub occ1: Occurrence,
    pub occ2: Occurrence,
}

#[derive(Clone, Debug)]
enum Shape {
    Hole,
    Node(GenId, Vec<Shape>),
}

fn merge(a: &Tree, b: &Tree) -> Option<Shape> {
    match (a, b) {
        (Tree::Leaf(_), Tree::Leaf(_)) => Some(Shape::Hole),
        (Tree::Leaf(_), t) | (t, Tree::Leaf(_)) => Some(shape_of(t)),
        (Tree::Node(g, ch), Tree::Node(h, dh)) => {
            if g != h || ch.len() != dh.len() {
                return None;
            }
            let kids = ch.iter().zip(dh).map(|(x, y)| merge(x, y)).collect::<Option<Vec<_>>>()?;
            Some(Shape::Node(*g, kids))
        }
    }
}

fn shape_of(t: &Tree) -> Shape {
    match t {
        Tree::Leaf(_) => Shape::Hole,
        Tree::Node(g, ch) => Shape::Node(*g, ch.iter().map(shape_of).collect()),
    }
}

/// Copies `a`, merging `b` in at the vertex with preorder index `u`.
fn place(a: &Tree, counter: &mut usize, u: usize, b: &Tree) -> Option<Shape> {
    match a {
        Tree::Leaf(_) => Some(Shape::Hole),
        Tree::Node(g, ch) => {
            if *counter == u {
                *counter += a.degree();
                return merge(a, b);
            }
            *counter += 1;
            let kids = ch.iter().map(|c| place(c, counter, u, b)).collect::<Option<Vec<_>>>()?;
            Some(Shape::Node(*g, kids))
        }
    }
}

fn count_holes(s: &Shape) -> usize {
    match s {
        Shape::Hole => 1,
        Shape::Node(_, ch) => ch.iter().map(count_holes).sum(),
    }
}

fn fill(s: &Shape, labels: &[u8], next: &mut usize) -> Tree {
    match s {
        Shape::Hole => {
            let l = labels[*next];
            *next += 1;
            Tree::Leaf(l)
        }
        Shape::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| fill(c, labels, next)).collect()),
    }
}

/// Labelings of the holes of `shape` that give shuffle trees.
fn shuffle_fillings(shape: &Shape) -> Vec<Tree> {
    let k = count_holes(shape);
    let mut out = Vec::new();
    for p in permutations(k) {
        let labels: Vec<u8> = p.iter().map(|x| x + 1).collect();
        let mut next = 0;
        let t = fill(shape, &labels, &mut next);
        if locally_increasing_everywhere(&t) {
            out.push(t);
        }
    }
    out
}

fn locally_increasing_everywhere(t: &Tree) -> bool {
    match t {
        Tree::Leaf(_) => true,
        Tree::Node(_, ch) => is_locally_increasing(ch) && ch.iter().all(locally_increasing_everywhere),
    }
}

/// All overlap sites of `m1` and `m2` with ambient arity at most `max_arity`.
///
/// The ambient is covered by the two occurrences, they share at least one
/// vertex, and for a self-overlap the occurrences are distinct and each
/// unordered pair is reported once.
pub fn overlaps(m1: &Tree, m2: &Tree, max_arity: usize) -> Vec<OverlapSite> {
    if m1.is_leaf() || m2.is_leaf() {
        return Vec::new();
    }
    let same = m1 == m2;
    let mut found = BTreeSet::new();
    for (first, second, swapped) in [(m1, m2, false), (m2, m1, true)] {
        if same && swapped {
            continue;
        }
        for u in 0..first.degree() {
            let mut counter = 0;
            let Some(shape) = place(first, &mut counter, u, second) else {
                continue;
            };
            if count_holes(&shape) > max_arity {
                continue;
            }
            for ambient in shuffle_fillings(&shape) {
                let Some((map_first, _)) = match_at(&ambient, 0, first) else {
                    continue;
                };
                let Some(sub) = subtree_at(&ambient, u) else {
                    continue;
                };
                let Some((map_second, _)) = match_at(sub, u, second) else {
                    continue;
                };
                let occ_first = Occurrence { root: 0, vertex_map: map_first };
                let occ_second = Occurrence { root: u, vertex_map: map_second };
                let (occ1, occ2) = if swapped {
                    (occ_second, occ_first)
                } else {
                    (occ_first, occ_second)
                };
                if same {
                    if occ1.root == occ2.root {
                        continue;
                    }
                    let (a, b) = if occ1 <= occ2 { (occ1, occ2) } else { (occ2, occ1) };
                    found.insert(OverlapSite { ambient: ambient.clone(), occ1: a, occ2: b });
                } else {
                    found.insert(OverlapSite { ambient: ambient.clone(), occ1, occ2 });
                }
            }
        }
    }
    found.into_iter().collect()
}

/// Every internal vertex lies on the path from the root to the minimal leaf.
pub fn is_left_comb(m: &Tree) -> bool {
    match m {
        Tree::Leaf(_) => true,
        Tree::Node(_, ch) => {
            let min = m.min_leaf();
            let mut spine = None;
            for c in ch {
                if c.min_leaf() == min {
                    spine = Some(c);
                } else if !c.is_leaf() {
                    return false;
                }
            }
            spine.map(is_left_comb).unwrap_or(false)
        }
    }
}

/// The minimal leaf is a child of the root.
pub fn min_leaf_at_root(m: &Tree) -> bool {
    match m {
        Tree::Leaf(_) => false,
        Tree::Node(_, ch) => {
            let min = m.min_leaf();
            ch.iter().any(|c| *c == Tree::Leaf(min))
        }
    }
}

fn parent_of_leaf(t: &Tree, label: u8) -> Option<&Tree> {
    match t {
        Tree::Leaf(_) => None,
        Tree::Node(_, ch) => {
            if ch.iter().any(|c| *c == Tree::Leaf(label)) {
                Some(t)
            } else {
                ch.iter().find_map(|c| parent_of_leaf(c, label))
            }
        }
    }
}

/// The second smallest leaf is a sibling of the minimal leaf.
pub fn second_min_sibling_of_min(m: &Tree) -> bool {
    let mut labels = m.leaves();
    labels.sort_unstable();
    if labels.len() < 2 {
        return false;
    }
    match (parent_of_leaf(m, labels[0]), parent_of_leaf(m, labels[1])) {
        (Some(a), Some(b)) => std::ptr::eq(a, b),
        _ => false,
    }
}

/// Root-first generator words of the paths to each leaf (in label order) and
/// the planar leaf word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSequence {
    pub words: Vec<Vec<GenId>>,
    pub permutation: Vec<u8>,
}

pub fn path_sequence(m: &Tree) -> PathSequence {
    fn walk(t: &Tree, prefix: &mut Vec<GenId>, out: &mut Vec<(u8, Vec<GenId>)>) {
        match t {
            Tree::Leaf(l) => out.push((*l, prefix.clone())),
            Tree::Node(g, ch) => {
                prefix.push(*g);
                for c in ch {
                    walk(c, prefix, out);
                }
                prefix.pop();
            }
        }
    }
    let mut pairs = Vec::new();
    walk(m, &mut Vec::new(), &mut pairs);
    let permutation = pairs.iter().map(|(l, _)| *l).collect();
    pairs.sort_by_key(|(l, _)| *l);
    PathSequence {
        words: pairs.into_iter().map(|(_, w)| w).collect(),
        permutation,
    }
}

/// Ordered set partitions of 1..n into `k` blocks with increasing minima.
fn increasing_partitions(n: usize, k: usize) -> Vec<Vec<Vec<u8>>> {
    fn rec(next: usize, n: usize, k: usize, blocks: &mut Vec<Vec<u8>>, out: &mut Vec<Vec<Vec<u8>>>) {
        if next > n {
            if blocks.len() == k {
                out.push(blocks.clone());
            }
            return;
        }
        if blocks.len() + (n - next + 1) < k {
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

/// Enumerates shuffle monomials of arity 1..=n, keeping only trees accepted
/// by `accept`. `accept` must be hereditary: if a tree is accepted, so is
/// every (standardized) subtree.
pub struct MonomialEnumerator<'a> {
    sig: &'a Signature,
    accept: Box<dyn Fn(&Tree) -> bool + Sync + 'a>,
    by_arity: Vec<Vec<Tree>>,
}

impl<'a> MonomialEnumerator<'a> {
    pub fn new(sig: &'a Signature, accept: impl Fn(&Tree) -> bool + Sync + 'a) -> Self {
        MonomialEnumerator {
            sig,
            accept: Box::new(accept),
            by_arity: vec![Vec::new(), vec![Tree::Leaf(1)]],
        }
    }

    pub fn all(sig: &'a Signature) -> Self {
        Self::new(sig, |_| true)
    }

    /// Accepted monomials of arity `n`, in canonical order.
    pub fn arity(&mut self, n: usize) -> &[Tree] {
        while self.by_arity.len() <= n {
            let m = self.by_arity.len();
            let level = self.build(m);
            self.by_arity.push(level);
        }
        &self.by_arity[n]
    }

    fn build(&self, m: usize) -> Vec<Tree> {
        let mut out = Vec::new();
        for g in 0..self.sig.len() as GenId {
            let k = self.sig.arity(g);
            if k > m {
                continue;
            }
            for blocks in increasing_partitions(m, k) {
                let choices: Vec<&Vec<Tree>> = blocks.iter().map(|b| &self.by_arity[b.len()]).collect();
                if choices.iter().any(|c| c.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; k];
                loop {
                    let children: Vec<Tree> = blocks
                        .iter()
                        .zip(&idx)
                        .enumerate()
                        .map(|(j, (b, &i))| choices[j][i].relabel(&|l| b[l as usize - 1]))
                        .collect();
                    let t = Tree::Node(g, children);
                    if (self.accept)(&t) {
                        out.push(t);
                    }
                    let mut j = 0;
                    while j < k {
                        idx[j] += 1;
                        if idx[j] < choices[j].len() {
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
        out.sort();
        out
    }
}

/// All shuffle monomials of arity `n`.
pub fn monomials(sig: &Signature, n: usize) -> Vec<Tree> {
    MonomialEnumerator::all(sig).arity(n).to_vec()
}

/// Text form, e.g. `b(b(1,2),3)`.
pub fn format_tree(sig: &Signature, t: &Tree) -> String {
    let mut s = String::new();
    write_tree(sig, t, &mut s);
    s
}

fn write_tree(sig: &Signature, t: &Tree, s: &mut String) {
    match t {
        Tree::Leaf(l) => {
            let _ = write!(s, "{l}");
        }
        Tree::Node(g, ch) => {
            s.push_str(sig.name(*g));
            s.push('(');
            for (i, c) in ch.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write_tree(sig, c, s);
            }
            s.push(')');
        }
    }
}

/// Parses the text form of a tree. The result is not canonicalized.
pub fn parse_tree(sig: &Signature, text: &str) -> Result<Tree> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let t = parse_tree_at(sig, &chars, &mut pos, 0)?;
    skip_ws(&chars, &mut pos);
    if pos != chars.len() {
        return Err(Error::Syntax {
            line: 1,
            col: pos + 1,
            msg: "trailing input after tree".into(),
        });
    }
    Ok(t)
}

/// Parses a tree and checks that it is a shuffle tree monomial.
pub fn parse_monomial(sig: &Signature, text: &str) -> Result<Tree> {
    let t = parse_tree(sig, text)?;
    sig.validate(&t)?;
    Ok(t)
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_tree_at(sig: &Signature, chars: &[char], pos: &mut usize, depth: usize) -> Result<Tree> {
    let err = |pos: usize, msg: &str| Error::Syntax {
        line: 1,
        col: pos + 1,
        msg: msg.to_string(),
    };
    if depth > 256 {
        return Err(err(*pos, "tree nested too deeply"));
    }
    skip_ws(chars, pos);
    let start = *pos;
    if *pos < chars.len() && chars[*pos].is_ascii_digit() {
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        let digits: String = chars[start..*pos].iter().collect();
        return match digits.parse::<u8>() {
            Ok(l) if l > 0 => Ok(Tree::Leaf(l)),
            _ => Err(err(start, "leaf labels must be integers in 1..255")),
        };
    }
    while *pos < chars.len() && !matches!(chars[*pos], '(' | ')' | ',') && !chars[*pos].is_whitespace() {
        *pos += 1;
    }
    let name: String = chars[start..*pos].iter().collect();
    if name.is_empty() {
        return Err(err(start, "expected a leaf label or a generator name"));
    }
    let g = sig.find(&name).ok_or_else(|| Error::UnknownGenerator(name.clone()))?;
    skip_ws(chars, pos);
    if *pos >= chars.len() || chars[*pos] != '(' {
        return Err(err(*pos, "expected `(` after generator name"));
    }
    *pos += 1;
    let mut children = Vec::new();
    loop {
        children.push(parse_tree_at(sig, chars, pos, depth + 1)?);
        skip_ws(chars, pos);
        match chars.get(*pos) {
            Some(',') => *pos += 1,
            Some(')') => {
                *pos += 1;
                break;
            }
            _ => return Err(err(*pos, "expected `,` or `)`")),
        }
    }
    if children.len() != sig.arity(g) {
        return Err(Error::ArityMismatch {
            expected: sig.arity(g),
            got: children.len(),
        });
    }
    Ok(Tree::Node(g, children))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::GeneratorSpec;

    fn antisym() -> Signature {
        Signature::new(&[GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)])
    }

    fn plain() -> Signature {
        Signature::new(&[GeneratorSpec::new("f", 2, Symmetry::Plain)])
    }

    fn t(sig: &Signature, s: &str) -> Tree {
        parse_tree(sig, s).unwrap()
    }

    #[test]
    fn antisymmetric_swap_gives_sign() {
        let sig = antisym();
        let (m, s) = sig.canonical(&t(&sig, "b(2,1)")).unwrap();
        assert_eq!(format_tree(&sig, &m), "b(1,2)");
        assert_eq!(s, -1);
    }

    #[test]
    fn plain_swap_toggles_variant() {
        let sig = plain();
        let (m, s) = sig.canonical(&t(&sig, "f(2,1)")).unwrap();
        assert_eq!(format_tree(&sig, &m), "f~21(1,2)");
        assert_eq!(s, 1);
        let (m2, _) = sig.canonical(&t(&sig, "f~21(2,1)")).unwrap();
        assert_eq!(format_tree(&sig, &m2), "f(1,2)");
    }

    #[test]
    fn nested_antisymmetric_canonical() {
        let sig = antisym();
        let (m, s) = sig.canonical(&t(&sig, "b(b(3,1),2)")).unwrap();
        assert_eq!(format_tree(&sig, &m), "b(b(1,3),2)");
        assert_eq!(s, -1);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let sig = antisym();
        assert_eq!(
            sig.canonical(&t(&sig, "b(1,1)")),
            Err(Error::DuplicateLeafLabel(1))
        );
    }

    #[test]
    fn canonical_is_idempotent() {
        let sig = plain();
        for m in monomials(&sig, 4) {
            assert_eq!(sig.canonical(&m).unwrap(), (m.clone(), 1));
        }
    }

    #[test]
    fn grafting_unit_is_identity() {
        let sig = plain();
        let m = t(&sig, "f(f~21(1,3),2)");
        let unit = Tree::Leaf(1);
        for i in 1..=3u8 {
            assert_eq!(sig.graft(&m, i as usize, &unit, &[i]).unwrap(), m);
            assert_eq!(sig.graft(&unit, 1, &m, &[1, 2, 3]).unwrap(), m);
        }
    }

    #[test]
    fn graft_rejects_bad_shuffle() {
        let sig = plain();
        let m = t(&sig, "f(1,2)");
        assert!(matches!(
            sig.graft(&m, 2, &m, &[1, 2]),
            Err(Error::InvalidShuffle(_))
        ));
    }

    #[test]
    fn self_graftings_at_first_leaf_give_deep_min_leaf() {
        let sig = plain();
        let mut got = BTreeSet::new();
        for a in sig.generators().iter().enumerate().map(|(i, _)| i as GenId) {
            for b in 0..sig.len() as GenId {
                let outer = Tree::Node(a, vec![Tree::Leaf(1), Tree::Leaf(2)]);
                let inner = Tree::Node(b, vec![Tree::Leaf(1), Tree::Leaf(2)]);
                for labels in [[1u8, 2], [1, 3]] {
                    got.insert(sig.graft(&outer, 1, &inner, &labels).unwrap());
                }
            }
        }
        let expected: BTreeSet<Tree> = monomials(&sig, 3)
            .into_iter()
            .filter(|m| !min_leaf_at_root(m))
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn self_divisor_is_unique() {
        let sig = plain();
        for m in monomials(&sig, 4) {
            let d = divisors(&m, &m).unwrap();
            assert_eq!(d.len(), 1);
            assert_eq!(d[0].root, 0);
        }
    }

    #[test]
    fn comb_of_degree_two_occurs_twice_in_degree_three() {
        let sig = Signature::new(&[GeneratorSpec::new("o", 2, Symmetry::Symmetric)]);
        let host = t(&sig, "o(o(o(1,2),3),4)");
        let pat = t(&sig, "o(o(1,2),3)");
        assert_eq!(divisors(&host, &pat).unwrap().len(), 2);
    }

    #[test]
    fn unit_pattern_rejected() {
        let sig = plain();
        assert_eq!(divisors(&t(&sig, "f(1,2)"), &Tree::Leaf(1)), Err(Error::UnitPattern));
    }

    #[test]
    fn replace_by_pattern_is_identity() {
        let sig = plain();
        let pat = t(&sig, "f(1,2)");
        for host in monomials(&sig, 4) {
            for occ in divisors(&host, &pat).unwrap() {
                assert_eq!(replace(&sig, &host, &occ, &pat, &pat).unwrap(), (host.clone(), 1));
            }
        }
    }

    #[test]
    fn replace_checks_arity() {
        let sig = plain();
        let host = t(&sig, "f(f(1,2),3)");
        let pat = t(&sig, "f(1,2)");
        let occ = divisors(&host, &pat).unwrap()[0].clone();
        assert!(matches!(
            replace(&sig, &host, &occ, &pat, &host),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn binary_patterns_have_only_disjoint_common_multiples() {
        let sig = plain();
        for a in 0..2 {
            for b in 0..2 {
                let m1 = Tree::Node(a, vec![Tree::Leaf(1), Tree::Leaf(2)]);
                let m2 = Tree::Node(b, vec![Tree::Leaf(1), Tree::Leaf(2)]);
                assert!(overlaps(&m1, &m2, 3).is_empty());
                for m in monomials(&sig, 3) {
                    for o1 in divisors(&m, &m1).unwrap() {
                        for o2 in divisors(&m, &m2).unwrap() {
                            let shared = o1.image().iter().any(|v| o2.image().contains(v));
                            assert!(!shared || (a == b && o1 == o2));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn predicates_on_small_trees() {
        let sig = antisym();
        let rc = t(&sig, "b(1,b(2,3))");
        assert!(min_leaf_at_root(&rc));
        assert!(!is_left_comb(&rc));
        let lc = t(&sig, "b(b(1,2),3)");
        assert!(is_left_comb(&lc));
        assert!(second_min_sibling_of_min(&lc));
        assert!(!min_leaf_at_root(&lc));
        let lc2 = t(&sig, "b(b(1,3),2)");
        assert!(is_left_comb(&lc2));
        assert!(!second_min_sibling_of_min(&lc2));
        let fork = t(&sig, "b(b(1,2),b(3,4))");
        assert!(!is_left_comb(&fork));
    }

    #[test]
    fn path_sequence_of_combs() {
        let sig = plain();
        let p = path_sequence(&t(&sig, "f(1,2)"));
        assert_eq!(p.words, vec![vec![0], vec![0]]);
        assert_eq!(p.permutation, vec![1, 2]);
        let p = path_sequence(&t(&sig, "f(f(1,2),3)"));
        assert_eq!(p.words, vec![vec![0, 0], vec![0, 0], vec![0]]);
        let p = path_sequence(&t(&sig, "f~21(1,f(2,3))"));
        assert_eq!(p.words, vec![vec![1], vec![1, 0], vec![1, 0]]);
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(&plain(), 3).len(), 12);
        assert_eq!(monomials(&plain(), 4).len(), 120);
        assert_eq!(monomials(&antisym(), 3).len(), 3);
        assert_eq!(monomials(&antisym(), 4).len(), 15);
        let ternary = Signature::new(&[GeneratorSpec::new("t", 3, Symmetry::Plain)]);
        assert_eq!(ternary.len(), 6);
        assert_eq!(monomials(&ternary, 3).len(), 6);
    }

    #[test]
    fn text_round_trip() {
        let sig = plain();
        for m in monomials(&sig, 4) {
            assert_eq!(parse_monomial(&sig, &format_tree(&sig, &m)).unwrap(), m);
        }
    }
}
