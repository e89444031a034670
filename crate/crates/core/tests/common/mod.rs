#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use nsgb::dsl::{parse_document, parse_sample, Document};
use nsgb::groebner::{buchberger, hilbert_series, TruncatedGB};
use nsgb::ordering::parse_ordering;
use nsgb::shuffle_tree::{divisors, monomials, overlaps, Signature, Tree};
use nsgb::symmetrize::present_shuffle;
use nsgb::Presentation;

pub fn presentations_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presentations")
}

pub fn document(name: &str) -> Document {
    let path = presentations_dir().join(format!("{name}.ops"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_document(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn presentation(name: &str) -> Presentation {
    document(name).presentation().unwrap()
}

pub fn instance(name: &str, sample: &str) -> Presentation {
    document(name).instantiate(&parse_sample(sample).unwrap()).unwrap()
}

/// Every bundled file with each of its sample points; non-parametric files
/// appear once.
pub fn bundled_instances() -> Vec<(String, Presentation)> {
    let mut names: Vec<String> = std::fs::read_dir(presentations_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "ops"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut out = Vec::new();
    for name in names {
        let doc = document(&name);
        if doc.is_parametric() {
            for (i, s) in doc.samples.iter().enumerate() {
                out.push((format!("{name}[{i}]"), doc.instantiate(s).unwrap()));
            }
        } else {
            out.push((name.clone(), doc.presentation().unwrap()));
        }
    }
    out
}

pub fn gb(p: &Presentation, order: &str, gens: Option<&str>, n: usize) -> TruncatedGB {
    let sp = present_shuffle(p).unwrap();
    let ord = parse_ordering(order, gens, &sp.signature).unwrap();
    buchberger(&sp, &ord, n)
}

pub fn dims(gb: &TruncatedGB, n: usize) -> Vec<usize> {
    hilbert_series(gb, n).unwrap().into_iter().map(|h| h.dim).collect()
}

pub fn lead_strings(gb: &TruncatedGB) -> BTreeSet<String> {
    gb.leading_terms()
        .iter()
        .map(|t| nsgb::shuffle_tree::format_tree(&gb.signature, t))
        .collect()
}

fn preorder_len(t: &Tree) -> usize {
    t.degree()
}

/// Cuts the subtree rooted at a host vertex along a chosen set of internal
/// vertices to keep, returning the kept vertex indices and the hanging
/// subtrees in planar order.
fn prefix_shapes(t: &Tree, base: usize) -> Vec<(Tree, Vec<usize>, Vec<u8>)> {
    // (shape with placeholder leaves numbered by planar position, kept vertices, min leaves of hangs)
    match t {
        Tree::Leaf(l) => vec![(Tree::Leaf(0), vec![], vec![*l])],
        Tree::Node(g, ch) => {
            let mut partial: Vec<(Vec<Tree>, Vec<usize>, Vec<u8>)> = vec![(vec![], vec![base], vec![])];
            let mut idx = base + 1;
            for c in ch {
                let mut options = vec![(Tree::Leaf(0), vec![], vec![c.min_leaf()])];
                if let Tree::Node(..) = c {
                    options.extend(prefix_shapes(c, idx));
                }
                let mut next = Vec::new();
                for (kids, kept, hangs) in &partial {
                    for (shape, k2, h2) in &options {
                        let mut kids = kids.clone();
                        kids.push(shape.clone());
                        let mut kept = kept.clone();
                        kept.extend(k2);
                        let mut hangs = hangs.clone();
                        hangs.extend(h2);
                        next.push((kids, kept, hangs));
                    }
                }
                partial = next;
                idx += preorder_len(c);
            }
            partial
                .into_iter()
                .map(|(kids, kept, hangs)| (Tree::Node(*g, kids), kept, hangs))
                .collect()
        }
    }
}

fn label_shape(shape: &Tree, labels: &[u8], next: &mut usize) -> Tree {
    match shape {
        Tree::Leaf(_) => {
            let l = labels[*next];
            *next += 1;
            Tree::Leaf(l)
        }
        Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| label_shape(c, labels, next)).collect()),
    }
}

/// Divisor occurrences found by cutting every prefix subtree of the host and
/// comparing its standardized contraction with the pattern. Each occurrence
/// is reported as (root vertex, sorted vertex set).
pub fn brute_divisors(host: &Tree, pattern: &Tree) -> BTreeSet<(usize, Vec<usize>)> {
    let mut out = BTreeSet::new();
    for (idx, sub) in host.vertices().into_iter().enumerate() {
        if sub.is_leaf() {
            continue;
        }
        for (shape, mut kept, hangs) in prefix_shapes(sub, idx) {
            let mut ranks: Vec<u8> = hangs.clone();
            ranks.sort_unstable();
            let labels: Vec<u8> = hangs
                .iter()
                .map(|h| ranks.iter().position(|r| r == h).unwrap() as u8 + 1)
                .collect();
            let mut next = 0;
            let contracted = label_shape(&shape, &labels, &mut next);
            if contracted == *pattern {
                kept.sort_unstable();
                out.insert((idx, kept));
            }
        }
    }
    out
}

pub fn library_divisors(host: &Tree, pattern: &Tree) -> BTreeSet<(usize, Vec<usize>)> {
    divisors(host, pattern)
        .unwrap()
        .into_iter()
        .map(|o| (o.root, o.image()))
        .collect()
}

type SiteKey = (Tree, (usize, Vec<usize>), (usize, Vec<usize>));

/// Overlap sites found by scanning every monomial of the signature up to
/// `max_arity` for pairs of occurrences that share a vertex and together
/// cover the ambient.
pub fn brute_overlaps(sig: &Signature, m1: &Tree, m2: &Tree, max_arity: usize) -> BTreeSet<SiteKey> {
    let mut out = BTreeSet::new();
    let lo = m1.arity().max(m2.arity());
    for n in lo..=max_arity {
        for ambient in monomials(sig, n) {
            let d1 = brute_divisors(&ambient, m1);
            let d2 = brute_divisors(&ambient, m2);
            let all: BTreeSet<usize> = (0..ambient.degree()).collect();
            for a in &d1 {
                for b in &d2 {
                    if m1 == m2 && a >= b {
                        continue;
                    }
                    let sa: BTreeSet<usize> = a.1.iter().copied().collect();
                    let sb: BTreeSet<usize> = b.1.iter().copied().collect();
                    if sa.is_disjoint(&sb) {
                        continue;
                    }
                    if sa.union(&sb).copied().collect::<BTreeSet<_>>() != all {
                        continue;
                    }
                    out.insert((ambient.clone(), a.clone(), b.clone()));
                }
            }
        }
    }
    out
}

pub fn library_overlaps(m1: &Tree, m2: &Tree, max_arity: usize) -> BTreeSet<SiteKey> {
    overlaps(m1, m2, max_arity)
        .into_iter()
        .map(|s| {
            (
                s.ambient,
                (s.occ1.root, s.occ1.image()),
                (s.occ2.root, s.occ2.image()),
            )
        })
        .collect()
}
