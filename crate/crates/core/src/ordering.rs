//! Admissible orderings of tree monomials as chains of comparison keys.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::shuffle_tree::{format_tree, monomials, path_sequence, GenId, Signature, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordOrder {
    /// Longer words are larger; equal lengths compare letter by letter.
    DegLex,
    /// Shorter words are larger; equal lengths compare letter by letter.
    RevDegLex,
    /// Letter by letter, a proper prefix being smaller.
    Lex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "key", rename_all = "kebab-case")]
pub enum OrderKey {
    Degree { reversed: bool },
    PathWords { word: WordOrder, reversed: bool },
    LeafPermutation { reversed: bool },
}

impl OrderKey {
    fn describe(&self) -> String {
        match self {
            OrderKey::Degree { reversed } => format!("degree{}", if *reversed { ":rev" } else { "" }),
            OrderKey::PathWords { word, reversed } => {
                let w = match word {
                    WordOrder::DegLex => "deglex",
                    WordOrder::RevDegLex => "revdeglex",
                    WordOrder::Lex => "lex",
                };
                format!("paths:{w}{}", if *reversed { ":rev" } else { "" })
            }
            OrderKey::LeafPermutation { reversed } => format!("perm{}", if *reversed { ":rev" } else { "" }),
        }
    }
}

pub const PRESETS: [&str; 3] = ["gpl", "rgpl", "permfirst-rev-gpl"];

fn preset_keys(name: &str) -> Result<Vec<OrderKey>> {
    let paths = |word| OrderKey::PathWords { word, reversed: false };
    let degree = OrderKey::Degree { reversed: false };
    let perm_rev = OrderKey::LeafPermutation { reversed: true };
    match name {
        "gpl" => Ok(vec![degree, paths(WordOrder::DegLex), perm_rev]),
        "rgpl" => Ok(vec![degree, paths(WordOrder::RevDegLex), perm_rev]),
        "permfirst-rev-gpl" => Ok(vec![degree, perm_rev, paths(WordOrder::DegLex)]),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// A total order on same-arity monomials: compare the key chain, then fall
/// back to the canonical tree order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingSpec {
    pub name: String,
    pub keys: Vec<OrderKey>,
    /// Generator variants from largest to smallest.
    pub generator_order: Vec<GenId>,
    ranks: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderingSummary {
    pub name: String,
    pub keys: Vec<String>,
    pub generator_order: Vec<String>,
    pub tie_break: String,
}

impl OrderingSpec {
    pub fn new(name: &str, keys: Vec<OrderKey>, generator_order: Vec<GenId>, sig: &Signature) -> Result<Self> {
        let mut sorted = generator_order.clone();
        sorted.sort_unstable();
        if sorted != (0..sig.len() as GenId).collect::<Vec<_>>() {
            return Err(Error::BadOrdering(
                "generator order must list every generator variant exactly once".into(),
            ));
        }
        let mut ranks = vec![0; sig.len()];
        for (pos, g) in generator_order.iter().enumerate() {
            ranks[*g as usize] = (generator_order.len() - pos) as i32;
        }
        Ok(OrderingSpec {
            name: name.to_string(),
            keys,
            generator_order,
            ranks,
        })
    }

    /// One of the named presets over the given generator order.
    pub fn preset(name: &str, generator_order: Vec<GenId>, sig: &Signature) -> Result<Self> {
        Self::new(name, preset_keys(name)?, generator_order, sig)
    }

    /// Preset with generators ranked in declaration order.
    pub fn preset_default(name: &str, sig: &Signature) -> Result<Self> {
        Self::preset(name, (0..sig.len() as GenId).collect(), sig)
    }

    /// Flattened comparison key; larger keys are larger monomials.
    pub fn sort_key(&self, t: &Tree) -> Vec<i32> {
        let mut key = Vec::new();
        let mut ps = None;
        for k in &self.keys {
            match k {
                OrderKey::Degree { reversed } => {
                    let d = t.degree() as i32;
                    key.push(if *reversed { -d } else { d });
                }
                OrderKey::PathWords { word, reversed } => {
                    let ps = ps.get_or_insert_with(|| path_sequence(t));
                    let s = if *reversed { -1 } else { 1 };
                    for w in &ps.words {
                        match word {
                            WordOrder::DegLex => key.push(s * w.len() as i32),
                            WordOrder::RevDegLex => key.push(-s * w.len() as i32),
                            WordOrder::Lex => {}
                        }
                        key.extend(w.iter().map(|g| s * self.ranks[*g as usize]));
                        if *word == WordOrder::Lex {
                            key.push(0);
                        }
                    }
                }
                OrderKey::LeafPermutation { reversed } => {
                    let ps = ps.get_or_insert_with(|| path_sequence(t));
                    let s = if *reversed { -1 } else { 1 };
                    key.extend(ps.permutation.iter().map(|l| s * *l as i32));
                }
            }
        }
        key
    }

    /// Compares monomials of equal arity (not checked).
    pub fn cmp_monomials(&self, a: &Tree, b: &Tree) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        self.sort_key(a).cmp(&self.sort_key(b)).then_with(|| a.cmp(b))
    }

    pub fn compare(&self, a: &Tree, b: &Tree) -> Result<Ordering> {
        let (na, nb) = (a.arity(), b.arity());
        if na != nb {
            return Err(Error::ArityMismatch { expected: na, got: nb });
        }
        Ok(self.cmp_monomials(a, b))
    }

    pub fn summary(&self, sig: &Signature) -> OrderingSummary {
        OrderingSummary {
            name: self.name.clone(),
            keys: self.keys.iter().map(OrderKey::describe).collect(),
            generator_order: self.generator_order.iter().map(|g| sig.name(*g).to_string()).collect(),
            tie_break: "canonical tree order".into(),
        }
    }

    pub fn describe(&self, sig: &Signature) -> String {
        let s = self.summary(sig);
        format!("{} [{}] gens {}", s.name, s.keys.join(","), s.generator_order.join(">"))
    }
}

/// Parses a comma-separated key chain such as `degree,paths:revdeglex,perm:rev`.
pub fn parse_keys(text: &str) -> Result<Vec<OrderKey>> {
    let mut keys = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let rev = |flag: Option<&&str>| -> Result<bool> {
            match flag {
                None => Ok(false),
                Some(&"rev") => Ok(true),
                Some(other) => Err(Error::BadOrdering(format!("unknown flag `{other}`"))),
            }
        };
        let key = match parts[0] {
            "degree" => {
                if parts.len() > 2 {
                    return Err(Error::BadOrdering(format!("too many fields in `{item}`")));
                }
                OrderKey::Degree { reversed: rev(parts.get(1))? }
            }
            "perm" => {
                if parts.len() > 2 {
                    return Err(Error::BadOrdering(format!("too many fields in `{item}`")));
                }
                OrderKey::LeafPermutation { reversed: rev(parts.get(1))? }
            }
            "paths" => {
                if parts.len() > 3 {
                    return Err(Error::BadOrdering(format!("too many fields in `{item}`")));
                }
                let word = match parts.get(1).copied() {
                    None | Some("deglex") => WordOrder::DegLex,
                    Some("revdeglex") => WordOrder::RevDegLex,
                    Some("lex") => WordOrder::Lex,
                    Some(other) => return Err(Error::BadOrdering(format!("unknown word order `{other}`"))),
                };
                OrderKey::PathWords { word, reversed: rev(parts.get(2))? }
            }
            other => return Err(Error::BadOrdering(format!("unknown key `{other}`"))),
        };
        keys.push(key);
    }
    if keys.is_empty() {
        return Err(Error::BadOrdering("empty key chain".into()));
    }
    Ok(keys)
}

/// Parses a generator order such as `b>c`. Every variant must be listed.
pub fn parse_generator_order(text: &str, sig: &Signature) -> Result<Vec<GenId>> {
    let mut order = Vec::new();
    for name in text.split('>').map(str::trim).filter(|s| !s.is_empty()) {
        let g = sig.find(name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        if order.contains(&g) {
            return Err(Error::BadOrdering(format!("generator `{name}` listed twice")));
        }
        order.push(g);
    }
    if order.len() != sig.len() {
        let missing: Vec<&str> = (0..sig.len() as GenId)
            .filter(|g| !order.contains(g))
            .map(|g| sig.name(g))
            .collect();
        return Err(Error::BadOrdering(format!(
            "generator order must list every variant; missing {}",
            missing.join(", ")
        )));
    }
    Ok(order)
}

/// Builds an ordering from a preset name or `custom:<keys>` and an optional
/// generator order.
pub fn parse_ordering(order: &str, gens: Option<&str>, sig: &Signature) -> Result<OrderingSpec> {
    let generator_order = match gens {
        Some(g) => parse_generator_order(g, sig)?,
        None => (0..sig.len() as GenId).collect(),
    };
    match order.strip_prefix("custom:") {
        Some(keys) => OrderingSpec::new("custom", parse_keys(keys)?, generator_order, sig),
        None => OrderingSpec::preset(order.trim(), generator_order, sig),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    pub passed: bool,
    pub samples: usize,
    /// `(smaller, larger, context, images)` for the first failure.
    pub counterexample: Option<[String; 4]>,
}

/// Random check that grafting preserves the order: for `m1 < m2` of equal
/// arity and a random grafting `g` (inside or around), `g(m1) < g(m2)`.
pub fn check_admissible(spec: &OrderingSpec, sig: &Signature, n: usize, samples: usize, seed: u64) -> AdmissibilityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.max(3);
    let pools: Vec<Vec<Tree>> = (0..n).map(|a| if a == 0 { Vec::new() } else { monomials(sig, a) }).collect();
    let mut done = 0;
    let mut attempts = 0;
    while done < samples && attempts < samples * 50 {
        attempts += 1;
        let a = rng.gen_range(2..n);
        if pools[a].len() < 2 {
            continue;
        }
        let b = rng.gen_range(1..=n - a + 1).min(n - 1);
        if pools[b].is_empty() {
            continue;
        }
        let pair: Vec<&Tree> = pools[a].choose_multiple(&mut rng, 2).collect();
        let (mut m1, mut m2) = (pair[0].clone(), pair[1].clone());
        if spec.cmp_monomials(&m1, &m2) == Ordering::Greater {
            std::mem::swap(&mut m1, &mut m2);
        }
        let ctx = pools[b].choose(&mut rng).cloned().unwrap_or(Tree::Leaf(1));
        let total = a + b - 1;
        let inside = rng.gen_bool(0.5);
        let (outer_arity, inner_arity) = if inside { (a, b) } else { (b, a) };
        let i = rng.gen_range(1..=outer_arity);
        let Some(labels) = random_block(&mut rng, total, inner_arity, i) else {
            continue;
        };
        let graft = |m: &Tree| {
            if inside {
                sig.graft(m, i, &ctx, &labels)
            } else {
                sig.graft(&ctx, i, m, &labels)
            }
        };
        let (Ok(g1), Ok(g2)) = (graft(&m1), graft(&m2)) else {
            continue;
        };
        done += 1;
        if spec.cmp_monomials(&g1, &g2) != Ordering::Less {
            return AdmissibilityReport {
                passed: false,
                samples: done,
                counterexample: Some([
                    format_tree(sig, &m1),
                    format_tree(sig, &m2),
                    format_tree(sig, &ctx),
                    format!("{} vs {}", format_tree(sig, &g1), format_tree(sig, &g2)),
                ]),
            };
        }
    }
    AdmissibilityReport {
        passed: true,
        samples: done,
        counterexample: None,
    }
}

/// A random increasing label block of size `k` in 1..n whose minimum
/// exceeds exactly `i - 1` of the remaining labels.
fn random_block(rng: &mut impl Rng, n: usize, k: usize, i: usize) -> Option<Vec<u8>> {
    if i + k - 1 > n {
        return None;
    }
    let mut rest: Vec<u8> = (i as u8 + 1..=n as u8).collect();
    rest.shuffle(rng);
    let mut block = vec![i as u8];
    block.extend(rest.into_iter().take(k - 1));
    block.sort_unstable();
    Some(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{GeneratorSpec, Symmetry};
    use crate::shuffle_tree::parse_tree;

    fn lie() -> Signature {
        Signature::new(&[GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)])
    }

    #[test]
    fn jacobi_leading_terms() {
        let sig = lie();
        let lc123 = parse_tree(&sig, "b(b(1,2),3)").unwrap();
        let lc132 = parse_tree(&sig, "b(b(1,3),2)").unwrap();
        let rc = parse_tree(&sig, "b(1,b(2,3))").unwrap();
        let max = |spec: &OrderingSpec| {
            [lc123.clone(), lc132.clone(), rc.clone()]
                .into_iter()
                .max_by(|a, b| spec.cmp_monomials(a, b))
                .unwrap()
        };
        assert_eq!(max(&OrderingSpec::preset_default("gpl", &sig).unwrap()), lc123);
        assert_eq!(max(&OrderingSpec::preset_default("rgpl", &sig).unwrap()), rc);
    }

    #[test]
    fn compare_is_total_at_arity_three() {
        let sig = lie();
        let spec = OrderingSpec::preset_default("rgpl", &sig).unwrap();
        let ms = monomials(&sig, 3);
        for a in &ms {
            for b in &ms {
                assert_eq!(spec.compare(a, b).unwrap() == Ordering::Equal, a == b);
                assert_eq!(spec.compare(a, b).unwrap(), spec.compare(b, a).unwrap().reverse());
            }
        }
    }

    #[test]
    fn arity_mismatch() {
        let sig = lie();
        let spec = OrderingSpec::preset_default("gpl", &sig).unwrap();
        let a = parse_tree(&sig, "b(1,2)").unwrap();
        let b = parse_tree(&sig, "b(1,b(2,3))").unwrap();
        assert!(matches!(spec.compare(&a, &b), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            OrderingSpec::preset_default("glex", &lie()),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn parse_custom_and_generator_order() {
        let sig = Signature::new(&[GeneratorSpec::new("*", 2, Symmetry::Plain)]);
        let spec = parse_ordering("custom:degree,paths:lex:rev,perm", Some("*~21>*"), &sig).unwrap();
        assert_eq!(spec.generator_order, vec![1, 0]);
        assert_eq!(spec.keys.len(), 3);
        assert!(parse_ordering("gpl", Some("*"), &sig).is_err());
        assert!(parse_ordering("custom:deg", None, &sig).is_err());
    }
}
