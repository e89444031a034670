//! Exact-rational linear combinations of tree monomials, long division and
//! interreduction.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{content, Coeff};
use crate::ordering::OrderingSpec;
use crate::shuffle_tree::{divisors, first_divisor, format_tree, parse_tree, replace_at, Signature, Tree};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Tree, Coeff>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Polynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(t: Tree, c: Coeff) -> Self {
        let mut p = Polynomial::zero(t.arity());
        p.add_term(t, c);
        p
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Tree, Coeff)>) -> Result<Self> {
        let mut p = Polynomial::zero(arity);
        for (t, c) in terms {
            if t.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: t.arity(),
                });
            }
            p.add_term(t, c);
        }
        Ok(p)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &BTreeMap<Tree, Coeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: &Tree) -> Coeff {
        self.terms.get(t).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn add_term(&mut self, t: Tree, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&t) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&t);
                }
            }
            None => {
                self.terms.insert(t, c);
            }
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Polynomial, factor: &Coeff) {
        for (t, c) in &other.terms {
            self.add_term(t.clone(), factor * c);
        }
    }

    pub fn scaled(&self, factor: &Coeff) -> Polynomial {
        let mut p = Polynomial::zero(self.arity);
        p.add_scaled(self, factor);
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        p.add_scaled(other, &-Coeff::one());
        p
    }

    pub fn leading_term(&self, ord: &OrderingSpec) -> Result<(&Tree, &Coeff)> {
        self.terms
            .iter()
            .max_by(|a, b| ord.cmp_monomials(a.0, b.0))
            .ok_or(Error::ZeroPolynomial)
    }

    pub fn leading_monomial(&self, ord: &OrderingSpec) -> Option<&Tree> {
        self.leading_term(ord).ok().map(|(t, _)| t)
    }

    /// Scaled so that the leading coefficient is 1.
    pub fn monic(&self, ord: &OrderingSpec) -> Polynomial {
        match self.leading_term(ord) {
            Ok((_, c)) => self.scaled(&c.recip()),
            Err(_) => self.clone(),
        }
    }

    /// Coprime integer coefficients, the first term in canonical order
    /// positive.
    pub fn primitive(&self) -> Polynomial {
        let Some((_, first)) = self.terms.iter().next() else {
            return self.clone();
        };
        let mut c = content(self.terms.values());
        if first.is_negative() {
            c = -c;
        }
        self.scaled(&c.recip())
    }

    /// Terms sorted from largest to smallest under `ord`.
    pub fn sorted_terms(&self, ord: &OrderingSpec) -> Vec<(&Tree, &Coeff)> {
        let mut v: Vec<(&Tree, &Coeff)> = self.terms.iter().collect();
        v.sort_by(|a, b| ord.cmp_monomials(b.0, a.0));
        v
    }

    /// Text form with terms from largest to smallest (or in canonical order
    /// when no ordering is given).
    pub fn format(&self, sig: &Signature, ord: Option<&OrderingSpec>) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let terms: Vec<(&Tree, &Coeff)> = match ord {
            Some(o) => self.sorted_terms(o),
            None => self.terms.iter().collect(),
        };
        let mut s = String::new();
        for (i, (t, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                s.push_str(&abs.to_string());
                s.push(' ');
            }
            s.push_str(&format_tree(sig, t));
        }
        s
    }

    /// Parses a signed sum such as `b(b(1,2),3) - 1/2 b(1,b(2,3))`. Monomials
    /// may be given in any child order and are rewritten into the shuffle
    /// basis.
    pub fn parse(text: &str, sig: &Signature) -> Result<Polynomial> {
        let chars: Vec<char> = text.chars().collect();
        let err = |pos: usize, msg: &str| Error::Syntax {
            line: 1,
            col: pos + 1,
            msg: msg.to_string(),
        };
        let mut pos = 0;
        let mut arity = None;
        let mut poly = Polynomial::zero(0);
        let skip = |pos: &mut usize| {
            while *pos < chars.len() && chars[*pos].is_whitespace() {
                *pos += 1;
            }
        };
        let mut first = true;
        loop {
            skip(&mut pos);
            if pos >= chars.len() {
                if first {
                    return Err(err(pos, "empty polynomial"));
                }
                break;
            }
            let mut sign = Coeff::one();
            match chars[pos] {
                '+' => pos += 1,
                '-' => {
                    sign = -sign;
                    pos += 1
                }
                _ if !first => return Err(err(pos, "expected `+` or `-`")),
                _ => {}
            }
            first = false;
            skip(&mut pos);
            let mut coef = Coeff::one();
            let num_start = pos;
            while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '/') {
                pos += 1;
            }
            if pos > num_start {
                let lit: String = chars[num_start..pos].iter().collect();
                let mut after = pos;
                while after < chars.len() && chars[after].is_whitespace() {
                    after += 1;
                }
                if after < chars.len() && chars[after] == '*' && after + 1 < chars.len() && chars[after + 1].is_whitespace() {
                    after += 1;
                }
                let tree_follows = after < chars.len() && !matches!(chars[after], '+' | '-' | ',' | ')' | '(');
                if tree_follows && after > pos {
                    coef = parse_rational(&lit).ok_or_else(|| err(num_start, "bad rational literal"))?;
                    pos = after;
                } else {
                    pos = num_start;
                }
            }
            skip(&mut pos);
            let start = pos;
            let mut depth = 0i32;
            while pos < chars.len() {
                match chars[pos] {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            pos += 1;
                            break;
                        }
                        if depth < 0 {
                            return Err(err(pos, "unbalanced `)`"));
                        }
                    }
                    c if depth == 0 && (c == '+' || c == '-' || c.is_whitespace()) => break,
                    _ => {}
                }
                pos += 1;
            }
            if depth != 0 {
                return Err(err(pos, "unbalanced `(`"));
            }
            let piece: String = chars[start..pos].iter().collect();
            if piece.is_empty() {
                return Err(err(start, "expected a monomial"));
            }
            let raw = parse_tree(sig, &piece).map_err(|e| match e {
                Error::Syntax { col, msg, .. } => err(start + col - 1, &msg),
                other => other,
            })?;
            let (t, s) = sig.canonical_keep_labels(&raw)?;
            sig.validate(&t)?;
            match arity {
                None => {
                    arity = Some(t.arity());
                    poly.arity = t.arity();
                }
                Some(a) if a != t.arity() => {
                    return Err(Error::ArityMismatch {
                        expected: a,
                        got: t.arity(),
                    })
                }
                _ => {}
            }
            let c = if s > 0 { sign * coef } else { -(sign * coef) };
            poly.add_term(t, c);
        }
        Ok(poly)
    }
}

pub(crate) fn parse_rational(lit: &str) -> Option<Coeff> {
    let (n, d) = match lit.split_once('/') {
        Some((n, d)) => (n, d),
        None => (lit, "1"),
    };
    let n: num_bigint::BigInt = n.parse().ok()?;
    let d: num_bigint::BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Coeff::new(n, d))
}

/// One rewriting step: `factor` times the insertion of element `element` at
/// the occurrence rooted at `root` was subtracted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub monomial: Tree,
    pub element: usize,
    pub root: usize,
    #[serde(serialize_with = "crate::linalg::serialize_coeff")]
    pub factor: Coeff,
}

/// Long division against a fixed list of polynomials.
pub struct Reducer<'a> {
    ord: &'a OrderingSpec,
    basis: &'a [Polynomial],
    leads: Vec<Option<(Tree, Coeff)>>,
}

type WorkKey = (Vec<i32>, Tree);

impl<'a> Reducer<'a> {
    pub fn new(ord: &'a OrderingSpec, basis: &'a [Polynomial]) -> Self {
        let leads = basis
            .iter()
            .map(|g| g.leading_term(ord).ok().map(|(t, c)| (t.clone(), c.clone())))
            .collect();
        Reducer { ord, basis, leads }
    }

    /// First element (in list order) whose leading monomial divides `m`, and
    /// the root of its first occurrence.
    pub fn find_divisor(&self, m: &Tree) -> Option<(usize, usize)> {
        self.leads.iter().enumerate().find_map(|(i, lead)| {
            let (lt, _) = lead.as_ref()?;
            if lt.arity() > m.arity() || lt.degree() > m.degree() {
                return None;
            }
            first_divisor(m, lt).map(|root| (i, root))
        })
    }

    pub fn is_normal(&self, m: &Tree) -> bool {
        self.find_divisor(m).is_none()
    }

    /// The polynomial obtained by inserting element `i` at the occurrence of
    /// its leading term rooted at `root` of `m`.
    pub fn insertion(&self, m: &Tree, i: usize, root: usize) -> Option<Polynomial> {
        let (lt, _) = self.leads[i].as_ref()?;
        let mut p = Polynomial::zero(m.arity());
        for (t, c) in &self.basis[i].terms {
            p.add_term(replace_at(m, root, lt, t)?, c.clone());
        }
        Some(p)
    }

    fn push(&self, work: &mut BTreeMap<WorkKey, Coeff>, t: Tree, c: Coeff) {
        let key = (self.ord.sort_key(&t), t);
        match work.get_mut(&key) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    work.remove(&key);
                }
            }
            None => {
                if !c.is_zero() {
                    work.insert(key, c);
                }
            }
        }
    }

    fn run(&self, p: &Polynomial, mut trace: Option<&mut Vec<RewriteStep>>) -> Polynomial {
        let mut work: BTreeMap<WorkKey, Coeff> = BTreeMap::new();
        for (t, c) in &p.terms {
            self.push(&mut work, t.clone(), c.clone());
        }
        let mut out = Polynomial::zero(p.arity);
        while let Some(((_, m), c)) = work.pop_last() {
            match self.find_divisor(&m) {
                Some((i, root)) => {
                    let Some((lt, lc)) = self.leads[i].as_ref() else {
                        continue;
                    };
                    let factor = &c / lc;
                    for (t, tc) in &self.basis[i].terms {
                        if t == lt {
                            continue;
                        }
                        if let Some(nm) = replace_at(&m, root, lt, t) {
                            self.push(&mut work, nm, -(&factor * tc));
                        }
                    }
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.push(RewriteStep {
                            monomial: m,
                            element: i,
                            root,
                            factor,
                        });
                    }
                }
                None => out.add_term(m, c),
            }
        }
        out
    }

    /// Normal form: largest reducible monomial first, first element in list
    /// order, first occurrence in preorder.
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        self.run(p, None)
    }

    /// Normal form together with the rewriting steps taken.
    pub fn reduce_traced(&self, p: &Polynomial) -> (Polynomial, Vec<RewriteStep>) {
        let mut steps = Vec::new();
        let r = self.run(p, Some(&mut steps));
        (r, steps)
    }

    /// Normal form reached by rewriting a random reducible monomial with a
    /// random element and occurrence at every step.
    pub fn reduce_random(&self, p: &Polynomial, rng: &mut impl Rng) -> Polynomial {
        let mut cur = p.clone();
        loop {
            let reducible: Vec<&Tree> = cur.terms.keys().filter(|m| !self.is_normal(m)).collect();
            let Some(&m) = reducible.choose(rng) else {
                return cur;
            };
            let m = m.clone();
            let mut options = Vec::new();
            for (i, lead) in self.leads.iter().enumerate() {
                if let Some((lt, _)) = lead {
                    if let Ok(occs) = divisors(&m, lt) {
                        options.extend(occs.into_iter().map(|o| (i, o.root)));
                    }
                }
            }
            let Some(&(i, root)) = options.choose(rng) else {
                return cur;
            };
            let Some((_, lc)) = self.leads[i].as_ref() else {
                return cur;
            };
            let factor = cur.coefficient(&m) / lc;
            if let Some(ins) = self.insertion(&m, i, root) {
                cur.add_scaled(&ins, &-factor);
            }
        }
    }
}

/// Normal form of `p` modulo `basis`.
pub fn reduce(p: &Polynomial, basis: &[Polynomial], ord: &OrderingSpec) -> Polynomial {
    Reducer::new(ord, basis).reduce(p)
}

/// Sorts by arity, then by leading monomial.
pub(crate) fn sort_basis(basis: &mut [Polynomial], ord: &OrderingSpec) {
    basis.sort_by(|a, b| {
        a.arity.cmp(&b.arity).then_with(|| match (a.leading_monomial(ord), b.leading_monomial(ord)) {
            (Some(x), Some(y)) => ord.cmp_monomials(x, y),
            _ => std::cmp::Ordering::Equal,
        })
    });
}

/// Reduced form of a basis: every element monic, no monomial of any element
/// divisible by the leading monomial of another.
pub fn interreduce(basis: &[Polynomial], ord: &OrderingSpec) -> Vec<Polynomial> {
    let mut g: Vec<Polynomial> = basis.iter().filter(|p| !p.is_zero()).map(|p| p.monic(ord)).collect();
    sort_basis(&mut g, ord);
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < g.len() {
            let others: Vec<Polynomial> = g.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
            let r = Reducer::new(ord, &others).reduce(&g[i]);
            if r != g[i] {
                changed = true;
                if r.is_zero() {
                    g.remove(i);
                    continue;
                }
                g[i] = r.monic(ord);
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    sort_basis(&mut g, ord);
    g
}
