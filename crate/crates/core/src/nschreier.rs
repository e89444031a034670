//! The two combinatorial conditions on leading terms, searched over ordering
//! families, with certification of the underlying bases and counting
//! consequences.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groebner::{buchberger_with, normal_monomials, quadratic_certificate, spolynomial, CompletionOptions, TruncatedGB};
use crate::linalg::{int, Coeff};
use crate::ordering::{OrderingSpec, OrderingSummary};
use crate::presentation::{GeneratorSpec, Presentation};
use crate::shuffle_tree::{
    format_tree, is_left_comb, min_leaf_at_root, overlaps, permutations, second_min_sibling_of_min, GenId, Tree,
};
use crate::symmetrize::{present_shuffle, ShufflePresentation};

pub const SCHEMA_VERSION: u32 = 1;

/// Generator orders are enumerated exhaustively up to this many variants.
pub const MAX_EXHAUSTIVE_VARIANTS: usize = 4;

/// Overlaps are checked explicitly for certification up to this arity.
pub const MAX_CERTIFICATION_ARITY: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    HoldsCertified,
    HoldsUpToBound,
    Fails,
}

impl Status {
    pub fn holds(self) -> bool {
        self != Status::Fails
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// No two leading terms overlap at any arity.
    NoOverlap,
    /// Counting against supplied Koszul dual dimensions.
    QuadraticCertificate,
    /// Every overlap of the final basis, at every arity, reduces to zero.
    CriticalPairsResolved,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NsByTheorem,
    NsUpToBound,
    CriterionFails,
    Inconclusive,
    /// Only the first condition was evaluated and it holds with certification.
    NsByConjecture,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::NsByTheorem => "NS-by-theorem",
            Verdict::NsUpToBound => "NS-up-to-bound",
            Verdict::CriterionFails => "criterion-fails",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NsByConjecture => "NS-by-conjecture",
        }
    }
}

/// Which orderings a condition is tested against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingFamily {
    pub m1_presets: Vec<String>,
    pub m2_presets: Vec<String>,
    /// Explicit generator orders; `None` enumerates them.
    pub generator_orders: Option<Vec<Vec<GenId>>>,
}

impl Default for OrderingFamily {
    fn default() -> Self {
        OrderingFamily {
            m1_presets: vec!["rgpl".into()],
            m2_presets: vec!["gpl".into(), "permfirst-rev-gpl".into()],
            generator_orders: None,
        }
    }
}

impl OrderingFamily {
    /// All permutations of the variants when there are few, otherwise the
    /// declared order only.
    pub fn generator_orders(&self, variants: usize) -> Vec<Vec<GenId>> {
        match &self.generator_orders {
            Some(orders) => orders.clone(),
            None if variants <= MAX_EXHAUSTIVE_VARIANTS => permutations(variants)
                .into_iter()
                .map(|p| p.into_iter().map(GenId::from).collect())
                .collect(),
            None => vec![(0..variants as GenId).collect()],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub family: OrderingFamily,
    pub conjecture_mode: bool,
    /// Koszul dual dimensions for arities 1, 2, ...
    pub koszul_dims: Option<Vec<u64>>,
    pub completion: CompletionOptions,
}

/// One completion and its evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderingRun {
    pub ordering: OrderingSummary,
    pub status: Status,
    pub certification: Certification,
    pub leading_terms: Vec<String>,
    pub witness: Option<String>,
    pub complete_up_to: usize,
    pub truncated: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub status: Status,
    /// The successful ordering, or the first one tried when all fail.
    pub ordering: Option<OrderingSummary>,
    pub arity_bound: usize,
    pub witness: Option<String>,
    pub certification: Certification,
    /// Descriptions of every ordering in the searched family.
    pub family: Vec<String>,
    pub runs: Vec<OrderingRun>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NsReport {
    pub schema_version: u32,
    pub presentation: String,
    pub arity_bound: usize,
    pub conjecture_mode: bool,
    pub m1: ConditionResult,
    pub m2: Option<ConditionResult>,
    pub verdict: Verdict,
    pub note: String,
}

const SUFFICIENCY_NOTE: &str = "the criterion is sufficient, not necessary: a failing criterion does not show that the variety lacks the Nielsen-Schreier property";

impl NsReport {
    pub fn summary(&self) -> String {
        let mut out = format!("presentation: {}\narity bound: {}\n", self.presentation, self.arity_bound);
        let mut cond = |label: &str, c: &ConditionResult| {
            out.push_str(&format!("{label}: {:?} ({:?})", c.status, c.certification));
            if let Some(o) = &c.ordering {
                out.push_str(&format!(" under {} gens {}", o.name, o.generator_order.join(">")));
            }
            if let Some(w) = &c.witness {
                out.push_str(&format!(", witness {w}"));
            }
            out.push_str(&format!(", {} orderings searched\n", c.family.len()));
        };
        cond("M1", &self.m1);
        if let Some(m2) = &self.m2 {
            cond("M2", m2);
        }
        out.push_str(&format!("verdict: {}\n", self.verdict.label()));
        out.push_str(&format!("note: {}\n", self.note));
        out
    }
}

fn certify(gb: &TruncatedGB, koszul_dims: Option<&[u64]>) -> Certification {
    if gb.truncated.is_some() {
        return Certification::None;
    }
    let leads = gb.leading_terms();
    let done = gb.complete_up_to();
    let mut any_overlap = false;
    let mut pending = Vec::new();
    for i in 0..leads.len() {
        for j in i..leads.len() {
            let max = leads[i].arity() + leads[j].arity() - 1;
            if max > done && max > MAX_CERTIFICATION_ARITY {
                return koszul(gb, koszul_dims);
            }
            for site in overlaps(&leads[i], &leads[j], max) {
                any_overlap = true;
                if site.ambient.arity() > done {
                    pending.push((i, j, site));
                }
            }
        }
    }
    if !any_overlap {
        return Certification::NoOverlap;
    }
    if koszul(gb, koszul_dims) == Certification::QuadraticCertificate {
        return Certification::QuadraticCertificate;
    }
    let resolved = pending.iter().all(|(i, j, site)| {
        spolynomial(site, &gb.elements[*i], &gb.elements[*j], &gb.ordering)
            .map(|s| gb.reduce(&s).is_zero())
            .unwrap_or(false)
    });
    if resolved {
        Certification::CriticalPairsResolved
    } else {
        Certification::None
    }
}

fn koszul(gb: &TruncatedGB, dims: Option<&[u64]>) -> Certification {
    match dims {
        Some(d) => match quadratic_certificate(gb, d, d.len()) {
            Ok(c) if c.passed => Certification::QuadraticCertificate,
            _ => Certification::None,
        },
        None => Certification::None,
    }
}

fn run_condition(
    sp: &ShufflePresentation,
    bound: usize,
    presets: &[String],
    opts: &CheckOptions,
    predicate: impl Fn(&Tree) -> bool,
) -> Result<ConditionResult> {
    let sig = &sp.signature;
    let mut specs = Vec::new();
    for preset in presets {
        for order in opts.family.generator_orders(sig.len()) {
            specs.push(OrderingSpec::preset(preset, order, sig)?);
        }
    }
    let family: Vec<String> = specs.iter().map(|s| s.describe(sig)).collect();
    let mut runs: Vec<OrderingRun> = Vec::new();
    let mut best: Option<usize> = None;
    for ord in &specs {
        let gb = buchberger_with(sp, ord, bound, &opts.completion);
        let leads = gb.leading_terms();
        let witness = leads.iter().find(|t| !predicate(t)).map(|t| format_tree(sig, t));
        let (status, certification) = match witness {
            Some(_) => (Status::Fails, Certification::None),
            None => match certify(&gb, opts.koszul_dims.as_deref()) {
                Certification::None => (Status::HoldsUpToBound, Certification::None),
                c => (Status::HoldsCertified, c),
            },
        };
        runs.push(OrderingRun {
            ordering: ord.summary(sig),
            status,
            certification,
            leading_terms: leads.iter().map(|t| format_tree(sig, t)).collect(),
            witness,
            complete_up_to: gb.complete_up_to(),
            truncated: gb.truncated.clone(),
        });
        let idx = runs.len() - 1;
        match status {
            Status::HoldsCertified => {
                best = Some(idx);
                break;
            }
            Status::HoldsUpToBound if best.is_none() => best = Some(idx),
            _ => {}
        }
    }
    let chosen = best.or(if runs.is_empty() { None } else { Some(0) });
    let (status, certification, witness, ordering) = match chosen {
        Some(i) => {
            let r = &runs[i];
            (r.status, r.certification, r.witness.clone(), Some(r.ordering.clone()))
        }
        None => (Status::Fails, Certification::None, None, None),
    };
    Ok(ConditionResult {
        status,
        ordering,
        arity_bound: bound,
        witness,
        certification,
        family,
        runs,
    })
}

fn bound_for(sp: &ShufflePresentation, n: usize) -> usize {
    n.max(sp.max_relation_arity()).max(2)
}

/// Every reverse-graded leading term has its minimal leaf at the root.
pub fn check_m1(p: &Presentation, n: usize, opts: &CheckOptions) -> Result<ConditionResult> {
    let sp = present_shuffle(p)?;
    check_m1_shuffle(&sp, n, opts)
}

pub fn check_m1_shuffle(sp: &ShufflePresentation, n: usize, opts: &CheckOptions) -> Result<ConditionResult> {
    run_condition(sp, bound_for(sp, n), &opts.family.m1_presets, opts, min_leaf_at_root)
}

/// For some ordering, every leading term is a left comb with leaves 1 and 2
/// siblings.
pub fn check_m2(p: &Presentation, n: usize, opts: &CheckOptions) -> Result<ConditionResult> {
    let sp = present_shuffle(p)?;
    check_m2_shuffle(&sp, n, opts)
}

pub fn check_m2_shuffle(sp: &ShufflePresentation, n: usize, opts: &CheckOptions) -> Result<ConditionResult> {
    run_condition(sp, bound_for(sp, n), &opts.family.m2_presets, opts, |t| {
        is_left_comb(t) && second_min_sibling_of_min(t)
    })
}

pub fn verdict(p: &Presentation, n: usize, opts: &CheckOptions) -> Result<NsReport> {
    let sp = present_shuffle(p)?;
    let m1 = check_m1_shuffle(&sp, n, opts)?;
    let (m2, verdict) = if opts.conjecture_mode {
        let v = match m1.status {
            Status::HoldsCertified => Verdict::NsByConjecture,
            Status::HoldsUpToBound => Verdict::Inconclusive,
            Status::Fails => Verdict::CriterionFails,
        };
        (None, v)
    } else {
        let m2 = check_m2_shuffle(&sp, n, opts)?;
        let v = match (m1.status, m2.status) {
            (Status::HoldsCertified, Status::HoldsCertified) => Verdict::NsByTheorem,
            (a, b) if a.holds() && b.holds() => Verdict::NsUpToBound,
            (Status::Fails, Status::Fails) => Verdict::CriterionFails,
            _ => Verdict::Inconclusive,
        };
        (Some(m2), v)
    };
    Ok(NsReport {
        schema_version: SCHEMA_VERSION,
        presentation: p.name.clone(),
        arity_bound: bound_for(&sp, n),
        conjecture_mode: opts.conjecture_mode,
        m1,
        m2,
        verdict,
        note: SUFFICIENCY_NOTE.into(),
    })
}

fn count_normal(gb: &TruncatedGB, n: usize, keep: impl Fn(&Tree) -> bool) -> Result<usize> {
    Ok(normal_monomials(gb, n)?.iter().filter(|t| keep(t)).count())
}

/// Normal monomials with the minimal leaf attached to the root.
pub fn envelope_generator_count(gb: &TruncatedGB, n: usize) -> Result<usize> {
    count_normal(gb, n, min_leaf_at_root)
}

/// Normal monomials that are left combs.
pub fn pbw_generator_count(gb: &TruncatedGB, n: usize) -> Result<usize> {
    count_normal(gb, n, is_left_comb)
}

/// Dimensions of the generator species by arity, starting at arity 1.
pub fn generator_dims(gens: &[GeneratorSpec]) -> Vec<u64> {
    let top = gens.iter().map(|g| g.arity).max().unwrap_or(1);
    let mut dims = vec![0; top];
    for g in gens {
        dims[g.arity - 1] += g.dimension();
    }
    dims
}

/// Lower bounds `n! [t^n] ∫ dt / (1 - f'(t))` for n = 1..=count, where `f`
/// is the exponential series of the generator dimensions (`dims[i]` is arity
/// `i + 1`).
pub fn lower_bound_series(dims: &[u64], count: usize) -> Vec<Coeff> {
    if count == 0 {
        return Vec::new();
    }
    let mut factorial = vec![Coeff::one()];
    for i in 1..=count {
        let next = &factorial[i - 1] * int(i as i64);
        factorial.push(next);
    }
    // f'(t) = sum_{n>=2} dims[n-1] t^(n-1) / (n-1)!
    let deriv: Vec<Coeff> = (0..count)
        .map(|k| match dims.get(k) {
            Some(&d) if k >= 1 => int(d as i64) / &factorial[k],
            _ => Coeff::zero(),
        })
        .collect();
    // h = 1 / (1 - f'), h[0] = 1, h[k] = sum_{j=1..k} f'[j] h[k-j]
    let mut h = vec![Coeff::one()];
    for k in 1..count {
        let mut acc = Coeff::zero();
        for j in 1..=k {
            acc += &deriv[j] * &h[k - j];
        }
        h.push(acc);
    }
    (1..=count)
        .map(|n| &h[n - 1] / int(n as i64) * &factorial[n])
        .collect()
}

/// Fails when the requested count exceeds what the basis was computed for.
pub fn require_bound(gb: &TruncatedGB, n: usize) -> Result<()> {
    if n > gb.arity_bound {
        return Err(Error::OutOfBound {
            requested: n,
            bound: gb.arity_bound,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Symmetry;

    fn ints(v: &[i64]) -> Vec<Coeff> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound_series(&[0, 1], 6), ints(&[1, 1, 2, 6, 24, 120]));
        assert_eq!(lower_bound_series(&[0, 2], 5), ints(&[1, 2, 8, 48, 384]));
    }

    #[test]
    fn generator_dimensions() {
        let gens = [
            GeneratorSpec::new("*", 2, Symmetry::Plain),
            GeneratorSpec::new("b", 2, Symmetry::Antisymmetric),
            GeneratorSpec::new("t", 3, Symmetry::Plain),
        ];
        assert_eq!(generator_dims(&gens), vec![0, 3, 6]);
    }

    #[test]
    fn family_enumeration() {
        let f = OrderingFamily::default();
        assert_eq!(f.generator_orders(2).len(), 2);
        assert_eq!(f.generator_orders(4).len(), 24);
        assert_eq!(f.generator_orders(7).len(), 1);
    }

    #[test]
    fn free_is_vacuous() {
        let p = Presentation {
            name: "free".into(),
            generators: vec![GeneratorSpec::new("*", 2, Symmetry::Plain)],
            identities: vec![],
        };
        let r = verdict(&p, 4, &CheckOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NsByTheorem);
        assert_eq!(r.m1.certification, Certification::NoOverlap);
    }
}
