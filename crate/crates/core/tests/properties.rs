mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use nsgb::groebner::{buchberger_with, hilbert_series, normal_monomials, CompletionOptions, TruncatedGB};
use nsgb::linalg::{int, Coeff};
use nsgb::nschreier::{envelope_generator_count, pbw_generator_count};
use nsgb::oracle::{element, Oracle};
use nsgb::ordering::{check_admissible, parse_ordering, OrderingSpec, PRESETS};
use nsgb::poly::{Polynomial, Reducer};
use nsgb::presentation::{sym_canonical, GeneratorSpec, Symmetry};
use nsgb::shuffle_tree::{divisors, monomials, overlaps, replace, Signature, Tree};
use nsgb::symmetrize::{present_shuffle, shuffle_image};

fn signatures() -> Vec<(&'static str, Vec<GeneratorSpec>)> {
    vec![
        ("antisym", vec![GeneratorSpec::new("b", 2, Symmetry::Antisymmetric)]),
        ("plain", vec![GeneratorSpec::new("*", 2, Symmetry::Plain)]),
        (
            "mixed",
            vec![
                GeneratorSpec::new("o", 2, Symmetry::Symmetric),
                GeneratorSpec::new("br", 2, Symmetry::Antisymmetric),
            ],
        ),
        (
            "ternary",
            vec![
                GeneratorSpec::new("b", 2, Symmetry::Antisymmetric),
                GeneratorSpec::new("t", 3, Symmetry::Plain),
            ],
        ),
    ]
}

fn signature(i: usize) -> Signature {
    Signature::new(&signatures()[i % 4].1)
}

/// Rewrites a monomial as a raw term with permuted children and adjusted
/// variants denoting the same operation, returning the expected sign.
fn scramble(sig: &Signature, t: &Tree, rng: &mut ChaCha8Rng) -> (Tree, i32) {
    use rand::seq::SliceRandom;
    match t {
        Tree::Leaf(l) => (Tree::Leaf(*l), 1),
        Tree::Node(g, ch) => {
            let mut sign = 1;
            let kids: Vec<Tree> = ch
                .iter()
                .map(|c| {
                    let (k, s) = scramble(sig, c, rng);
                    sign *= s;
                    k
                })
                .collect();
            let mut pi: Vec<usize> = (0..kids.len()).collect();
            pi.shuffle(rng);
            let mut inv = vec![0u8; pi.len()];
            for (j, &p) in pi.iter().enumerate() {
                inv[p] = j as u8;
            }
            let gen = sig.gen(*g);
            let new_gen = if gen.antisymmetric {
                let swaps = (0..pi.len())
                    .flat_map(|i| (i + 1..pi.len()).map(move |j| (i, j)))
                    .filter(|&(i, j)| pi[i] > pi[j])
                    .count();
                if swaps % 2 == 1 {
                    sign = -sign;
                }
                *g
            } else {
                let v: Vec<u8> = gen.variant.iter().map(|&r| inv[r as usize]).collect();
                sig.variant_of(gen.family, &v)
            };
            let children = pi.iter().map(|&p| kids[p].clone()).collect();
            (Tree::Node(new_gen, children), sign)
        }
    }
}

fn pick(sig: &Signature, n: usize, seed: usize) -> Tree {
    let ms = monomials(sig, n);
    ms[seed % ms.len()].clone()
}

fn completed(name: &str, n: usize) -> TruncatedGB {
    gb(&presentation(name), "rgpl", None, n)
}

fn random_poly(sig: &Signature, n: usize, picks: &[(usize, i64)]) -> Polynomial {
    let ms = monomials(sig, n);
    Polynomial::from_terms(n, picks.iter().map(|&(i, c)| (ms[i % ms.len()].clone(), int(c)))).unwrap()
}

proptest! {
    #![proptest_config(Config::with_cases(64))]

    #[test]
    fn canonical_is_idempotent_and_meaning_preserving(s in 0usize..4, n in 2usize..6, pick_ix in 0usize..10_000, seed in 0u64..1000) {
        let sig = signature(s);
        let m = pick(&sig, n, pick_ix);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (raw, sign) = scramble(&sig, &m, &mut rng);
        prop_assert_eq!(sig.canonical(&raw).unwrap(), (m.clone(), sign));
        prop_assert_eq!(sig.canonical(&m).unwrap(), (m.clone(), 1));
    }

    #[test]
    fn replace_by_pattern_round_trips(s in 0usize..4, n in 3usize..6, k in 2usize..4, a in 0usize..10_000, b in 0usize..10_000) {
        let sig = signature(s);
        let host = pick(&sig, n, a);
        let pattern = pick(&sig, k.min(n), b);
        for occ in divisors(&host, &pattern).unwrap() {
            prop_assert_eq!(replace(&sig, &host, &occ, &pattern, &pattern).unwrap(), (host.clone(), 1));
        }
    }

    #[test]
    fn divisors_agree_with_brute_force(s in 0usize..4, n in 2usize..6, k in 2usize..5, a in 0usize..10_000, b in 0usize..10_000) {
        let sig = signature(s);
        let host = pick(&sig, n, a);
        let pattern = pick(&sig, k.min(n), b);
        prop_assert_eq!(library_divisors(&host, &pattern), brute_divisors(&host, &pattern));
    }

    #[test]
    fn overlaps_agree_with_brute_force(s in 0usize..3, k1 in 2usize..4, k2 in 2usize..4, a in 0usize..10_000, b in 0usize..10_000) {
        let sig = signature(s);
        let m1 = pick(&sig, k1, a);
        let m2 = pick(&sig, k2, b);
        prop_assert_eq!(library_overlaps(&m1, &m2, 5), brute_overlaps(&sig, &m1, &m2, 5));
        for site in overlaps(&m1, &m2, 5) {
            prop_assert!(divisors(&site.ambient, &m1).unwrap().contains(&site.occ1));
            prop_assert!(divisors(&site.ambient, &m2).unwrap().contains(&site.occ2));
        }
    }

    #[test]
    fn reduction_is_a_strategy_independent_projection(
        which in 0usize..3,
        n in 3usize..6,
        picks in proptest::collection::vec((0usize..10_000, -4i64..5), 1..8),
        seed in 0u64..1000,
    ) {
        let name = ["prelie", "mocklie", "lie"][which];
        let g = completed(name, 5);
        let p = random_poly(&g.signature, n, &picks);
        let red = Reducer::new(&g.ordering, &g.elements);
        let r = red.reduce(&p);
        prop_assert_eq!(red.reduce(&r), r.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(red.reduce_random(&p, &mut rng), r.clone());
        prop_assert!(r.terms().keys().all(|t| red.is_normal(t)));
        let (traced, steps) = red.reduce_traced(&p);
        prop_assert_eq!(&traced, &r);
        let mut rebuilt = r.clone();
        for st in &steps {
            let ins = red.insertion(&st.monomial, st.element, st.root).unwrap();
            rebuilt.add_scaled(&ins, &st.factor);
        }
        prop_assert_eq!(rebuilt, p);
    }

    #[test]
    fn membership_matches_reduction(
        which in 0usize..3,
        coeffs in proptest::collection::vec(-3i64..4, 3),
        perm_seed in 0usize..6,
        extra in proptest::collection::vec((0usize..10_000, -2i64..3), 0..3),
    ) {
        let name = ["lie", "prelie", "leibniz"][which];
        let p = presentation(name);
        let g = gb(&p, "rgpl", None, 3);
        let ids = p.multilinear_identities().unwrap();
        let perms = [[1u8, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
        let mut terms: Vec<(Tree, Coeff)> = Vec::new();
        for (k, id) in ids.iter().enumerate() {
            let sigma = perms[(perm_seed + k) % 6];
            for (t, c) in &id.terms {
                let (moved, s) = sym_canonical(&p.generators, &t.relabel(&|l| sigma[l as usize - 1]));
                terms.push((moved, c * int(coeffs[k % 3] * s as i64)));
            }
        }
        let basis = nsgb::oracle::free_basis(&p.generators, 3);
        for &(i, c) in &extra {
            terms.push((basis[i % basis.len()].clone(), int(c)));
        }
        let e = element(3, terms);
        let mut o = Oracle::new(&p).unwrap();
        let member = o.is_consequence(&e).unwrap().member;
        let image = shuffle_image(&g.signature, &e);
        let reduced = g.reduce(&image);
        prop_assert_eq!(member, reduced.is_zero());
    }
}

#[test]
fn enumeration_matches_independent_count() {
    fn shapes(sig: &Signature, holes: usize) -> Vec<Tree> {
        if holes == 1 {
            return vec![Tree::Leaf(0)];
        }
        let mut out = Vec::new();
        for g in 0..sig.len() as u16 {
            let k = sig.arity(g);
            for split in compositions(holes, k) {
                let mut partial: Vec<Vec<Tree>> = vec![vec![]];
                for part in split {
                    let opts = shapes(sig, part);
                    partial = partial
                        .into_iter()
                        .flat_map(|p| {
                            opts.iter().map(move |o| {
                                let mut q = p.clone();
                                q.push(o.clone());
                                q
                            })
                        })
                        .collect();
                }
                out.extend(partial.into_iter().map(|ch| Tree::Node(g, ch)));
            }
        }
        out
    }
    fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return vec![vec![total]];
        }
        (1..total)
            .flat_map(|first| {
                compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .filter(|v| v.len() == parts)
            .collect()
    }
    fn label(t: &Tree, labels: &[u8], next: &mut usize) -> Tree {
        match t {
            Tree::Leaf(_) => {
                *next += 1;
                Tree::Leaf(labels[*next - 1])
            }
            Tree::Node(g, ch) => Tree::Node(*g, ch.iter().map(|c| label(c, labels, next)).collect()),
        }
    }
    fn increasing(t: &Tree) -> bool {
        match t {
            Tree::Leaf(_) => true,
            Tree::Node(_, ch) => ch.windows(2).all(|w| w[0].min_leaf() < w[1].min_leaf()) && ch.iter().all(increasing),
        }
    }
    fn perms(n: usize) -> Vec<Vec<u8>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n as u8);
                out.push(q);
            }
        }
        out
    }
    for (name, gens) in signatures() {
        let sig = Signature::new(&gens);
        for n in 1..=5 {
            let mut count = 0;
            for shape in shapes(&sig, n) {
                for p in perms(n) {
                    if increasing(&label(&shape, &p, &mut 0)) {
                        count += 1;
                    }
                }
            }
            assert_eq!(monomials(&sig, n).len(), count, "{name} arity {n}");
        }
    }
}

#[test]
fn orderings_are_total_and_admissible() {
    for (name, gens) in signatures() {
        let sig = Signature::new(&gens);
        for preset in PRESETS {
            let ord = OrderingSpec::preset_default(preset, &sig).unwrap();
            for n in 2..=4 {
                let ms = monomials(&sig, n);
                for a in &ms {
                    for b in &ms {
                        let ab = ord.cmp_monomials(a, b);
                        assert_eq!(ab, ord.cmp_monomials(b, a).reverse());
                        assert_eq!(ab.is_eq(), a == b, "{name} {preset}");
                    }
                }
                let mut sorted = ms.clone();
                sorted.sort_by(|a, b| ord.cmp_monomials(a, b));
                for w in sorted.windows(3) {
                    assert!(ord.cmp_monomials(&w[0], &w[2]).is_lt(), "{name} {preset}: not transitive");
                }
            }
            let rep = check_admissible(&ord, &sig, 5, 500, 3);
            assert!(rep.passed, "{name} {preset}: {:?}", rep.counterexample);
        }
    }
}

#[test]
fn oracle_matches_groebner_for_every_preset() {
    for (name, p) in bundled_instances() {
        let mut o = Oracle::new(&p).unwrap();
        let od: Vec<usize> = (1..=4).map(|n| o.operad_dim(n).unwrap()).collect();
        for preset in PRESETS {
            let g = gb(&p, preset, None, 4);
            assert_eq!(dims(&g, 4), od, "{name} {preset}");
        }
    }
}

#[test]
fn consequence_dims_do_not_depend_on_identity_order() {
    let p = presentation("compatible-lie");
    let mut reversed = p.clone();
    reversed.identities.reverse();
    let mut a = Oracle::new(&p).unwrap();
    let mut b = Oracle::new(&reversed).unwrap();
    for n in 3..=4 {
        assert_eq!(a.consequence_dim(n).unwrap(), b.consequence_dim(n).unwrap());
    }
}

#[test]
fn parallel_and_serial_completion_agree() {
    for (name, p) in bundled_instances() {
        let sp = present_shuffle(&p).unwrap();
        let ord = parse_ordering("rgpl", None, &sp.signature).unwrap();
        let serial = buchberger_with(&sp, &ord, 5, &CompletionOptions::default());
        let parallel = buchberger_with(&sp, &ord, 5, &CompletionOptions::parallel());
        let a = serde_json::to_string(&serial.summary()).unwrap();
        let b = serde_json::to_string(&parallel.summary()).unwrap();
        assert_eq!(a, b, "{name}");
        assert_eq!(present_shuffle(&p).unwrap(), sp, "{name}");
    }
}

#[test]
fn generator_counts_bounded_by_dimensions() {
    for (name, p) in bundled_instances() {
        let r = gb(&p, "rgpl", None, 5);
        let l = gb(&p, "gpl", None, 5);
        let hr = hilbert_series(&r, 5).unwrap();
        let hl = hilbert_series(&l, 5).unwrap();
        for n in 1..=5 {
            assert!(envelope_generator_count(&r, n).unwrap() <= hr[n - 1].dim, "{name} {n}");
            assert!(pbw_generator_count(&l, n).unwrap() <= hl[n - 1].dim, "{name} {n}");
            assert_eq!(normal_monomials(&r, n).unwrap().len(), hr[n - 1].dim);
        }
    }
}

#[test]
fn completion_never_removes_normal_monomials_at_complete_arities() {
    for name in ["mocklie", "leibniz", "prelie"] {
        let p = presentation(name);
        let lower = gb(&p, "rgpl", None, 4);
        let higher = gb(&p, "rgpl", None, 5);
        for n in 1..=4 {
            if (2..=n).all(|k| lower.is_complete(k)) {
                assert_eq!(normal_monomials(&lower, n).unwrap(), normal_monomials(&higher, n).unwrap(), "{name} {n}");
            }
        }
    }
}

#[test]
fn failing_status_persists_with_larger_bound() {
    use nsgb::nschreier::{check_m1, CheckOptions, Status};
    for name in ["leibniz", "mocklie"] {
        let p = presentation(name);
        let lo = check_m1(&p, 4, &CheckOptions::default()).unwrap();
        let hi = check_m1(&p, 5, &CheckOptions::default()).unwrap();
        if lo.status == Status::Fails {
            assert_eq!(hi.status, Status::Fails, "{name}");
        }
    }
}

#[test]
fn orbit_span_is_independent_of_relabelling() {
    let p = presentation("prelie");
    let mut relabelled = p.clone();
    let mut ids = Vec::new();
    for id in &p.identities {
        let swapped: BTreeMap<_, _> = id
            .terms
            .iter()
            .map(|(t, c)| (swap_vars(t), c.clone()))
            .collect();
        ids.push(nsgb::presentation::RawIdentity::new(swapped));
    }
    relabelled.identities = ids;
    let a = present_shuffle(&p).unwrap();
    let b = present_shuffle(&relabelled).unwrap();
    assert_eq!(a.relations, b.relations);
}

fn swap_vars(t: &nsgb::presentation::Term) -> nsgb::presentation::Term {
    use nsgb::presentation::Term;
    match t {
        Term::Var(v) if v == "x" => Term::var("z"),
        Term::Var(v) if v == "z" => Term::var("x"),
        Term::Var(v) => Term::var(v),
        Term::App(f, args) => Term::app(f, args.iter().map(swap_vars).collect()),
    }
}
