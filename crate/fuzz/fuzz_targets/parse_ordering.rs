#![no_main]

use libfuzzer_sys::fuzz_target;
use nsgb::ordering::parse_ordering;
use nsgb::presentation::{GeneratorSpec, Symmetry};
use nsgb::shuffle_tree::Signature;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let sig = Signature::new(&[
        GeneratorSpec::new("b", 2, Symmetry::Antisymmetric),
        GeneratorSpec::new("*", 2, Symmetry::Plain),
    ]);
    let (order, gens) = match text.split_once('\n') {
        Some((o, g)) => (o, Some(g)),
        None => (text, None),
    };
    let _ = parse_ordering(order, gens, &sig);
});
