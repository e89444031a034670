#![no_main]

use libfuzzer_sys::fuzz_target;
use nsgb::poly::Polynomial;
use nsgb::presentation::{GeneratorSpec, Symmetry};
use nsgb::shuffle_tree::{format_tree, parse_monomial, Signature};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let sig = Signature::new(&[
        GeneratorSpec::new("b", 2, Symmetry::Antisymmetric),
        GeneratorSpec::new("*", 2, Symmetry::Plain),
        GeneratorSpec::new("t", 3, Symmetry::Plain),
    ]);
    if let Ok(m) = parse_monomial(&sig, text) {
        assert_eq!(parse_monomial(&sig, &format_tree(&sig, &m)).unwrap(), m);
    }
    let _ = Polynomial::parse(text, &sig);
});
