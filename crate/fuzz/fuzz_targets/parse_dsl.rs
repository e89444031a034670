#![no_main]

use libfuzzer_sys::fuzz_target;
use nsgb::dsl::{parse_document, parse_sample, print_presentation};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_sample(text);
    let Ok(doc) = parse_document(text) else { return };
    let Ok(p) = doc.presentation() else { return };
    let printed = print_presentation(&p);
    let again = parse_document(&printed).expect("printed presentation must parse");
    assert_eq!(print_presentation(&again.presentation().unwrap()), printed);
});
