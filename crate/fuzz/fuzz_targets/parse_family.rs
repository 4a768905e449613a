#![no_main]

use libfuzzer_sys::fuzz_target;

// file references are refused; the fuzzer only sees inline domains
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = genlab::io::parse_family(text, &genlab::io::no_refs);
    if let Ok(p) = genlab::io::parse_meta(text, &genlab::io::no_refs) {
        let json = genlab::io::meta_to_json(&p).unwrap();
        assert_eq!(
            genlab::io::parse_meta(&json, &genlab::io::no_refs).unwrap(),
            p
        );
    }
});
