#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 4096 {
        return;
    }
    if let Ok(r) = genlab::io::parse_rational(text) {
        let back = genlab::io::parse_rational(&r.to_string()).expect("display output parses");
        assert_eq!(back, r);
    }
});
