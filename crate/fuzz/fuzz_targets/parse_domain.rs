#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(d) = genlab::io::parse_domain(text) {
        let json = genlab::io::domain_to_json(&d).unwrap();
        assert_eq!(genlab::io::parse_domain(&json).unwrap(), d);
    }
});
