#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(hc) = genlab::io::parse_class(text) {
        let json = genlab::io::class_to_json(&hc).unwrap();
        assert_eq!(genlab::io::parse_class(&json).unwrap(), hc);
        if hc.space().size() <= 12 && hc.len() <= 256 {
            let _ = genlab::dimensions::vc_dim(&hc);
        }
    }
});
