#![no_main]

use genlab::experiments::{LowerBoundConfig, ScalingConfig, UniformConvergenceConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = genlab::io::parse_json::<ScalingConfig>(text, "config") {
        let back: ScalingConfig =
            serde_json::from_value(serde_json::to_value(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
    let _ = genlab::io::parse_json::<UniformConvergenceConfig>(text, "config");
    let _ = genlab::io::parse_json::<LowerBoundConfig>(text, "config");
});
