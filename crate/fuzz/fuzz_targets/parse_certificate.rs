#![no_main]

use genlab::model::{
    DomainFamily, Hypothesis, HypothesisClass, InstanceSpace, LabeledDistribution,
};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cert) = genlab::io::parse_certificate(text) else {
        return;
    };
    if cert.set.len() > 16 {
        return;
    }
    // verification must not panic on arbitrary indices
    let s = InstanceSpace::new(2).unwrap();
    let hc = HypothesisClass::new(
        s,
        vec![
            Hypothesis::new(vec![false, false]),
            Hypothesis::new(vec![true, true]),
        ],
    )
    .unwrap();
    let g = DomainFamily::new(s, vec![LabeledDistribution::point(s, 0, false).unwrap()]).unwrap();
    let q = genlab::dimensions::DimensionQuery::new(genlab::q(3, 10), genlab::q(1, 10)).unwrap();
    let _ = genlab::dimensions::verify_certificate(&cert, &hc, &g, &q);
});
