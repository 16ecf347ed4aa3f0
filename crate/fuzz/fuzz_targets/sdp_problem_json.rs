// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]
use libfuzzer_sys::fuzz_target;
use metrokit::sdp::SdpProblem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = SdpProblem::from_json(text) {
        let again = SdpProblem::from_json(&p.to_json()).expect("round trip parses");
        assert_eq!(p, again);
    }
});
