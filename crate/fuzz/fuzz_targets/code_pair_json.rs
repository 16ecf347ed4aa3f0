// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]
use libfuzzer_sys::fuzz_target;
use metrokit::qec::CodePair;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(code) = CodePair::from_json(text) {
        let again = CodePair::from_json(&code.to_json()).expect("round trip parses");
        assert_eq!(code, again);
    }
});
