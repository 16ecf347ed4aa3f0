// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]
use libfuzzer_sys::fuzz_target;
use metrokit::qcore::{matrix_from_json, matrix_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = matrix_from_json(text) {
        let again =
            matrix_from_json(&matrix_to_json(&m).expect("parsed matrix serializes")).expect("round trip parses");
        assert_eq!(m, again);
    }
});
