// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

#![no_main]
use libfuzzer_sys::fuzz_target;
use metrokit::control::ControlField;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = ControlField::from_csv(text) {
        let again =
            ControlField::from_csv(&field.to_csv().expect("parsed field serializes")).expect("round trip parses");
        assert_eq!(field, again);
    }
});
