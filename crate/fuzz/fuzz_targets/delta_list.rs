// SPDX-License-Identifier: Apache-2.0
#![no_main]

use libfuzzer_sys::fuzz_target;
use qbattery::config::parse_delta_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ds) = parse_delta_list(text) {
        assert!(!ds.is_empty());
        assert!(ds.iter().all(|d| d.is_finite() && *d >= 0.0));
    }
});
