// SPDX-License-Identifier: Apache-2.0
#![no_main]

//! Flag overrides: one `key<TAB>value` pair per line, applied on top of a
//! fixed base the way the CLI layers flags over a file.

use libfuzzer_sys::fuzz_target;
use qbattery::config::RawConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut raw = RawConfig::parse_str("model = chain\npreset = chain-ergodic\n").unwrap();
    for line in text.lines() {
        let (k, v) = line.split_once('\t').unwrap_or((line, ""));
        if raw.set(k, v).is_err() {
            return;
        }
    }
    if let Ok(parsed) = raw.build() {
        parsed.ensemble.validate().expect("accepted config is valid");
    }
});
