// SPDX-License-Identifier: Apache-2.0
#![no_main]

use libfuzzer_sys::fuzz_target;
use qbattery::config::RawConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(raw) = RawConfig::parse_str(text) {
        if let Ok(parsed) = raw.build() {
            // Anything accepted must satisfy the runner's own checks.
            parsed.ensemble.validate().expect("accepted config is valid");
        }
    }
});
