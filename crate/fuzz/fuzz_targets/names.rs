// SPDX-License-Identifier: Apache-2.0
#![no_main]

use libfuzzer_sys::fuzz_target;
use qbattery::disorder::PhasePreset;
use qbattery::pauli::ModelKind;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<PhasePreset>() {
        assert_eq!(p.name(), text);
    }
    if let Ok(m) = text.parse::<ModelKind>() {
        assert_eq!(m.as_str(), text);
    }
});
