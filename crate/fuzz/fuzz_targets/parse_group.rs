#![no_main]

use libfuzzer_sys::fuzz_target;
use solenoid::io::{group_from_json, group_to_json, parse_group};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    // Large permutation groups are valid but slow; keep inputs small.
    if s.len() > 512 {
        return;
    }
    if let Ok(k) = parse_group(s) {
        assert_eq!(group_from_json(&group_to_json(&k)).unwrap(), k);
    }
});
